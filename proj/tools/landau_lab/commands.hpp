#pragma once

// The five subcommands. Each returns a process exit code; input problems are
// thrown as InputError and mapped to exit 2 by the caller.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv_io.hpp"
#include "landau/moments.hpp"
#include "landau/simulator.hpp"
#include "landau/transport.hpp"
#include "landau/verify.hpp"

namespace lab {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kViolation = 1;
inline constexpr int kInput = 2;
inline constexpr int kSolverCap = 3;
inline constexpr int kNumericalAbort = 4;
}  // namespace exit_code

namespace fs = std::filesystem;

struct Manifest {
  explicit Manifest(std::string cmd) : command(std::move(cmd)) {}
  std::string command;
  std::string status{"ok"};
  std::vector<std::string> outputs;
  json extra = json::object();
};

inline void write_manifest(const RunConfig& c, const Manifest& m) {
  json j{{"schema_version", kSchemaVersion},
         {"command", m.command},
         {"status", m.status},
         {"config", to_json(c)},
         {"outputs", m.outputs}};
  j.update(m.extra);
  require_valid(j, "/$defs/manifest", "manifest");
  write_atomic(fs::path(c.out_dir) / "manifest.json", j.dump(2) + "\n");
}

inline void emit(const RunConfig& c, Manifest& m, const std::string& name, const std::string& content) {
  write_atomic(fs::path(c.out_dir) / name, content);
  m.outputs.push_back(name);
}

inline std::vector<landau::Vec3> build_initial(RunConfig& c) {
  using namespace landau;
  const auto& s = c.initial;
  auto v3 = [](const std::vector<double>& x) { return Vec3{x[0], x[1], x[2]}; };
  if (s.kind == "file") {
    auto v = read_ensemble(s.path);
    if (v.size() < 2) throw InputError(s.path + ": ensemble needs at least 2 particles");
    c.n = v.size();
    return v;
  }
  if (s.kind == "gaussian") return initial::gaussian(c.n, v3(s.temperatures), c.seed);
  if (s.kind == "ball") return initial::ball(c.n, s.radius, c.seed);
  if (s.kind == "two_point") return initial::two_point(c.n, v3(s.a), v3(s.b), s.weight, c.seed);
  if (s.kind == "line") return initial::line(c.n, v3(s.direction), s.scale, c.seed);
  if (s.kind == "student_t") return initial::center_and_scale(initial::student_t(c.n, s.nu, c.seed), s.m2);
  throw InputError("unknown initial.kind " + s.kind);
}

inline landau::SchemeConfig scheme_config(const RunConfig& c) {
  landau::SchemeConfig cfg;
  cfg.dt = c.dt;
  cfg.truncation_k = c.truncation_k;
  cfg.scheme = c.scheme == "meanfield" ? landau::Scheme::kMeanfield : landau::Scheme::kPairwiseNoise;
  cfg.conserve = c.conserve;
  cfg.threads = c.threads;
  cfg.steps = 1;
  return cfg;
}

// ---------------------------------------------------------------------------
// verify

inline json suite_json(const landau::verify::SuiteResult& r) {
  json sample = json::object();
  for (const auto& nv : r.worst_sample) sample[nv.name] = nv.value;
  return json{{"name", r.name},
              {"samples", r.samples},
              {"violations", r.violations},
              {"tolerance", r.tolerance},
              {"max_violation", r.worst},
              {"largest_excess", std::isfinite(r.largest) ? json(r.largest) : json(nullptr)},
              {"worst_sample", sample},
              {"constants", r.constants},
              {"notes", r.notes}};
}

inline int cmd_verify(const RunConfig& c) {
  namespace v = landau::verify;
  const auto& o = c.verify;
  auto count = [&](double base) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(base * o.samples_factor))); };
  auto tol = [&](double d) { return o.tolerance.value_or(d); };
  auto seed = [&](std::uint64_t k) { return c.seed * 1000 + k; };
  const double eps = c.eps > 0.0 ? c.eps : 1.0;

  std::vector<v::SuiteResult> results;
  auto add = [&](auto&& rs) {
    if constexpr (std::is_same_v<std::decay_t<decltype(rs)>, v::SuiteResult>) results.push_back(rs);
    else results.insert(results.end(), rs.begin(), rs.end());
  };
  for (const auto& name : o.suites) {
    if (name == "kernel") add(v::kernel_suite({count(1e6), seed(1), tol(1e-10), {}}));
    else if (name == "phi") add(v::phi_suite({count(1e6), seed(2), tol(1e-12)}));
    else if (name == "conservation") add(v::conservation_suite({count(1e6), seed(3), tol(1e-12)}));
    else if (name == "ito") add(v::ito_suite({count(1e5), seed(4), tol(1e-8), {}}));
    else if (name == "fd") add(v::fd_suite({count(1e4), seed(5), tol(1e-4), 10.0}));
    else if (name == "cent") {
      v::CentSuiteOptions co;
      co.p_grid = o.p_grid;
      co.gamma_grid = o.gamma_grid;
      co.eps_grid = o.eps_grid;
      co.fit_samples = count(1e5);
      co.validation_samples = count(1e6);
      co.fit_seed = seed(6);
      co.validation_seed = seed(7);
      add(v::cent_suite(co));
    } else if (name == "g_chain") add(v::g_chain_suite(count(1e5), seed(8)));
    else if (name == "povzner") {
      for (double p : o.p_grid)
        if (p > 2.0) {
          auto r = v::povzner_suite(p, eps, landau::Gamma(c.gamma), count(1e4), seed(9));
          r.name += "[p=" + num(p) + "]";
          add(r);
        }
    } else if (name == "growth") add(v::growth_suite(std::max<std::size_t>(count(1e5), 20000), seed(10)));
    else if (name == "domination") {
      for (double p : o.p_grid) {
        auto r = v::domination_suite(p, count(1e5), seed(11));
        r.name += "[p=" + num(p) + "]";
        add(r);
      }
    } else if (name == "rti") add(v::measure_rti_suite({c.p, c.eps}, count(1e3), 5, count(1e5), seed(12)));
  }

  std::size_t violations = 0;
  json suites = json::array();
  for (const auto& r : results) {
    violations += r.violations;
    suites.push_back(suite_json(r));
    std::printf("%-48s samples=%-9zu violations=%zu\n", r.name.c_str(), r.samples, r.violations);
  }
  Manifest m{"verify"};
  const json report{{"schema_version", kSchemaVersion}, {"passed", violations == 0}, {"violations", violations}, {"suites", suites}};
  emit(c, m, "verify_report.json", report.dump(2) + "\n");
  if (violations) {
    m.status = "violation";
    for (const auto& r : results)
      if (!r.passed()) {
        std::fprintf(stderr, "violation in %s:", r.name.c_str());
        for (const auto& nv : r.worst_sample) std::fprintf(stderr, " %s=%s", nv.name.c_str(), num(nv.value).c_str());
        std::fprintf(stderr, "\n");
      }
  }
  write_manifest(c, m);
  std::printf("%zu suites, %zu violations\n", results.size(), violations);
  return violations ? exit_code::kViolation : exit_code::kOk;
}

// ---------------------------------------------------------------------------
// transport

inline int cmd_transport(const RunConfig& c, const std::string& file_a, const std::string& file_b,
                         const std::string& coupling_path, std::size_t cap) {
  const auto f = read_point_cloud(file_a);
  const auto g = read_point_cloud(file_b);
  landau::TransportOptions opts;
  opts.max_atoms = cap;
  landau::TransportResult res;
  try {
    res = landau::optimal_cost(f, g, {c.p, c.eps}, opts);
  } catch (const landau::SolverCapExceeded& e) {
    std::fprintf(stderr, "solver cap: %s\n", e.what());
    return exit_code::kSolverCap;
  }
  std::printf("%.12g\n", res.value);
  if (!coupling_path.empty()) {
    CsvWriter w({"i", "j", "mass"});
    for (const auto& e : res.plan) w.row({static_cast<double>(e.i), static_cast<double>(e.j), e.mass});
    write_atomic(coupling_path, w.str());
  }
  return exit_code::kOk;
}

// ---------------------------------------------------------------------------
// simulate

inline std::vector<std::string> diagnostics_header(const RunConfig& c) {
  std::vector<std::string> h{"t", "px", "py", "pz", "m2"};
  for (double p : c.orders)
    if (p != 2.0) h.push_back("m" + num(p));
  return h;
}

inline std::vector<double> diagnostics_row(const RunConfig& c, const std::vector<landau::Vec3>& v, double t) {
  const landau::Vec3 u = landau::detail::mean_velocity(v);
  std::vector<double> row{t, u.x, u.y, u.z, landau::empirical_moment(v, 2.0)};
  for (double p : c.orders)
    if (p != 2.0) row.push_back(landau::empirical_moment(v, p));
  return row;
}

inline int cmd_simulate(RunConfig c) {
  using namespace landau;
  ParticleEnsemble e;
  e.velocities = build_initial(c);
  e.gamma = Gamma(c.gamma);
  e.seed = c.seed;
  SchemeConfig cfg = scheme_config(c);
  cfg.steps = c.steps;

  CsvWriter diag(diagnostics_header(c));
  diag.row(diagnostics_row(c, e.velocities, 0.0));
  Manifest m{"simulate"};
  m.extra["truncation_auto_enabled"] = false;
  m.extra["truncation_k"] = opt_json(c.truncation_k);
  try {
    const auto rep = run(e, cfg, [&](const ParticleEnsemble& s) {
      if (s.step_index % c.output_every == 0 || s.step_index == c.steps) diag.row(diagnostics_row(c, s.velocities, s.time));
    });
    m.extra["truncation_auto_enabled"] = rep.truncation_auto_enabled;
    m.extra["truncation_k"] = opt_json(rep.truncation_k);
  } catch (const NumericalAbort& ex) {
    m.status = "numerical_abort";
    m.extra["message"] = ex.what();
  }
  emit(c, m, "diagnostics.csv", diag.str());
  emit(c, m, "final.csv", ensemble_csv(e.velocities));
  m.extra["final_time"] = e.time;
  write_manifest(c, m);
  if (m.status == "numerical_abort") {
    std::fprintf(stderr, "numerical abort at t=%s: %s\n", num(e.time).c_str(), m.extra["message"].get<std::string>().c_str());
    return exit_code::kNumericalAbort;
  }
  return exit_code::kOk;
}

// ---------------------------------------------------------------------------
// couple

namespace detail {

/// Running quantities for the stability exponent [1 + sup m_p][1 + int (1 + m_{p+g})].
struct ExponentTracker {
  double sup_mp{0.0};
  double integral{0.0};
  double last_mpg{0.0};

  void observe(double mp, double mp_tilde, double mpg, double mpg_tilde) {
    sup_mp = std::max({sup_mp, mp, mp_tilde});
    last_mpg = std::max(mpg, mpg_tilde);
  }
  void advance(double dt) { integral += dt * (1.0 + last_mpg); }  // left Riemann sum
  double functional() const { return (1.0 + sup_mp) * (1.0 + integral); }
};

}  // namespace detail

inline int cmd_couple(RunConfig c) {
  using namespace landau;
  const CostParams cp{c.p, c.eps};
  const auto base = build_initial(c);
  const auto dirs = initial::perturbation_directions(c.n, c.seed);
  std::vector<double> scales = c.couple.scales;
  if (scales.empty())
    for (int k = 0; k < c.couple.levels; ++k) {
      const double target = c.couple.target_cost / std::pow(2.0, k);
      scales.push_back(target > 0.0 ? initial::scale_for_aligned_cost(base, dirs, cp, target) : 0.0);
    }

  SharedNoiseBundle bundle;
  bundle.systems.push_back(base);
  for (double s : scales) bundle.systems.push_back(initial::perturb(base, dirs, s));
  bundle.gamma = Gamma(c.gamma);
  bundle.seed = c.seed;
  SchemeConfig cfg = scheme_config(c);

  const std::size_t levels = scales.size();
  std::vector<double> cost0(levels);
  std::vector<detail::ExponentTracker> track(levels);
  CsvWriter out({"level", "scale", "t", "aligned_cost", "optimal_cost", "m_p", "m_p_tilde", "m_pg", "m_pg_tilde", "exponent",
                 "c_fit"});

  auto observe = [&](bool write) {
    const auto& b = bundle.systems[0];
    const double mp = empirical_moment(b, c.p), mpg = empirical_moment(b, c.p + c.gamma);
    for (std::size_t k = 0; k < levels; ++k) {
      const auto& s = bundle.systems[k + 1];
      const double mpt = empirical_moment(s, c.p), mpgt = empirical_moment(s, c.p + c.gamma);
      track[k].observe(mp, mpt, mpg, mpgt);
      if (!write) continue;
      const double ac = aligned_cost(b, s, cp);
      if (bundle.step_index == 0) cost0[k] = ac;
      std::string opt;
      if (c.n <= c.couple.assignment_cap) {
        TransportOptions to;
        to.max_atoms = c.couple.assignment_cap;
        opt = num(optimal_cost(DiscreteMeasure::uniform(b), DiscreteMeasure::uniform(s), cp, to).value);
      }
      // smallest C consistent with cost(t) <= cost(0) exp(C * exponent)
      std::string cfit;
      if (cost0[k] > 0.0 && ac > 0.0)
        cfit = num(std::max(0.0, std::log(ac / cost0[k])) / track[k].functional());
      out.row_strings({std::to_string(k), num(scales[k]), num(bundle.time), num(ac), opt, num(mp), num(mpt), num(mpg),
                       num(mpgt), num(track[k].functional()), cfit});
    }
  };

  Manifest m{"couple"};
  std::optional<double> auto_k;
  const double k_auto = kAutoTruncationFactor * std::max(landau::max_speed(base), 1e-300);
  observe(true);
  try {
    for (std::size_t s = 1; s <= c.steps; ++s) {
      try {
        bundle.step(cfg);
      } catch (const NumericalAbort&) {
        if (cfg.truncation_k) throw;
        cfg.truncation_k = auto_k = k_auto;
        bundle.step(cfg);
      }
      for (auto& t : track) t.advance(c.dt);
      observe(s % c.output_every == 0 || s == c.steps);
    }
  } catch (const NumericalAbort& ex) {
    m.status = "numerical_abort";
    m.extra["message"] = ex.what();
  }
  emit(c, m, "stability.csv", out.str());
  emit(c, m, "final_base.csv", ensemble_csv(bundle.systems[0]));
  m.extra["final_time"] = bundle.time;
  m.extra["truncation_auto_enabled"] = auto_k.has_value();
  m.extra["truncation_k"] = opt_json(cfg.truncation_k);
  write_manifest(c, m);
  return m.status == "ok" ? exit_code::kOk : exit_code::kNumericalAbort;
}

// ---------------------------------------------------------------------------
// moments

inline int cmd_moments(const RunConfig& c) {
  using namespace landau;
  if (c.moments.input.empty()) throw InputError("moments: no input ensemble given");
  auto f = read_point_cloud(c.moments.input);
  if (c.moments.normalize) {
    const double m2 = empirical_moment(f, 2.0);
    if (!(m2 > 0.0)) throw InputError("moments: cannot normalize an ensemble with m2 = 0");
    for (auto& x : f.points) x *= 1.0 / std::sqrt(m2);
  }
  CsvWriter w({"kind", "param", "value", "clipped"});
  for (double p : c.moments.orders) w.row_strings({"moment", num(p), num(empirical_moment(f, p)), "0"});
  for (double a : c.moments.gaussian_a) {
    const auto g = gaussian_moment(f, a);
    w.row_strings({"gaussian", num(a), num(g.value), g.clipped ? "1" : "0"});
  }
  Manifest m{"moments"};
  emit(c, m, "moments.csv", w.str());
  write_manifest(c, m);
  std::fputs(w.str().c_str(), stdout);
  return exit_code::kOk;
}

}  // namespace lab
