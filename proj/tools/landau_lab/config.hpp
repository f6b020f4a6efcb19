#pragma once

// Run configuration: defaults, JSON round trip and the checks the schema
// cannot express (keys required by a particular initial-condition kind).

#include <optional>
#include <string>
#include <vector>

#include "csv_io.hpp"
#include "json.hpp"
#include "schema.hpp"

namespace lab {

inline constexpr int kSchemaVersion = 1;

/// Contents of landau_lab.schema.json, embedded at build time.
const char* schema_text();

inline const SchemaValidator& schema() {
  static const SchemaValidator v(json::parse(schema_text()));
  return v;
}

struct InitialSpec {
  std::string kind{"gaussian"};
  std::vector<double> temperatures{1.0, 1.0, 1.0};
  double radius{1.0};
  std::vector<double> a{1.0, 0.0, 0.0};
  std::vector<double> b{-1.0, 0.0, 0.0};
  double weight{0.5};
  std::vector<double> direction{1.0, 0.0, 0.0};
  double scale{1.0};
  double nu{5.0};
  double m2{1.0};
  std::string path;
};

struct VerifySpec {
  double samples_factor{0.02};
  std::optional<double> tolerance;
  std::vector<double> p_grid{2.5, 3.0, 4.0};
  std::vector<double> gamma_grid{0.5, 1.0};
  std::vector<double> eps_grid{0.05, 0.25, 1.0};
  std::vector<std::string> suites{"kernel", "phi", "conservation", "ito", "fd", "cent",
                                  "g_chain", "povzner", "growth", "domination", "rti"};
};

struct CoupleSpec {
  double target_cost{0.1};
  int levels{3};
  std::vector<double> scales;  // explicit perturbation scales; derived from target_cost when empty
  std::size_t assignment_cap{500};
};

struct MomentsSpec {
  std::string input;
  std::vector<double> orders{2.0, 4.0, 6.0};
  std::vector<double> gaussian_a{0.1};
  bool normalize{false};
};

struct RunConfig {
  std::uint64_t seed{1};
  unsigned threads{1};
  std::string out_dir{"out"};
  double gamma{1.0};
  double p{3.0};
  double eps{1.0};
  std::size_t n{1000};
  double dt{1e-3};
  std::size_t steps{100};
  std::string scheme{"pairwise"};
  bool conserve{false};
  std::optional<double> truncation_k;
  std::size_t output_every{1};
  std::vector<double> orders{4.0};
  InitialSpec initial;
  VerifySpec verify;
  CoupleSpec couple;
  MomentsSpec moments;
};

inline json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

inline json to_json(const RunConfig& c) {
  const auto& i = c.initial;
  return json{
      {"schema_version", kSchemaVersion},
      {"seed", c.seed},
      {"threads", c.threads},
      {"out_dir", c.out_dir},
      {"gamma", c.gamma},
      {"p", c.p},
      {"eps", c.eps},
      {"n", c.n},
      {"dt", c.dt},
      {"steps", c.steps},
      {"scheme", c.scheme},
      {"conserve", c.conserve},
      {"truncation_k", opt_json(c.truncation_k)},
      {"output_every", c.output_every},
      {"orders", c.orders},
      {"initial",
       {{"kind", i.kind},
        {"temperatures", i.temperatures},
        {"radius", i.radius},
        {"a", i.a},
        {"b", i.b},
        {"weight", i.weight},
        {"direction", i.direction},
        {"scale", i.scale},
        {"nu", i.nu},
        {"m2", i.m2},
        {"path", i.path}}},
      {"verify",
       {{"samples_factor", c.verify.samples_factor},
        {"tolerance", opt_json(c.verify.tolerance)},
        {"p_grid", c.verify.p_grid},
        {"gamma_grid", c.verify.gamma_grid},
        {"eps_grid", c.verify.eps_grid},
        {"suites", c.verify.suites}}},
      {"couple",
       {{"target_cost", c.couple.target_cost},
        {"levels", c.couple.levels},
        {"scales", c.couple.scales},
        {"assignment_cap", c.couple.assignment_cap}}},
      {"moments",
       {{"input", c.moments.input},
        {"orders", c.moments.orders},
        {"gaussian_a", c.moments.gaussian_a},
        {"normalize", c.moments.normalize}}},
  };
}

namespace detail {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j[key].get<T>();
}

inline void take_opt(const json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  if (j[key].is_null()) out.reset();
  else out = j[key].get<double>();
}

}  // namespace detail

inline void require_valid(const json& doc, const std::string& pointer, const std::string& what) {
  const auto errors = schema().validate(doc, pointer);
  if (errors.empty()) return;
  std::string msg = what + " fails schema validation:";
  for (const auto& e : errors) msg += "\n  " + e;
  throw InputError(msg);
}

/// Overlay the keys of a validated config document onto `c`.
inline void apply_json(RunConfig& c, const json& j) {
  require_valid(j, "/$defs/run_config", "config");
  using detail::take;
  take(j, "seed", c.seed);
  take(j, "threads", c.threads);
  take(j, "out_dir", c.out_dir);
  take(j, "gamma", c.gamma);
  take(j, "p", c.p);
  take(j, "eps", c.eps);
  take(j, "n", c.n);
  take(j, "dt", c.dt);
  take(j, "steps", c.steps);
  take(j, "scheme", c.scheme);
  take(j, "conserve", c.conserve);
  detail::take_opt(j, "truncation_k", c.truncation_k);
  take(j, "output_every", c.output_every);
  take(j, "orders", c.orders);
  if (j.contains("initial")) {
    const json& i = j["initial"];
    auto& s = c.initial;
    take(i, "kind", s.kind);
    take(i, "temperatures", s.temperatures);
    take(i, "radius", s.radius);
    take(i, "a", s.a);
    take(i, "b", s.b);
    take(i, "weight", s.weight);
    take(i, "direction", s.direction);
    take(i, "scale", s.scale);
    take(i, "nu", s.nu);
    take(i, "m2", s.m2);
    take(i, "path", s.path);
  }
  if (j.contains("verify")) {
    const json& v = j["verify"];
    take(v, "samples_factor", c.verify.samples_factor);
    detail::take_opt(v, "tolerance", c.verify.tolerance);
    take(v, "p_grid", c.verify.p_grid);
    take(v, "gamma_grid", c.verify.gamma_grid);
    take(v, "eps_grid", c.verify.eps_grid);
    take(v, "suites", c.verify.suites);
  }
  if (j.contains("couple")) {
    const json& v = j["couple"];
    take(v, "target_cost", c.couple.target_cost);
    take(v, "levels", c.couple.levels);
    take(v, "scales", c.couple.scales);
    take(v, "assignment_cap", c.couple.assignment_cap);
  }
  if (j.contains("moments")) {
    const json& v = j["moments"];
    take(v, "input", c.moments.input);
    take(v, "orders", c.moments.orders);
    take(v, "gaussian_a", c.moments.gaussian_a);
    take(v, "normalize", c.moments.normalize);
  }
}

/// Re-validates the effective config (flags may have changed it) and checks
/// the cross-key rules.
inline void check_config(const RunConfig& c) {
  require_valid(to_json(c), "/$defs/run_config", "effective config");
  if (c.initial.kind == "file" && c.initial.path.empty()) throw InputError("initial.kind = file needs initial.path");
  if (c.initial.kind == "line" && c.initial.direction == std::vector<double>{0.0, 0.0, 0.0})
    throw InputError("initial.direction must be nonzero");
}

}  // namespace lab
