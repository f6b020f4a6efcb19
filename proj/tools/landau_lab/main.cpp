// landau_lab: verification suites, exact transport, particle simulation and
// coupled stability runs for the homogeneous Landau equation.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

template <class T>
void override_with(T& target, const std::optional<T>& flag) {
  if (flag) target = *flag;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lab;
  CLI::App app{"Landau equation experiments: verify, transport, simulate, couple, moments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  bool dump_config = false;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "JSON config file (see landau_lab.schema.json)");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--threads", threads, "Worker threads for the pair sums");
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_flag("--dump-config", dump_config, "Print the effective config with all defaults and exit");

  std::optional<double> gamma, p, eps, dt, tolerance, samples_factor, target_cost;
  std::optional<std::size_t> n, steps, output_every;
  std::optional<std::string> scheme;
  bool conserve = false;

  auto* verify = app.add_subcommand("verify", "Run the identity and inequality suites; exit 1 on any violation");
  verify->add_option("--tolerance", tolerance, "Override the tolerance of the identity suites");
  verify->add_option("--samples-factor", samples_factor, "Multiplier on every suite's sample count");

  std::string file_a, file_b, coupling_path;
  std::size_t cap = landau::TransportOptions{}.max_atoms;
  auto* transport = app.add_subcommand("transport", "Optimal T_{p,eps} between two CSV point clouds");
  transport->add_option("a", file_a, "First point cloud (x,y,z[,w])")->required();
  transport->add_option("b", file_b, "Second point cloud (x,y,z[,w])")->required();
  transport->add_option("--coupling", coupling_path, "Write the optimal plan to this CSV");
  transport->add_option("--cap", cap, "Largest number of atoms accepted by the solver");

  auto* simulate = app.add_subcommand("simulate", "Particle simulation; writes diagnostics.csv, final.csv, manifest.json");
  auto* couple = app.add_subcommand(
      "couple", "Shared-noise runs of a base ensemble and perturbations of it; writes stability.csv (pair-noise scheme)");
  couple->add_option("--target-cost", target_cost, "Index-aligned cost of the largest perturbation at t = 0");

  std::string moments_input;
  auto* moments = app.add_subcommand("moments", "Moments and Gaussian moments of a CSV ensemble");
  moments->add_option("input", moments_input, "Ensemble CSV");

  for (auto* sub : {transport, couple}) {
    sub->add_option("--p", p, "Moment weight exponent, p >= 2");
    sub->add_option("--eps", eps, "Cost saturation eps in [0, 1]");
  }
  for (auto* sub : {simulate, couple}) {
    sub->add_option("--gamma", gamma, "Kernel exponent in (0, 1]");
    sub->add_option("--n", n, "Number of particles");
    sub->add_option("--dt", dt, "Time step");
    sub->add_option("--steps", steps, "Number of steps");
    sub->add_option("--output-every", output_every, "Write a diagnostics row every k steps");
  }
  simulate->add_option("--scheme", scheme, "pairwise or meanfield");
  simulate->add_flag("--conserve", conserve, "Pin momentum and energy after each step (variance reduction, off by default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_code::kOk : exit_code::kInput;
  }

  try {
    RunConfig c;
    if (!config_path.empty()) {
      json j;
      try {
        j = json::parse(read_file(config_path));
      } catch (const json::parse_error& e) {
        throw InputError(config_path + ": " + e.what());
      }
      apply_json(c, j);
    }
    override_with(c.seed, seed);
    override_with(c.threads, threads);
    override_with(c.out_dir, out_dir);
    override_with(c.gamma, gamma);
    override_with(c.p, p);
    override_with(c.eps, eps);
    override_with(c.dt, dt);
    override_with(c.n, n);
    override_with(c.steps, steps);
    override_with(c.output_every, output_every);
    override_with(c.scheme, scheme);
    if (conserve) c.conserve = true;
    if (tolerance) c.verify.tolerance = *tolerance;
    override_with(c.verify.samples_factor, samples_factor);
    override_with(c.couple.target_cost, target_cost);
    if (!moments_input.empty()) c.moments.input = moments_input;
    check_config(c);

    if (dump_config) {
      std::printf("%s\n", to_json(c).dump(2).c_str());
      return exit_code::kOk;
    }
    if (*verify) return cmd_verify(c);
    if (*transport) return cmd_transport(c, file_a, file_b, coupling_path, cap);
    if (*simulate) return cmd_simulate(c);
    if (*couple) return cmd_couple(c);
    if (*moments) return cmd_moments(c);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code::kInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code::kInput;
  } catch (const landau::NumericalAbort& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return exit_code::kNumericalAbort;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return exit_code::kNumericalAbort;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code::kInput;
  }
  return exit_code::kInput;
}
