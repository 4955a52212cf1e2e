// rkls: randomized Kaczmarz experiments.
//
// Exit codes: 0 success, 1 usage/config error, 2 verification failure,
// 3 numeric failure.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rkls/errors.hpp"
#include "rkls/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerify = 2;
constexpr int kExitNumeric = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> steps, runs, stride, n, m;
  std::optional<std::string> out, kind, rhs, x0, diagnostics;
  std::optional<int> theorem;
  std::vector<int> ells;
  std::vector<std::string> sets;
  bool same_seed = false;
  std::string figure;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--seed", f.seed, "base seed (required here or in the config)");
  cmd->add_option("--steps", f.steps, "number of Kaczmarz steps");
  cmd->add_option("--runs", f.runs, "independent runs");
  cmd->add_option("--out", f.out, "output CSV path");
  cmd->add_option("--stride", f.stride, "record every k-th step");
  cmd->add_option("--diagnostics", f.diagnostics, "comma-separated diagnostic names");
  cmd->add_option("--kind", f.kind, "problem kind");
  cmd->add_option("--n", f.n, "problem dimension");
  cmd->add_option("--m", f.m, "row count (gaussian_row_normalized)");
  cmd->add_option("--rhs", f.rhs, "ones | from_solution | from_file");
  cmd->add_option("--x0", f.x0, "zero | gaussian | from_file");
  cmd->add_option("--set", f.sets, "override any config key: --set key=value");
  cmd->add_flag("--same-seed", f.same_seed, "every run uses the base seed");
}

rkls::RunConfig resolve(const Flags& f) {
  rkls::RunConfig cfg;
  if (!f.config.empty()) rkls::apply_config_file(cfg, f.config);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw rkls::ConfigError(s, "--set expects key=value");
    rkls::apply_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.steps) cfg.steps = *f.steps;
  if (f.runs) cfg.runs = *f.runs;
  if (f.stride) cfg.record_stride = *f.stride;
  if (f.out) cfg.output_path = *f.out;
  if (f.diagnostics) rkls::apply_config_value(cfg, "diagnostics", *f.diagnostics);
  if (f.kind) rkls::apply_config_value(cfg, "problem.kind", *f.kind);
  if (f.n) cfg.problem.n = *f.n;
  if (f.m) cfg.problem.m = *f.m;
  if (f.rhs) rkls::apply_config_value(cfg, "problem.rhs", *f.rhs);
  if (f.x0) rkls::apply_config_value(cfg, "problem.x0", *f.x0);
  if (f.theorem) cfg.theorem = *f.theorem;
  if (!f.ells.empty()) cfg.ells = f.ells;
  if (f.same_seed) cfg.same_seed = true;
  if (!f.figure.empty()) cfg.figure = f.figure;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Kaczmarz / SGD for least squares: solve, verify, reproduce, montecarlo"};
  app.require_subcommand(1);
  Flags flags;

  auto* solve = app.add_subcommand("solve", "run the iteration and write one trace CSV per run");
  add_common(solve, flags);

  auto* verify = app.add_subcommand("verify", "check the one-step bounds at every recorded step");
  add_common(verify, flags);
  verify->add_option("--theorem", flags.theorem, "1 or 2")->check(CLI::IsMember({1, 2}));
  verify->add_option("--ell", flags.ells, "powers for theorem 2");

  auto* reproduce = app.add_subcommand("reproduce", "regenerate a figure's data");
  add_common(reproduce, flags);
  reproduce->add_option("--figure", flags.figure, "fig1, fig2 or fig3");

  auto* montecarlo = app.add_subcommand("montecarlo", "aggregate statistics over many runs");
  add_common(montecarlo, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    rkls::RunConfig cfg = resolve(flags);
    if (*solve) {
      for (const auto& f : rkls::cmd_solve(cfg)) std::cout << f << '\n';
    } else if (*verify) {
      const auto summary = rkls::cmd_verify(cfg);
      for (const auto& f : summary.files) std::cout << f << '\n';
      std::cout << summary.reports << " reports, " << summary.inequality_violations
                << " inequality violations, " << summary.identity_violations << " identity violations\n";
      if (!summary.ok()) return kExitVerify;
    } else if (*reproduce) {
      if (!cfg.seed) throw rkls::ConfigError("seed", "a seed is required");
      if (cfg.output_path.empty()) throw rkls::ConfigError("output_path", "an output directory is required");
      for (const auto& f : rkls::cmd_reproduce(cfg.figure, *cfg.seed, cfg.output_path)) std::cout << f << '\n';
    } else if (*montecarlo) {
      const auto stats = rkls::cmd_montecarlo(cfg);
      std::cout << cfg.output_path << " (" << stats.runs << " runs, " << stats.steps.size() << " steps)\n";
    }
  } catch (const rkls::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const rkls::ConvergenceError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const rkls::IllPosedError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const rkls::SpdError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const rkls::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}
