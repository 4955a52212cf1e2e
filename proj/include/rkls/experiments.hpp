#pragma once

// Experiment commands behind the rkls CLI: solve, verify, reproduce, montecarlo.
// Every command is a deterministic function of its RunConfig; CSV output uses
// '.' decimals, '\n' line ends and 17 significant digits.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rkls/kaczmarz.hpp"
#include "rkls/problems.hpp"

namespace rkls {

struct RunConfig {
  ProblemSpec problem;
  std::optional<std::uint64_t> problem_seed;  // defaults to `seed`
  long steps = 0;
  std::optional<std::uint64_t> seed;
  long record_stride = 1;
  std::vector<std::string> diagnostics;
  long runs = 1;
  std::string output_path;
  bool same_seed = false;  // every run uses `seed` itself
  int theorem = 1;
  std::vector<int> ells;
  std::string figure;
};

/// "key = value" lines; '#' starts a comment. Keys mirror RunConfig fields,
/// with problem fields prefixed "problem.". Throws ConfigError naming the
/// offending key, ParseError for malformed lines.
void apply_config_text(RunConfig& cfg, const std::string& text);
void apply_config_file(RunConfig& cfg, const std::string& path);
/// Sets a single key; the same keys as the config file.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Range and registry checks; resolves problem.seed. Throws ConfigError.
void validate(RunConfig& cfg);

/// Seed of run j.
std::uint64_t run_seed(const RunConfig& cfg, long j);

/// "dir/name.csv" -> "dir/name_run<j>.csv".
std::string run_output_path(const std::string& base, long j);

std::string trace_csv(const Trace& t);

/// Runs `runs` independent traces (concurrently) on one problem.
std::vector<Trace> run_many(const ProblemInstance& p, const RunConfig& cfg,
                            const std::vector<Probe>& probes);

struct Summary {
  double mean = 0, std = 0, min = 0, max = 0;
};

/// Per recorded step and per traced quantity, statistics across runs.
/// std is the sample standard deviation (divisor N - 1).
struct AggregateStats {
  std::vector<std::string> quantities;
  std::vector<long> steps;
  std::vector<std::vector<Summary>> rows;  // rows[step][quantity]
  long runs = 0;
};

AggregateStats aggregate(const std::vector<Trace>& traces);
std::string aggregate_csv(const AggregateStats& s);

// ---------------------------------------------------------------------------
// Commands

/// Writes one trace CSV per run; returns the paths.
std::vector<std::string> cmd_solve(RunConfig cfg);

struct VerifySummary {
  long reports = 0;
  long inequality_violations = 0;
  long identity_violations = 0;
  std::vector<std::string> files;
  bool ok() const { return inequality_violations == 0 && identity_violations == 0; }
};

/// Bound reports at every recorded step for theorem 1 or theorem 2 (per ell).
VerifySummary cmd_verify(RunConfig cfg);

/// Aggregate statistics across runs; writes per-run traces and the aggregate.
AggregateStats cmd_montecarlo(RunConfig cfg);

struct FigureResult {
  ProblemInstance problem;
  std::vector<Trace> traces;
  // fig3 only, per run:
  std::vector<double> cumulative_decrement;  // sum_{k < steps} of the predicted one-step drift
  std::vector<double> realized_drop;         // ||Ax_0 - b||^2 - ||Ax_steps - b||^2
};

inline constexpr long kFig1Size = 100;
inline constexpr long kFig1Steps = 20000;
inline constexpr long kFig2Steps = 10000;
inline constexpr long kFig3Size = 500;
inline constexpr long kFig3Steps = 3000;
inline constexpr long kFig3Runs = 5;

/// fig1: n = 100 row-normalized Gaussian, b = ones, x0 = 0, 20000 steps.
FigureResult reproduce_fig1(std::uint64_t seed);
/// fig2: same instance type, <(x_k - x)/||x_k - x||, v_1> per step.
FigureResult reproduce_fig2(std::uint64_t seed);
/// fig3: n = 500, b = ones, Gaussian x0, 3000 steps, several runs with the
/// per-step decrement alpha/F ||Ax_k-b||^2 - 2/F ||A^T(Ax_k-b)||^2.
FigureResult reproduce_fig3(std::uint64_t seed, long runs = kFig3Runs);

/// Runs the figure and writes its CSVs under out_dir; returns the paths.
std::vector<std::string> cmd_reproduce(const std::string& figure, std::uint64_t seed,
                                       const std::string& out_dir);

}  // namespace rkls
