#include "rkls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "rkls/diagnostics.hpp"
#include "rkls/io.hpp"
#include "rkls/sampling.hpp"

namespace rkls {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = std::min(s.find(',', pos), s.size());
    auto item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key, "expected an integer, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + value + "'");
}

}  // namespace

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& p = cfg.problem;
  if (key == "problem.kind") p.kind = parse_problem_kind(value);
  else if (key == "problem.n") p.n = parse_int<long>(key, value);
  else if (key == "problem.m") p.m = parse_int<long>(key, value);
  else if (key == "problem.seed") cfg.problem_seed = parse_int<std::uint64_t>(key, value);
  else if (key == "problem.rhs") p.rhs = parse_rhs_kind(value);
  else if (key == "problem.x0") p.x0 = parse_init_kind(value);
  else if (key == "problem.matrix_file") p.matrix_file = value;
  else if (key == "problem.rhs_file") p.rhs_file = value;
  else if (key == "problem.x0_file") p.x0_file = value;
  else if (key == "steps") cfg.steps = parse_int<long>(key, value);
  else if (key == "seed") cfg.seed = parse_int<std::uint64_t>(key, value);
  else if (key == "record_stride") cfg.record_stride = parse_int<long>(key, value);
  else if (key == "diagnostics") cfg.diagnostics = split_list(value);
  else if (key == "runs") cfg.runs = parse_int<long>(key, value);
  else if (key == "output_path") cfg.output_path = value;
  else if (key == "same_seed") cfg.same_seed = parse_bool(key, value);
  else if (key == "theorem") cfg.theorem = parse_int<int>(key, value);
  else if (key == "ell") {
    cfg.ells.clear();
    for (const auto& item : split_list(value)) cfg.ells.push_back(parse_int<int>(key, item));
  } else if (key == "figure") cfg.figure = value;
  else throw ConfigError(key, "unknown configuration key");
}

void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::size_t pos = 0;
  std::size_t number = 0;
  while (pos < text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    ++number;
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(ParseError::Kind::MalformedHeader, number, "expected 'key = value'");
    }
    apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  apply_config_text(cfg, read_file(path));
}

void validate(RunConfig& cfg) {
  if (!cfg.seed) throw ConfigError("seed", "a seed is required");
  if (cfg.steps < 0) throw ConfigError("steps", "must be >= 0");
  if (cfg.record_stride < 1) throw ConfigError("record_stride", "must be >= 1");
  if (cfg.runs < 1) throw ConfigError("runs", "must be >= 1");
  if (cfg.theorem != 1 && cfg.theorem != 2) throw ConfigError("theorem", "must be 1 or 2");
  for (int ell : cfg.ells)
    if (ell < 1) throw ConfigError("ell", "must be >= 1");
  for (const auto& d : cfg.diagnostics)
    if (!is_known_diagnostic(d)) throw ConfigError("diagnostics", "unknown diagnostic '" + d + "'");
  auto& p = cfg.problem;
  if (p.kind == ProblemKind::FromFile) {
    if (p.matrix_file.empty()) throw ConfigError("problem.matrix_file", "required for from_file");
  } else if (p.n < 2) {
    throw ConfigError("problem.n", "must be >= 2");
  }
  if (p.rhs == RhsKind::FromFile && p.rhs_file.empty()) throw ConfigError("problem.rhs_file", "required");
  if (p.x0 == InitKind::FromFile && p.x0_file.empty()) throw ConfigError("problem.x0_file", "required");
  p.seed = cfg.problem_seed.value_or(*cfg.seed);
}

std::uint64_t run_seed(const RunConfig& cfg, long j) {
  const std::uint64_t base = cfg.seed.value_or(0);
  return cfg.same_seed ? base : derive_seed(base, static_cast<std::uint64_t>(j));
}

std::string run_output_path(const std::string& base, long j) {
  const std::filesystem::path path(base);
  auto name = path.stem().string() + "_run" + std::to_string(j) + path.extension().string();
  return (path.parent_path() / name).string();
}

std::string trace_csv(const Trace& t) {
  std::string out = "k,residual_norm,error_norm,iterate_norm";
  for (const auto& c : t.extra_columns) out += "," + c;
  out += '\n';
  for (const auto& row : t.rows) {
    out += std::to_string(row.k);
    out += ',';
    out += format_double(row.residual_norm);
    out += ',';
    if (row.error_norm) out += format_double(*row.error_norm);
    out += ',';
    out += format_double(row.iterate_norm);
    for (double e : row.extras) {
      out += ',';
      out += format_double(e);
    }
    out += '\n';
  }
  return out;
}

std::vector<Trace> run_many(const ProblemInstance& p, const RunConfig& cfg,
                            const std::vector<Probe>& probes) {
  std::vector<Trace> traces(static_cast<std::size_t>(cfg.runs));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (long j = next++; j < cfg.runs; j = next++) {
      try {
        traces[static_cast<std::size_t>(j)] =
            run(p, RunOptions{cfg.steps, run_seed(cfg, j), cfg.record_stride}, probes);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const long workers = std::min<long>(cfg.runs, std::max(1U, std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (long w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return traces;
}

AggregateStats aggregate(const std::vector<Trace>& traces) {
  if (traces.empty()) throw Error("aggregate: no traces");
  const Trace& first = traces.front();
  const bool has_error =
      std::all_of(traces.begin(), traces.end(), [](const Trace& t) {
        return std::all_of(t.rows.begin(), t.rows.end(), [](const TraceRow& r) { return r.error_norm.has_value(); });
      });
  AggregateStats s;
  s.runs = static_cast<long>(traces.size());
  s.quantities = {"residual_norm"};
  if (has_error) s.quantities.push_back("error_norm");
  s.quantities.push_back("iterate_norm");
  s.quantities.insert(s.quantities.end(), first.extra_columns.begin(), first.extra_columns.end());

  for (const auto& t : traces) {
    if (t.rows.size() != first.rows.size() || t.extra_columns != first.extra_columns) {
      throw Error("aggregate: traces have different shapes");
    }
  }
  const std::size_t nq = s.quantities.size();
  for (std::size_t r = 0; r < first.rows.size(); ++r) {
    s.steps.push_back(first.rows[r].k);
    std::vector<Summary> row(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      std::vector<double> values;
      values.reserve(traces.size());
      for (const auto& t : traces) {
        const TraceRow& tr = t.rows[r];
        if (tr.k != first.rows[r].k) throw Error("aggregate: traces recorded different steps");
        std::size_t idx = q;
        if (idx == 0) { values.push_back(tr.residual_norm); continue; }
        if (has_error && idx == 1) { values.push_back(*tr.error_norm); continue; }
        const std::size_t iterate_idx = has_error ? 2 : 1;
        if (idx == iterate_idx) { values.push_back(tr.iterate_norm); continue; }
        values.push_back(tr.extras[idx - iterate_idx - 1]);
      }
      Summary& sm = row[q];
      // Shifted so that identical samples give an exact mean and zero spread.
      double sum = 0;
      for (double v : values) sum += v - values.front();
      sm.mean = values.front() + sum / static_cast<double>(values.size());
      double ss = 0;
      for (double v : values) ss += (v - sm.mean) * (v - sm.mean);
      sm.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
      sm.min = *std::min_element(values.begin(), values.end());
      sm.max = *std::max_element(values.begin(), values.end());
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

std::string aggregate_csv(const AggregateStats& s) {
  std::string out = "k";
  for (const auto& q : s.quantities) out += "," + q + "_mean," + q + "_std," + q + "_min," + q + "_max";
  out += '\n';
  for (std::size_t r = 0; r < s.steps.size(); ++r) {
    out += std::to_string(s.steps[r]);
    for (const auto& sm : s.rows[r]) {
      for (double v : {sm.mean, sm.std, sm.min, sm.max}) {
        out += ',';
        out += format_double(v);
      }
    }
    out += '\n';
  }
  return out;
}

namespace {

void require_output(const RunConfig& cfg) {
  if (cfg.output_path.empty()) throw ConfigError("output_path", "an output path is required");
}

std::vector<std::string> write_traces(const std::string& base, const std::vector<Trace>& traces) {
  std::vector<std::string> files;
  for (std::size_t j = 0; j < traces.size(); ++j) {
    files.push_back(run_output_path(base, static_cast<long>(j)));
    write_file(files.back(), trace_csv(traces[j]));
  }
  return files;
}

}  // namespace

std::vector<std::string> cmd_solve(RunConfig cfg) {
  validate(cfg);
  require_output(cfg);
  const ProblemInstance p = build_problem(cfg.problem);
  const auto probes = make_probes(cfg.diagnostics, p);
  return write_traces(cfg.output_path, run_many(p, cfg, probes));
}

VerifySummary cmd_verify(RunConfig cfg) {
  validate(cfg);
  require_output(cfg);
  const ProblemInstance p = build_problem(cfg.problem);

  std::vector<int> ells = cfg.ells;
  if (cfg.theorem == 1) {
    ells = {1};
  } else {
    if (ells.empty()) ells = {1};
    if (!is_symmetric(p.A, kSymmetryRelTol)) {
      throw SymmetryError("theorem 2 needs a symmetric matrix; problem kind '" +
                          to_string(cfg.problem.kind) + "' is not symmetric");
    }
  }

  struct Counters {
    std::atomic<long> reports{0}, inequality{0}, identity{0};
  };
  auto counters = std::make_shared<Counters>();
  auto A = std::make_shared<const MatrixXd>(p.A);
  auto b = std::make_shared<const VectorXd>(p.b);
  std::vector<Probe> probes;
  for (int ell : ells) {
    auto gains = std::make_shared<const RowGains<double>>(row_gains(p.A, ell));
    const std::string sfx = cfg.theorem == 1 ? "" : "_l" + std::to_string(ell);
    const std::string rhs_name = cfg.theorem == 1 ? "rhs_thm1" : "rhs_thm2";
    const bool symmetric_form = cfg.theorem == 2;
    probes.push_back(Probe{
        {"lhs_exact" + sfx, rhs_name + sfx, "identity_residual" + sfx, "decrement" + sfx},
        [=](const StepState& s, std::span<double> out) {
          const auto rep = symmetric_form ? theorem2_report(*A, *b, s.x, *gains)
                                          : theorem1_report(*A, *b, s.x, *gains);
          ++counters->reports;
          if (!rep.inequality_holds()) ++counters->inequality;
          if (!rep.identity_holds()) ++counters->identity;
          out[0] = rep.lhs_exact;
          out[1] = rep.rhs_bound;
          out[2] = rep.identity_residual;
          out[3] = rep.decrement;
        }});
  }

  const auto traces = run_many(p, cfg, probes);
  VerifySummary summary;
  for (std::size_t j = 0; j < traces.size(); ++j) {
    Trace t = traces[j];
    // Bound reports only: drop the norm columns by emitting a dedicated CSV.
    std::string csv = "k";
    for (const auto& c : t.extra_columns) csv += "," + c;
    csv += '\n';
    for (const auto& row : t.rows) {
      csv += std::to_string(row.k);
      for (double v : row.extras) {
        csv += ',';
        csv += format_double(v);
      }
      csv += '\n';
    }
    summary.files.push_back(run_output_path(cfg.output_path, static_cast<long>(j)));
    write_file(summary.files.back(), csv);
  }
  summary.reports = counters->reports;
  summary.inequality_violations = counters->inequality;
  summary.identity_violations = counters->identity;
  return summary;
}

AggregateStats cmd_montecarlo(RunConfig cfg) {
  validate(cfg);
  require_output(cfg);
  if (cfg.runs < 2) throw ConfigError("runs", "montecarlo needs at least 2 runs");
  const ProblemInstance p = build_problem(cfg.problem);
  const auto probes = make_probes(cfg.diagnostics, p);
  const auto traces = run_many(p, cfg, probes);
  write_traces(cfg.output_path, traces);
  AggregateStats stats = aggregate(traces);
  write_file(cfg.output_path, aggregate_csv(stats));
  return stats;
}

namespace {

RunConfig figure_config(ProblemKind kind, long n, InitKind x0, long steps, std::uint64_t seed, long runs) {
  RunConfig cfg;
  cfg.problem.kind = kind;
  cfg.problem.n = n;
  cfg.problem.rhs = RhsKind::Ones;
  cfg.problem.x0 = x0;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.runs = runs;
  cfg.record_stride = 1;
  return cfg;
}

FigureResult run_figure(RunConfig cfg) {
  validate(cfg);
  FigureResult out;
  out.problem = build_problem(cfg.problem);
  const auto probes = make_probes(cfg.diagnostics, out.problem);
  out.traces = run_many(out.problem, cfg, probes);
  return out;
}

}  // namespace

FigureResult reproduce_fig1(std::uint64_t seed) {
  return run_figure(figure_config(ProblemKind::GaussianRowNormalized, kFig1Size, InitKind::Zero,
                                  kFig1Steps, seed, 1));
}

FigureResult reproduce_fig2(std::uint64_t seed) {
  auto cfg = figure_config(ProblemKind::GaussianRowNormalized, kFig1Size, InitKind::Zero, kFig2Steps, seed, 1);
  cfg.diagnostics = {"v1_cosine"};
  return run_figure(cfg);
}

FigureResult reproduce_fig3(std::uint64_t seed, long runs) {
  auto cfg = figure_config(ProblemKind::GaussianRowNormalized, kFig3Size, InitKind::Gaussian, kFig3Steps, seed, runs);
  cfg.diagnostics = {"decrement"};
  FigureResult out = run_figure(cfg);
  for (const auto& t : out.traces) {
    double total = 0;
    for (const auto& row : t.rows)
      if (row.k < kFig3Steps) total += row.extras[0];
    const double first = t.rows.front().residual_norm;
    const double last = t.rows.back().residual_norm;
    out.cumulative_decrement.push_back(total);
    out.realized_drop.push_back(first * first - last * last);
  }
  return out;
}

std::vector<std::string> cmd_reproduce(const std::string& figure, std::uint64_t seed,
                                       const std::string& out_dir) {
  if (figure != "fig1" && figure != "fig2" && figure != "fig3") {
    throw ConfigError("figure", "expected fig1, fig2 or fig3, got '" + figure + "'");
  }
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> files;
  if (figure == "fig1" || figure == "fig2") {
    const auto res = figure == "fig1" ? reproduce_fig1(seed) : reproduce_fig2(seed);
    files.push_back((dir / (figure + ".csv")).string());
    write_file(files.back(), trace_csv(res.traces.front()));
    return files;
  }
  const auto res = reproduce_fig3(seed);
  files = write_traces((dir / "fig3.csv").string(), res.traces);
  files.push_back((dir / "fig3_aggregate.csv").string());
  write_file(files.back(), aggregate_csv(aggregate(res.traces)));

  std::string summary = "run,seed,initial_residual_normsq,final_residual_normsq,realized_drop,cumulative_decrement\n";
  for (std::size_t j = 0; j < res.traces.size(); ++j) {
    const auto& t = res.traces[j];
    const double first = t.rows.front().residual_norm;
    const double last = t.rows.back().residual_norm;
    summary += std::to_string(j) + "," + std::to_string(t.seed) + "," + format_double(first * first) + "," +
               format_double(last * last) + "," + format_double(res.realized_drop[j]) + "," +
               format_double(res.cumulative_decrement[j]) + "\n";
  }
  files.push_back((dir / "fig3_summary.csv").string());
  write_file(files.back(), summary);
  return files;
}

}  // namespace rkls
