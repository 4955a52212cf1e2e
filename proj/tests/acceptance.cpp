// Acceptance checks. One line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "rkls/diagnostics.hpp"
#include "rkls/errors.hpp"
#include "rkls/experiments.hpp"
#include "rkls/io.hpp"
#include "rkls/problems.hpp"
#include "test_util.hpp"

using namespace rkls;
using rkls::test::random_matrix;
using rkls::test::random_symmetric;
using rkls::test::random_vector;
using rkls::test::rel_diff;

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kInequalitySlack = 1e-10;
constexpr double kSameReportTol = 1e-12;
constexpr double kTightTol = 1e-12;
constexpr double kSpectralTol = 1e-8;
constexpr double kStandardErrors = 5.0;
constexpr double kIdentityBudgetSeconds = 10.0;
constexpr double kSpectralBudgetSeconds = 60.0;
constexpr double kFig1ResidualFactor = 0.2;
constexpr double kFig1PlateauFactor = 0.5;
constexpr double kFig1NormRatio = 0.5;
constexpr int kFig1Seeds = 10;
constexpr int kFig1NormRatioQuorum = 9;
constexpr double kFig3DropLow = 100.0;
constexpr double kFig3DropHigh = 5000.0;
constexpr double kFig3Factor = 3.0;
constexpr std::uint64_t kFig3Seed = 1;
constexpr double kAlphaLow = 1.2;
constexpr double kAlphaHigh = 6.0;
constexpr int kIterates = 20;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Instance {
  std::string label;
  MatrixXd A;
  VectorXd x_true, b;
};

Instance make_instance(std::string label, MatrixXd A, std::uint64_t seed) {
  Instance in{std::move(label), std::move(A), {}, {}};
  in.x_true = random_vector(in.A.cols(), seed);
  in.b = in.A * in.x_true;
  return in;
}

// Nineteen square instances from 5 to 50 in three families, plus 60x40.
std::vector<Instance> identity_sweep() {
  std::vector<Instance> out;
  for (int j = 0; j < 19; ++j) {
    const long n = 5 + (45 * j + 9) / 18;
    const std::uint64_t seed = 100 + static_cast<std::uint64_t>(j);
    switch (j % 3) {
      case 0: out.push_back(make_instance("gaussian", random_matrix(n, n, seed), seed + 1000)); break;
      case 1: out.push_back(make_instance("row-normalized", gen_gaussian_row_normalized(n, n, seed), seed + 1000)); break;
      default: out.push_back(make_instance("symmetric", random_symmetric(n, seed), seed + 1000)); break;
    }
  }
  out.push_back(make_instance("gaussian 60x40", random_matrix(60, 40, 999), 1999));
  return out;
}

std::vector<Instance> symmetric_sweep() {
  std::vector<Instance> out;
  for (int j = 0; j < 10; ++j) {
    const long n = 5 + 5 * j;
    const std::uint64_t seed = 300 + static_cast<std::uint64_t>(j);
    if (j % 2 == 0) out.push_back(make_instance("symmetric", random_symmetric(n, seed), seed + 1000));
    else out.push_back(make_instance("symmetric", gen_symmetric_gaussian(n, seed), seed + 1000));
  }
  out.push_back(make_instance("laplacian", gen_laplacian_1d(20), 1400));
  return out;
}

// Three-term form: ||Ar||^2 - 2/F ||A^T A r||^2 + 1/F sum_i (Ar)_i^2 ||A a_i||^2 / ||a_i||^2.
double three_term(const MatrixXd& A, const VectorXd& r) {
  const double frob = A.squaredNorm();
  const VectorXd ar = A * r;
  const VectorXd atar = A.transpose() * ar;
  double gains = 0;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double w = A.row(i).squaredNorm();
    if (w == 0) continue;
    gains += ar(i) * ar(i) * (A * A.row(i).transpose()).squaredNorm() / w;
  }
  return ar.squaredNorm() - 2.0 / frob * atar.squaredNorm() + gains / frob;
}

VectorXd iterate_for(const Instance& in, int t) {
  const double scale = std::pow(10.0, (t % 5) - 2);
  return in.x_true + scale * random_vector(in.A.cols(), 5000 + 37 * static_cast<std::uint64_t>(t) + in.A.size());
}

struct Shared {
  std::vector<Instance> sweep = identity_sweep();
  std::vector<FigureResult> fig1;
  std::optional<FigureResult> fig3;
};

Outcome exact_identity(Shared& sh) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  long checked = 0, failed = 0;
  for (const auto& in : sh.sweep) {
    for (int t = 0; t < kIterates; ++t) {
      const VectorXd x = iterate_for(in, t);
      const double oracle = expected_next(in.A, in.b, x, Functional{FunctionalKind::AResidualNormSq, 1});
      const double err = rel_diff(oracle, three_term(in.A, x - in.x_true));
      worst = std::max(worst, err);
      ++checked;
      if (!(err <= kIdentityTol)) ++failed;
    }
  }
  const double elapsed = seconds_since(t0);
  return {failed == 0 && elapsed < kIdentityBudgetSeconds,
          fmt("%ld iterates on %zu instances, %ld over tolerance, max rel err %.2e, %.2f s", checked,
              sh.sweep.size(), failed, worst, elapsed)};
}

Outcome theorem1_inequality(Shared& sh) {
  long checked = 0, failed = 0, rectangular = 0;
  double tightest = -1e300;
  for (const auto& in : sh.sweep) {
    const auto gains = row_gains(in.A, 1);
    for (int t = 0; t < kIterates; ++t) {
      const auto rep = theorem1_report(in.A, in.b, iterate_for(in, t), gains);
      ++checked;
      if (in.A.rows() > in.A.cols()) ++rectangular;
      if (!(rep.lhs_exact <= rep.rhs_bound + kInequalitySlack * (1 + std::abs(rep.rhs_bound)))) ++failed;
      tightest = std::max(tightest, (rep.lhs_exact - rep.rhs_bound) / std::max(1.0, std::abs(rep.rhs_bound)));
    }
  }
  return {failed == 0, fmt("%ld/%ld hold (%ld on 60x40), max (lhs-rhs)/|rhs| %.3e", checked - failed, checked,
                           rectangular, tightest)};
}

Outcome theorem2_inequality(Shared&) {
  long checked = 0, failed = 0, mismatched = 0;
  double worst_same = 0;
  for (const auto& in : symmetric_sweep()) {
    for (int ell = 1; ell <= 3; ++ell) {
      const auto gains = row_gains(in.A, ell);
      for (int t = 0; t < kIterates; ++t) {
        const VectorXd x = iterate_for(in, t);
        const auto rep = theorem2_report(in.A, in.b, x, gains);
        ++checked;
        if (!(rep.lhs_exact <= rep.rhs_bound + kInequalitySlack * (1 + std::abs(rep.rhs_bound)))) ++failed;
        if (ell == 1) {
          const auto t1 = theorem1_report(in.A, in.b, x);
          const double d = std::max({rel_diff(rep.lhs_exact, t1.lhs_exact), rel_diff(rep.rhs_bound, t1.rhs_bound),
                                     rel_diff(rep.current, t1.current), rel_diff(rep.decrement, t1.decrement)});
          worst_same = std::max(worst_same, d);
          if (!(d <= kSameReportTol)) ++mismatched;
        }
      }
    }
  }
  return {failed == 0 && mismatched == 0,
          fmt("%ld/%ld hold for ell in {1,2,3}; ell=1 vs theorem 1 max rel diff %.1e", checked - failed, checked,
              worst_same)};
}

Outcome identity_tightness(Shared&) {
  double worst = 0;
  for (long n : {2L, 10L, 100L}) {
    const MatrixXd I = MatrixXd::Identity(n, n);
    const VectorXd x_true = random_vector(n, 70 + static_cast<std::uint64_t>(n));
    const VectorXd b = x_true;
    for (int t = 0; t < 5; ++t) {
      const VectorXd x = random_vector(n, 80 + 13 * static_cast<std::uint64_t>(t) + static_cast<std::uint64_t>(n));
      const double expected = (1.0 - 1.0 / double(n)) * (x - x_true).squaredNorm();
      const auto r1 = theorem1_report(I, b, x);
      worst = std::max({worst, rel_diff(r1.lhs_exact, expected), rel_diff(r1.rhs_bound, expected)});
      for (int ell = 1; ell <= 3; ++ell) {
        const auto r2 = theorem2_report(I, b, x, ell);
        worst = std::max({worst, rel_diff(r2.lhs_exact, expected), rel_diff(r2.rhs_bound, expected)});
      }
    }
  }
  return {worst <= kTightTol, fmt("n in {2,10,100}, max rel err %.2e", worst)};
}

Outcome spectral_one_step(Shared&) {
  double worst = 0;
  long checked = 0;
  for (int j = 0; j < 10; ++j) {
    const long n = 3 + 3 * j;
    const std::uint64_t seed = 600 + static_cast<std::uint64_t>(j);
    const Instance in = j % 2 == 0 ? make_instance("gaussian", random_matrix(n, n, seed), seed + 50)
                                   : make_instance("row-normalized", gen_gaussian_row_normalized(n, n, seed), seed + 50);
    const auto s = svd(in.A);
    const double frob = in.A.squaredNorm();
    const VectorXd x = in.x_true + random_vector(n, seed + 99);
    ExpectationContext<double> ctx{&in.x_true, &s};
    for (int ell = 1; ell <= n; ++ell) {
      const double sigma = s.singular_values(ell - 1);
      const double predicted = (1 - sigma * sigma / frob) * (x - in.x_true).dot(s.right.col(ell - 1));
      const double exact = expected_next(in.A, in.b, x, Functional{FunctionalKind::SpectralCoeff, ell}, ctx);
      worst = std::max(worst, rel_diff(exact, predicted));
      ++checked;
    }
  }
  return {worst <= kSpectralTol, fmt("%ld coefficients over 10 instances, max rel err %.2e", checked, worst)};
}

Outcome spectral_multi_step(Shared&) {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr long kSteps = 100;
  RunConfig cfg;
  cfg.problem.n = 100;
  cfg.problem.rhs = RhsKind::Ones;
  cfg.seed = 61;
  cfg.steps = kSteps;
  cfg.record_stride = kSteps;
  cfg.runs = 200;
  cfg.diagnostics = {"spectral_coeff:1", "spectral_coeff:50", "spectral_coeff:100"};
  validate(cfg);
  const ProblemInstance p = build_problem(cfg.problem);
  const auto traces = run_many(p, cfg, make_probes(cfg.diagnostics, p));
  const double frob = p.A.squaredNorm();
  bool pass = true;
  std::string detail;
  const int ells[] = {1, 50, 100};
  for (std::size_t q = 0; q < 3; ++q) {
    const int ell = ells[q];
    const double sigma = p.svd->singular_values(ell - 1);
    const double c0 = (p.x0 - *p.x_true).dot(p.svd->right.col(ell - 1));
    const double predicted = std::pow(1 - sigma * sigma / frob, double(kSteps)) * c0;
    double mean = 0, ss = 0;
    for (const auto& t : traces) mean += t.rows.back().extras[q];
    mean /= double(traces.size());
    for (const auto& t : traces) ss += std::pow(t.rows.back().extras[q] - mean, 2);
    const double se = std::sqrt(ss / double(traces.size() - 1)) / std::sqrt(double(traces.size()));
    const double z = std::abs(mean - predicted) / se;
    if (!(z <= kStandardErrors)) pass = false;
    detail += fmt("ell=%d z=%.2f; ", ell, z);
  }
  const double elapsed = seconds_since(t0);
  return {pass && elapsed < kSpectralBudgetSeconds, detail + fmt("%.2f s", elapsed)};
}

Outcome figure1(Shared& sh) {
  int residual_ok = 0, plateau_ok = 0, norm_ok = 0;
  double worst_residual = 0, worst_plateau = 0, worst_ratio = 0;
  for (int s = 1; s <= kFig1Seeds; ++s) {
    sh.fig1.push_back(reproduce_fig1(static_cast<std::uint64_t>(s)));
    const FigureResult& f = sh.fig1.back();
    const auto& rows = f.traces.front().rows;
    const double r0 = rows.front().residual_norm;
    const double rmid = rows.at(kFig1Steps / 2).residual_norm;
    const double rend = rows.back().residual_norm;
    const double residual_factor = rend / r0;
    const double plateau = (rmid - rend) / (r0 - rmid);
    const double ratio = rows.back().iterate_norm / f.problem.x_true->norm();
    worst_residual = std::max(worst_residual, residual_factor);
    worst_plateau = std::max(worst_plateau, plateau);
    worst_ratio = std::max(worst_ratio, ratio);
    residual_ok += residual_factor <= kFig1ResidualFactor;
    plateau_ok += plateau <= kFig1PlateauFactor;
    norm_ok += ratio < kFig1NormRatio;
  }
  return {residual_ok == kFig1Seeds && plateau_ok == kFig1Seeds && norm_ok >= kFig1NormRatioQuorum,
          fmt("residual <= 0.2x initial in %d/%d (worst %.3f); plateau in %d/%d (worst %.3f); "
              "norm ratio < 0.5 in %d/%d (worst %.3f)",
              residual_ok, kFig1Seeds, worst_residual, plateau_ok, kFig1Seeds, worst_plateau, norm_ok, kFig1Seeds,
              worst_ratio)};
}

Outcome figure3(Shared& sh) {
  sh.fig3 = reproduce_fig3(kFig3Seed, kFig3Runs);
  const auto& f = *sh.fig3;
  bool in_band = true;
  double drop_mean = 0, dec_mean = 0, lo = 1e300, hi = -1e300;
  for (std::size_t j = 0; j < f.realized_drop.size(); ++j) {
    in_band = in_band && f.realized_drop[j] >= kFig3DropLow && f.realized_drop[j] <= kFig3DropHigh;
    lo = std::min(lo, f.realized_drop[j]);
    hi = std::max(hi, f.realized_drop[j]);
    drop_mean += f.realized_drop[j];
    dec_mean += f.cumulative_decrement[j];
  }
  drop_mean /= double(f.realized_drop.size());
  dec_mean /= double(f.realized_drop.size());
  const double ratio = drop_mean / std::abs(dec_mean);
  const bool within = dec_mean < 0 && ratio <= kFig3Factor && ratio >= 1.0 / kFig3Factor;
  return {in_band && within,
          fmt("drop of ||Ax-b||^2 in [%.1f, %.1f] over %zu runs, mean %.1f; mean cumulative decrement %.1f; "
              "ratio %.2f",
              lo, hi, f.realized_drop.size(), drop_mean, dec_mean, ratio)};
}

Outcome sv_envelope(Shared&) {
  RunConfig cfg;
  cfg.problem.n = 50;
  cfg.problem.rhs = RhsKind::Ones;
  cfg.seed = 91;
  cfg.steps = 500;
  cfg.record_stride = 50;
  cfg.runs = 500;
  cfg.diagnostics = {"error_normsq"};
  validate(cfg);
  const ProblemInstance p = build_problem(cfg.problem);
  const auto traces = run_many(p, cfg, make_probes(cfg.diagnostics, p));
  const double rate = sv_rate(*p.svd, p.A.squaredNorm());
  const double e0 = (p.x0 - *p.x_true).squaredNorm();
  bool pass = true;
  std::string detail = fmt("rate %.6f; ", rate);
  for (long k : {50L, 200L, 500L}) {
    const std::size_t row = static_cast<std::size_t>(k / cfg.record_stride);
    double mean = 0, ss = 0;
    for (const auto& t : traces) mean += t.rows.at(row).extras[0];
    mean /= double(traces.size());
    for (const auto& t : traces) ss += std::pow(t.rows[row].extras[0] - mean, 2);
    const double se = std::sqrt(ss / double(traces.size() - 1)) / std::sqrt(double(traces.size()));
    const double bound = std::pow(rate, double(k)) * e0;
    const bool ok = mean <= bound * (1 + kStandardErrors * se / mean);
    pass = pass && ok;
    detail += fmt("k=%ld mean/bound %.4f%s", k, mean / bound, k == 500 ? "" : "; ");
  }
  return {pass, detail};
}

Outcome alpha_sanity(Shared& sh) {
  bool band = true, bracket = true;
  double lo = 1e300, hi = -1e300;
  long bracketed = 0;
  auto check_bracket = [&](const MatrixXd& A, const SvdResult<double>& s) {
    const double a = alpha(A);
    const double smin = s.sigma_min(), smax = s.sigma_max();
    const double slack = 1e-12 * smax * smax;
    bracket = bracket && a >= smin * smin - slack && a <= smax * smax + slack;
    ++bracketed;
    return a;
  };
  for (const auto& f : sh.fig1) {
    const double a = check_bracket(f.problem.A, *f.problem.svd);
    band = band && a >= kAlphaLow && a <= kAlphaHigh;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  if (sh.fig3) {
    const double a = check_bracket(sh.fig3->problem.A, *sh.fig3->problem.svd);
    band = band && a >= kAlphaLow && a <= kAlphaHigh;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  for (const auto& in : sh.sweep) check_bracket(in.A, svd(in.A));
  for (const auto& in : symmetric_sweep()) check_bracket(in.A, svd(in.A));
  const long banded = static_cast<long>(sh.fig1.size()) + (sh.fig3 ? 1 : 0);
  return {band && bracket && banded == kFig1Seeds + 1,
          fmt("alpha in [%.3f, %.3f] for %ld instances with n in {100,500}; sigma_min^2 <= alpha <= sigma_1^2 "
              "on %ld instances: %s",
              lo, hi, banded, bracketed, bracket ? "yes" : "no")};
}

Outcome determinism(Shared&) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "rkls_acceptance";
  fs::remove_all(root);
  auto run_all = [&](const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<std::string> files;
    RunConfig solve;
    apply_config_text(solve,
                      "problem.kind = gaussian_row_normalized\nproblem.n = 40\nproblem.x0 = gaussian\nseed = 5\n"
                      "steps = 2000\nrecord_stride = 10\nruns = 3\n"
                      "diagnostics = theorem1, v1_cosine, spectral_coeff:40, error_normsq\n");
    solve.output_path = (dir / "solve.csv").string();
    for (auto& f : cmd_solve(solve)) files.push_back(f);

    RunConfig verify;
    apply_config_text(verify,
                      "problem.kind = symmetric_gaussian\nproblem.n = 30\nproblem.rhs = from_solution\nseed = 6\n"
                      "steps = 300\nrecord_stride = 3\nruns = 2\ntheorem = 2\nell = 1, 2, 3\n");
    verify.output_path = (dir / "verify.csv").string();
    for (auto& f : cmd_verify(verify).files) files.push_back(f);

    RunConfig mc;
    apply_config_text(mc,
                      "problem.kind = laplacian_1d\nproblem.n = 30\nseed = 7\nsteps = 1000\nrecord_stride = 20\n"
                      "runs = 6\ndiagnostics = hdot1, hdot2, decrement\n");
    mc.output_path = (dir / "mc.csv").string();
    cmd_montecarlo(mc);
    files.push_back(mc.output_path);
    for (long j = 0; j < mc.runs; ++j) files.push_back(run_output_path(mc.output_path, j));

    for (const char* fig : {"fig1", "fig2", "fig3"})
      for (auto& f : cmd_reproduce(fig, 8, (dir / fig).string())) files.push_back(f);
    return files;
  };
  const auto a = run_all(root / "a");
  const auto b = run_all(root / "b");
  long identical = 0;
  std::uintmax_t bytes = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    const std::string ta = read_file(a[i]);
    if (!ta.empty() && ta == read_file(b[i])) ++identical;
    bytes += ta.size();
  }
  return {a.size() == b.size() && identical == static_cast<long>(a.size()),
          fmt("%ld/%zu CSV files byte-identical across reruns (%ju bytes)", identical, a.size(), bytes)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome(Shared&)> check;
  };
  const Criterion criteria[] = {
      {"exact three-term identity", exact_identity},
      {"theorem 1 inequality", theorem1_inequality},
      {"theorem 2 inequality (symmetric, ell 1..3)", theorem2_inequality},
      {"identity-matrix tightness", identity_tightness},
      {"spectral decay, one step", spectral_one_step},
      {"spectral decay, 200 runs", spectral_multi_step},
      {"fig1 phenomenology", figure1},
      {"fig3 decrement vs realized drop", figure3},
      {"SV envelope", sv_envelope},
      {"alpha sanity", alpha_sanity},
      {"determinism", determinism},
  };
  Shared shared;
  int failures = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome out;
    try {
      out = c.check(shared);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::printf("%s  [%2d] %s: %s\n", out.pass ? "PASS" : "FAIL", index, c.name, out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
