#include "rkls/diagnostics.hpp"

#include <charconv>
#include <memory>

namespace rkls {

namespace {

// Splits "head:<int>" into head and a positive integer.
std::optional<std::pair<std::string_view, int>> split_indexed(std::string_view name) {
  const auto colon = name.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const std::string_view tail = name.substr(colon + 1);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), value);
  if (ec != std::errc() || ptr != tail.data() + tail.size() || value < 1) return std::nullopt;
  return std::pair{name.substr(0, colon), value};
}

}  // namespace

Functional Functional::parse(std::string_view name) {
  if (name == "A_residual_normsq") return {FunctionalKind::AResidualNormSq, 1};
  if (name == "error_normsq") return {FunctionalKind::ErrorNormSq, 1};
  if (const auto idx = split_indexed(name)) {
    if (idx->first == "A_ell_residual_normsq") return {FunctionalKind::AEllResidualNormSq, idx->second};
    if (idx->first == "spectral_coeff") return {FunctionalKind::SpectralCoeff, idx->second};
  }
  throw UnknownFunctionalError("unknown functional '" + std::string(name) + "'");
}

std::string Functional::name() const {
  switch (kind) {
    case FunctionalKind::AResidualNormSq: return "A_residual_normsq";
    case FunctionalKind::ErrorNormSq: return "error_normsq";
    case FunctionalKind::AEllResidualNormSq: return "A_ell_residual_normsq:" + std::to_string(ell);
    case FunctionalKind::SpectralCoeff: return "spectral_coeff:" + std::to_string(ell);
  }
  return {};
}

bool is_known_diagnostic(std::string_view name) {
  static constexpr std::string_view plain[] = {"theorem1",     "decrement",       "v1_cosine",
                                               "error_normsq", "residual_normsq", "hdot1",
                                               "hdot2"};
  for (auto p : plain)
    if (name == p) return true;
  if (const auto idx = split_indexed(name)) {
    return idx->first == "theorem2" || idx->first == "spectral_coeff";
  }
  return false;
}

namespace {

struct ProbeData {
  MatrixXd A;
  VectorXd b;
  std::optional<VectorXd> x_true;
  std::optional<SvdResult<double>> svd;
  double frob = 0;
};

const VectorXd& need_solution(const ProbeData& d, std::string_view name) {
  if (!d.x_true) {
    throw InvalidProblemError("diagnostic '" + std::string(name) + "' needs the exact solution");
  }
  return *d.x_true;
}

}  // namespace

Probe make_probe(std::string_view name, const ProblemInstance& p) {
  if (!is_known_diagnostic(name)) {
    throw ConfigError("diagnostics", "unknown diagnostic '" + std::string(name) + "'");
  }
  auto data = std::make_shared<ProbeData>();
  data->A = p.A;
  data->b = p.b;
  data->x_true = p.x_true;
  data->frob = frobenius_norm_sq(p.A);
  auto with_svd = [&] {
    data->svd = p.svd ? *p.svd : svd(p.A);
  };
  const std::string label(name);

  if (name == "theorem1") {
    auto gains = std::make_shared<RowGains<double>>(row_gains(p.A, 1));
    return {{"lhs_exact", "rhs_thm1", "identity_residual", "decrement"},
            [data, gains](const StepState& s, std::span<double> out) {
              const auto rep = theorem1_report(data->A, data->b, s.x, *gains);
              out[0] = rep.lhs_exact;
              out[1] = rep.rhs_bound;
              out[2] = rep.identity_residual;
              out[3] = rep.decrement;
            }};
  }
  if (name == "decrement") {
    // alpha/F ||Ax-b||^2 - 2/F ||A^T (Ax-b)||^2, the one-step drift predicted by the bound.
    const double a = alpha(p.A);
    return {{"decrement"}, [data, a](const StepState& s, std::span<double> out) {
              const double r2 = s.residual.squaredNorm();
              const double up = transpose_matvec(data->A, s.residual).squaredNorm();
              out[0] = a / data->frob * r2 - 2.0 / data->frob * up;
            }};
  }
  if (name == "residual_normsq") {
    return {{"residual_normsq"},
            [](const StepState& s, std::span<double> out) { out[0] = s.residual.squaredNorm(); }};
  }
  if (name == "error_normsq") {
    need_solution(*data, name);
    return {{"error_normsq"}, [data](const StepState& s, std::span<double> out) {
              out[0] = (s.x - *data->x_true).squaredNorm();
            }};
  }
  if (name == "v1_cosine") {
    need_solution(*data, name);
    with_svd();
    return {{"v1_cosine"}, [data](const StepState& s, std::span<double> out) {
              const VectorXd err = s.x - *data->x_true;
              const double norm = err.norm();
              out[0] = norm > 0.0 ? err.dot(data->svd->right.col(0)) / norm : 0.0;
            }};
  }
  if (name == "hdot1" || name == "hdot2") {
    need_solution(*data, name);
    if (!is_symmetric(p.A, kSymmetryRelTol)) {
      throw SymmetryError("diagnostic '" + label + "' needs a symmetric matrix");
    }
    const int order = name == "hdot1" ? 1 : 2;
    return {{label}, [data, order](const StepState& s, std::span<double> out) {
              out[0] = sobolev_seminorm_sq(data->A, s.x - *data->x_true, order);
            }};
  }

  const auto idx = split_indexed(name);
  const int ell = idx->second;
  if (idx->first == "spectral_coeff") {
    need_solution(*data, name);
    with_svd();
    if (ell > data->svd->right.cols()) {
      throw ConfigError("diagnostics", "spectral_coeff index " + std::to_string(ell) + " out of range");
    }
    return {{"spectral_coeff_" + std::to_string(ell)},
            [data, ell](const StepState& s, std::span<double> out) {
              out[0] = (s.x - *data->x_true).dot(data->svd->right.col(ell - 1));
            }};
  }
  // theorem2:<l>
  if (!is_symmetric(p.A, kSymmetryRelTol)) {
    throw SymmetryError("theorem2 requested for a non-symmetric matrix");
  }
  auto gains = std::make_shared<RowGains<double>>(row_gains(p.A, ell));
  const std::string sfx = "_l" + std::to_string(ell);
  return {{"lhs_exact" + sfx, "rhs_thm2" + sfx, "identity_residual" + sfx, "decrement" + sfx},
          [data, gains](const StepState& s, std::span<double> out) {
            const auto rep = theorem2_report(data->A, data->b, s.x, *gains);
            out[0] = rep.lhs_exact;
            out[1] = rep.rhs_bound;
            out[2] = rep.identity_residual;
            out[3] = rep.decrement;
          }};
}

std::vector<Probe> make_probes(const std::vector<std::string>& names, const ProblemInstance& p) {
  std::vector<Probe> probes;
  probes.reserve(names.size());
  for (const auto& n : names) probes.push_back(make_probe(n, p));
  return probes;
}

}  // namespace rkls
