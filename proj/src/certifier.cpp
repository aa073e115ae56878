#include "stochctm/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stochctm/errors.hpp"
#include "stochctm/lp.hpp"

namespace stochctm {

namespace {

struct DriftPoint {
  std::size_t mode;
  std::vector<double> x;  // C G + D H
};

std::vector<double> multiply(const Matrix& M, const std::vector<double>& x) {
  std::vector<double> out(M.size(), 0.0);
  for (std::size_t r = 0; r < M.size(); ++r) {
    for (std::size_t c = 0; c < x.size(); ++c) out[r] += M[r][c] * x[c];
  }
  return out;
}

Matrix multiply(const Matrix& A, const Matrix& B) {
  const std::size_t n = A.size();
  const std::size_t m = B.empty() ? 0 : B[0].size();
  Matrix out(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < B.size(); ++k) {
      for (std::size_t j = 0; j < m; ++j) out[i][j] += A[i][k] * B[k][j];
    }
  }
  return out;
}

std::vector<double> combined_state_rate(const HighwaySpec& spec, const std::vector<double>& G,
                                        const std::vector<double>& H) {
  std::vector<double> x = multiply(matrix_C(spec), G);
  const std::vector<double> dh = multiply(matrix_D(spec), H);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += dh[k];
  return x;
}

std::vector<DriftPoint> drift_points(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                     const ControlConfig& config, const VertexSet& vertices) {
  std::vector<DriftPoint> points;
  for (std::size_t i = 0; i < model.mode_count(); ++i) {
    for (const Vertex& v : vertices.vertices) {
      const FlowSnapshot flows =
          merge_flows(spec, model.capacity[i], config, v.backlogged, v.density);
      const VectorField field = vector_field(spec, config, flows);
      points.push_back({i, combined_state_rate(spec, field.queue_rate, field.density_rate)});
    }
  }
  return points;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Offsets minimizing the largest slack of component h for fixed A. Mode 0 is
// pinned at zero since a common shift of all offsets cancels.
struct OffsetFit {
  std::vector<double> b;  // per mode
  double max_slack;
};

OffsetFit fit_offsets(const MarkovCapacityModel& model, const Matrix& A,
                      const std::vector<DriftPoint>& points, std::size_t h, double bound) {
  const std::size_t n = model.mode_count();
  LinearProgram lp;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      lp.add_variable(0.0, 0.0, 0.0);
    } else {
      lp.add_variable(0.0, -bound, bound);
    }
  }
  const std::size_t t = lp.add_variable(-1.0, -kInfinity, kInfinity);
  for (const DriftPoint& p : points) {
    std::vector<double> row(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == p.mode) continue;
      row[j] += model.rates[p.mode][j];
      row[p.mode] -= model.rates[p.mode][j];
    }
    row[t] = -1.0;
    lp.add_row(std::move(row), -1.0 - dot(A[h], p.x));
  }
  const LpResult res = solve(lp);
  if (res.status != LpStatus::optimal) {
    throw NumericalError(std::string("offset LP ended ") + to_string(res.status));
  }
  OffsetFit fit;
  fit.b.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(n));
  fit.max_slack = res.x[t];
  return fit;
}

DriftCertificate assemble(const MarkovCapacityModel& model, const Matrix& A, const Matrix& b,
                          const std::vector<DriftPoint>& points, std::size_t vertex_count,
                          double tolerance) {
  DriftCertificate cert;
  cert.A = A;
  cert.b = b;
  cert.vertex_count = vertex_count;
  cert.max_slack = -kInfinity;
  for (const DriftPoint& p : points) {
    const std::vector<double> offset = offset_drift(model, b, p.mode);
    for (std::size_t h = 0; h < A.size(); ++h) {
      const double slack = dot(A[h], p.x) + offset[h] + 1.0;
      cert.slacks.push_back(slack);
      cert.max_slack = std::max(cert.max_slack, slack);
    }
  }
  cert.verdict = cert.max_slack <= tolerance ? Verdict::stable_certified : Verdict::no_certificate;
  return cert;
}

DriftCertificate certify_points(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                const Matrix& A, const std::vector<DriftPoint>& points,
                                std::size_t vertex_count, const CertifyOptions& options) {
  const std::size_t K = spec.size();
  const std::size_t n = model.mode_count();
  if (points.empty()) {
    DriftCertificate cert = assemble(model, A, Matrix(n, std::vector<double>(K, 0.0)), points,
                                     vertex_count, options.slack_tolerance);
    cert.verdict = Verdict::stable_certified;
    return cert;
  }
  double bound = options.offset_bound;
  std::vector<std::string> warnings;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Matrix b(n, std::vector<double>(K, 0.0));
    bool at_boundary = false;
    for (std::size_t h = 0; h < K; ++h) {
      const OffsetFit fit = fit_offsets(model, A, points, h, bound);
      for (std::size_t i = 0; i < n; ++i) {
        b[i][h] = fit.b[i];
        at_boundary = at_boundary || std::abs(fit.b[i]) >= bound * (1.0 - 1e-9);
      }
    }
    DriftCertificate cert = assemble(model, A, b, points, vertex_count, options.slack_tolerance);
    if (!at_boundary || attempt == 1) {
      cert.warnings = warnings;
      if (at_boundary) {
        std::ostringstream os;
        os << "offsets still at the box boundary " << bound;
        cert.warnings.push_back(os.str());
      }
      return cert;
    }
    std::ostringstream os;
    os << "offsets reached the box boundary " << bound << "; retried with " << 10.0 * bound;
    warnings.push_back(os.str());
    bound *= 10.0;
  }
  throw NumericalError("certify: unreachable");
}

}  // namespace

const char* to_string(AKind kind) {
  switch (kind) {
    case AKind::uniform: return "uniform";
    case AKind::position_weighted: return "position_weighted";
    case AKind::hotspot: return "hotspot";
  }
  return "?";
}

AKind parse_a_kind(const std::string& name) {
  if (name == "uniform") return AKind::uniform;
  if (name == "position_weighted" || name == "weighted") return AKind::position_weighted;
  if (name == "hotspot") return AKind::hotspot;
  throw ArgumentError("unknown A construction '" + name + "'");
}

const char* to_string(Verdict verdict) {
  return verdict == Verdict::stable_certified ? "stable_certified" : "no_certificate";
}

Matrix matrix_C(const HighwaySpec& spec) {
  const std::size_t K = spec.size();
  Matrix C(K, std::vector<double>(K, 0.0));
  if (K == 1) {
    C[0][0] = 1.0;
    return C;
  }
  C[0][0] = spec.mainline_ratio[0];
  for (std::size_t k = 0; k + 1 < K; ++k) C[k][k + 1] = 1.0;
  C[K - 1][K - 1] = 1.0;
  return C;
}

Matrix matrix_D(const HighwaySpec& spec) {
  const std::size_t K = spec.size();
  Matrix D(K, std::vector<double>(K, 0.0));
  for (std::size_t k = 0; k + 1 < K; ++k) D[k][k] = spec.mainline_ratio[k];
  D[K - 1][K - 1] = 1.0;
  return D;
}

std::vector<std::string> check_A(const HighwaySpec& spec, const Matrix& A) {
  const std::size_t K = spec.size();
  std::vector<std::string> issues;
  if (A.size() != K) {
    issues.emplace_back("A must be K x K");
    return issues;
  }
  for (const auto& row : A) {
    if (row.size() != K) {
      issues.emplace_back("A must be K x K");
      return issues;
    }
  }
  const double tol = 1e-12;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t h = 0; h < K; ++h) {
      std::ostringstream os;
      if (A[k][h] != A[h][k]) {
        os << "A not symmetric at (" << k << ", " << h << ")";
        issues.push_back(os.str());
      } else if (k + 1 < K) {
        const double rho = spec.mainline_ratio[k + 1];
        if (A[k][h] < rho * A[k + 1][h] - tol) {
          os << "a[" << k << "][" << h << "] = " << A[k][h] << " < rho * a[" << k + 1 << "]["
             << h << "] = " << rho * A[k + 1][h];
          issues.push_back(os.str());
        }
      }
    }
  }
  if (!(A[K - 1][K - 1] > 0.0)) issues.emplace_back("a[K-1][K-1] must be positive");
  for (std::size_t h = 0; h < K; ++h) {
    if (A[K - 1][h] < 1.0 - tol) {
      std::ostringstream os;
      os << "normalization a[K-1][" << h << "] = " << A[K - 1][h] << " < 1";
      issues.push_back(os.str());
    }
  }
  return issues;
}

Matrix build_A(const HighwaySpec& spec, AKind kind, double gamma) {
  if (!(gamma >= 1.0)) throw ArgumentError("build_A: gamma must be >= 1");
  const std::size_t K = spec.size();
  Matrix A(K, std::vector<double>(K, 0.0));
  std::vector<double> weight(K, 1.0);
  if (kind == AKind::hotspot) {
    for (std::size_t k = 0; k + 1 < K; ++k) weight[k] = cumulative_ratio(spec, k + 1, K - 1);
  }
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t h = 0; h < K; ++h) {
      switch (kind) {
        case AKind::uniform: A[k][h] = gamma; break;
        case AKind::position_weighted:
          A[k][h] = gamma * static_cast<double>((K - k) * (K - h));
          break;
        case AKind::hotspot: A[k][h] = weight[k] * weight[h]; break;
      }
    }
  }
  const auto issues = check_A(spec, A);
  if (!issues.empty()) {
    throw ModelError(std::string(to_string(kind)) + " construction rejected: " + issues.front());
  }
  return A;
}

std::vector<double> direct_drift(const HighwaySpec& spec, const Matrix& A,
                                 const std::vector<double>& queue_rate,
                                 const std::vector<double>& density_rate) {
  return multiply(A, combined_state_rate(spec, queue_rate, density_rate));
}

DriftCoefficients drift_coefficients(const HighwaySpec& spec, const Matrix& A) {
  const std::size_t K = spec.size();
  const Matrix C = matrix_C(spec);
  const Matrix D = matrix_D(spec);
  // H = P f + r - f with (P f)_k = rho_{k-1} f_{k-1}.
  Matrix P_minus_I(K, std::vector<double>(K, 0.0));
  Matrix D_minus_C(K, std::vector<double>(K, 0.0));
  for (std::size_t k = 0; k < K; ++k) {
    P_minus_I[k][k] = -1.0;
    if (k > 0) P_minus_I[k][k - 1] = spec.mainline_ratio[k - 1];
    for (std::size_t j = 0; j < K; ++j) D_minus_C[k][j] = D[k][j] - C[k][j];
  }
  DriftCoefficients out;
  out.inflow = multiply(A, C);
  out.ramp_flow = multiply(A, D_minus_C);
  out.cell_flow = multiply(A, multiply(D, P_minus_I));
  return out;
}

std::vector<double> offset_drift(const MarkovCapacityModel& model, const Matrix& b,
                                 std::size_t mode) {
  std::vector<double> out(b[mode].size(), 0.0);
  for (std::size_t j = 0; j < model.mode_count(); ++j) {
    if (j == mode) continue;
    for (std::size_t h = 0; h < out.size(); ++h) {
      out[h] += model.rates[mode][j] * (b[j][h] - b[mode][h]);
    }
  }
  return out;
}

std::vector<double> drift_row(const HighwaySpec& spec, const MarkovCapacityModel& model,
                              const Matrix& A, const Matrix& b, const ControlConfig& config,
                              std::size_t mode, const Vertex& vertex) {
  const FlowSnapshot flows =
      merge_flows(spec, model.capacity[mode], config, vertex.backlogged, vertex.density);
  const VectorField field = vector_field(spec, config, flows);
  std::vector<double> row = direct_drift(spec, A, field.queue_rate, field.density_rate);
  const std::vector<double> offset = offset_drift(model, b, mode);
  for (std::size_t h = 0; h < row.size(); ++h) row[h] += offset[h];
  return row;
}

DriftCertificate certify(const HighwaySpec& spec, const MarkovCapacityModel& model,
                         const ControlConfig& config, const Matrix& A,
                         const CertifyOptions& options) {
  const auto issues = check_A(spec, A);
  if (!issues.empty()) throw ArgumentError("certify: invalid A: " + issues.front());
  const InvariantBounds bounds = compute_bounds(spec, model, config);
  const VertexSet vertices = vertex_set(bounds);
  // A proven necessary-condition failure overrides any certificate: the
  // printed density bounds ignore spillback and can otherwise certify
  // overloaded unmetered configurations vacuously.
  const NecessaryCheck screen = necessary_check(spec, model, config);
  if (!screen.passes) {
    DriftCertificate cert;
    cert.A = A;
    cert.b.assign(model.mode_count(), std::vector<double>(spec.size(), 0.0));
    cert.vertex_count = vertices.size();
    cert.max_slack = kInfinity;
    cert.warnings.push_back("necessary condition violated: " + screen.witness);
    return cert;
  }
  const auto points = drift_points(spec, model, config, vertices);
  return certify_points(spec, model, A, points, vertices.size(), options);
}

NecessaryCheck necessary_check(const HighwaySpec& spec, const MarkovCapacityModel& model,
                               const ControlConfig& config) {
  const std::size_t K = spec.size();
  NecessaryCheck out;
  for (std::size_t k = 0; k < K; ++k) {
    if (config.inflow[k] > spec.buffer_capacity[k]) {
      std::ostringstream os;
      os << "buffer capacity: v" << k + 1 << " = " << config.inflow[k] << " > R" << k + 1
         << " = " << spec.buffer_capacity[k];
      out.passes = false;
      out.witness = os.str();
      return out;
    }
  }
  if (is_stationary_hotspot(spec)) {
    const std::vector<double> p = model.steady.empty() ? steady_state(model) : model.steady;
    double arriving = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      arriving += cumulative_ratio(spec, k, K - 1) * config.inflow[k];
    }
    double mean_capacity = 0.0;
    for (std::size_t i = 0; i < model.mode_count(); ++i) {
      mean_capacity += p[i] * model.capacity[i][K - 1];
    }
    if (arriving > mean_capacity * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "hotspot mean-capacity: " << arriving << " > " << mean_capacity;
      out.passes = false;
      out.witness = os.str();
    }
  }
  return out;
}

RefineResult refine_A_alternating(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                  const ControlConfig& config, const Matrix& A0,
                                  std::size_t max_iters, const CertifyOptions& options) {
  const auto issues = check_A(spec, A0);
  if (!issues.empty()) throw ArgumentError("refine_A_alternating: invalid A0: " + issues.front());
  const std::size_t K = spec.size();
  const InvariantBounds bounds = compute_bounds(spec, model, config);
  const VertexSet vertices = vertex_set(bounds);
  const auto points = drift_points(spec, model, config, vertices);

  const NecessaryCheck screen = necessary_check(spec, model, config);
  auto screened = [&](DriftCertificate cert) {
    if (!screen.passes) {
      cert.verdict = Verdict::no_certificate;
      cert.warnings.push_back("necessary condition violated: " + screen.witness);
    }
    return cert;
  };

  RefineResult out;
  out.certificate = screened(certify_points(spec, model, A0, points, vertices.size(), options));
  out.max_slack_history.push_back(out.certificate.max_slack);
  if (out.certificate.verdict == Verdict::stable_certified || points.empty()) return out;

  double a_bound = 1e3;
  for (const auto& row : A0) {
    for (double a : row) a_bound = std::max(a_bound, 10.0 * std::abs(a));
  }

  // Upper-triangle parametrization of the symmetric A.
  std::vector<std::vector<std::size_t>> index(K, std::vector<std::size_t>(K));
  std::size_t count = 0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t h = k; h < K; ++h) index[k][h] = index[h][k] = count++;
  }

  Matrix A = A0;
  Matrix b = out.certificate.b;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    ++out.steps;
    LinearProgram lp;
    for (std::size_t e = 0; e < count; ++e) lp.add_variable(0.0, -a_bound, a_bound);
    const std::size_t t = lp.add_variable(-1.0, -kInfinity, kInfinity);
    for (const DriftPoint& p : points) {
      const std::vector<double> offset = offset_drift(model, b, p.mode);
      for (std::size_t h = 0; h < K; ++h) {
        std::vector<double> row(count + 1, 0.0);
        for (std::size_t k = 0; k < K; ++k) row[index[h][k]] += p.x[k];
        row[t] = -1.0;
        lp.add_row(std::move(row), -1.0 - offset[h]);
      }
    }
    for (std::size_t k = 0; k + 1 < K; ++k) {
      for (std::size_t h = 0; h < K; ++h) {
        std::vector<double> row(count + 1, 0.0);
        row[index[k][h]] -= 1.0;
        row[index[k + 1][h]] += spec.mainline_ratio[k + 1];
        lp.add_row(std::move(row), 0.0);
      }
    }
    for (std::size_t h = 0; h < K; ++h) {
      std::vector<double> row(count + 1, 0.0);
      row[index[K - 1][h]] = -1.0;
      lp.add_row(std::move(row), -1.0);
    }
    const LpResult res = solve(lp);
    if (res.status != LpStatus::optimal) {
      throw NumericalError(std::string("A-step LP ended ") + to_string(res.status));
    }
    Matrix next(K, std::vector<double>(K));
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t h = 0; h < K; ++h) next[k][h] = res.x[index[k][h]];
    }
    const double previous = out.max_slack_history.back();
    const DriftCertificate after_a = assemble(model, next, b, points, vertices.size(),
                                              options.slack_tolerance);
    // The LP optimum can only match or beat the incumbent; keep A on ties.
    if (after_a.max_slack < previous - 1e-9) A = next;
    out.max_slack_history.push_back(std::min(previous, after_a.max_slack));

    DriftCertificate after_b = certify_points(spec, model, A, points, vertices.size(), options);
    if (after_b.max_slack > out.max_slack_history.back()) {
      after_b = assemble(model, A, b, points, vertices.size(), options.slack_tolerance);
    }
    b = after_b.b;
    out.max_slack_history.push_back(after_b.max_slack);
    out.certificate = screened(after_b);
    if (out.certificate.verdict == Verdict::stable_certified) break;
    if (after_b.max_slack > previous - 1e-9) break;
  }
  return out;
}

}  // namespace stochctm
