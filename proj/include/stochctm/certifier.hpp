#pragma once

// Drift-based stability certificate: for a fixed symmetric A, search offsets
// b^(i) such that every (mode, vertex) row of
//
//   A (C G + D H) + sum_j nu_ij (b^(j) - b^(i)) <= -1
//
// holds, where (G, H) is the vector field evaluated at a vertex of M1(u).

#include <cstddef>
#include <string>
#include <vector>

#include "stochctm/highway.hpp"
#include "stochctm/invariant_set.hpp"

namespace stochctm {

using Matrix = std::vector<std::vector<double>>;

enum class AKind { uniform, position_weighted, hotspot };

const char* to_string(AKind kind);
AKind parse_a_kind(const std::string& name);

Matrix matrix_C(const HighwaySpec& spec);
Matrix matrix_D(const HighwaySpec& spec);

// Every violated structural condition on A: symmetry, a_kh >= rho_{k+1} a_{k+1,h},
// a_KK > 0 and the normalization a_Kh >= 1.
std::vector<std::string> check_A(const HighwaySpec& spec, const Matrix& A);

// Throws ArgumentError for gamma < 1 and ModelError when the construction
// breaks the conditions of check_A for this highway.
Matrix build_A(const HighwaySpec& spec, AKind kind, double gamma = 1.0);

// A (C G + D H), without the offset term.
std::vector<double> direct_drift(const HighwaySpec& spec, const Matrix& A,
                                 const std::vector<double>& queue_rate,
                                 const std::vector<double>& density_rate);

// Linear form of A (C G + D H) in (v, r, f) with G = v - r and
// H_k = rho_{k-1} f_{k-1} + r_k - f_k. Row h of each block multiplies the
// corresponding vector.
struct DriftCoefficients {
  Matrix inflow;
  Matrix ramp_flow;
  Matrix cell_flow;
};
DriftCoefficients drift_coefficients(const HighwaySpec& spec, const Matrix& A);

std::vector<double> offset_drift(const MarkovCapacityModel& model, const Matrix& b,
                                 std::size_t mode);

std::vector<double> drift_row(const HighwaySpec& spec, const MarkovCapacityModel& model,
                              const Matrix& A, const Matrix& b, const ControlConfig& config,
                              std::size_t mode, const Vertex& vertex);

enum class Verdict { stable_certified, no_certificate };
const char* to_string(Verdict verdict);

struct DriftCertificate {
  Verdict verdict = Verdict::no_certificate;
  Matrix A;
  Matrix b;                    // b[mode][h]
  std::vector<double> slacks;  // row value + 1, ordered (mode, vertex, h)
  double max_slack = 0.0;
  std::size_t vertex_count = 0;
  std::vector<std::string> warnings;
};

struct CertifyOptions {
  double offset_bound = 1e6;
  double slack_tolerance = 1e-6;
};

// Throws ScenarioError when the configuration breaks the no-queue assumption
// for unmetered ramps.
DriftCertificate certify(const HighwaySpec& spec, const MarkovCapacityModel& model,
                         const ControlConfig& config, const Matrix& A,
                         const CertifyOptions& options = {});

struct NecessaryCheck {
  bool passes = true;
  std::string witness;
};

NecessaryCheck necessary_check(const HighwaySpec& spec, const MarkovCapacityModel& model,
                               const ControlConfig& config);

struct RefineResult {
  DriftCertificate certificate;
  std::vector<double> max_slack_history;  // one entry per half step, starting with A0
  std::size_t steps = 0;
};

RefineResult refine_A_alternating(const HighwaySpec& spec, const MarkovCapacityModel& model,
                                  const ControlConfig& config, const Matrix& A0,
                                  std::size_t max_iters, const CertifyOptions& options = {});

}  // namespace stochctm
