#pragma once

#include <vector>

#include "steklov/circle_fourier.hpp"
#include "steklov/dtn_operators.hpp"

namespace steklov {

/// Sorted Galerkin eigenvalues of Lambda_a. Only the first `trusted` + 1
/// entries (indices 0..trusted) are reliable.
struct SteklovSpectrum {
  std::vector<double> values;
  int trusted = 0;
  double boundary_length = kTwoPi;
  /// Disk spectrum lambda^0_n = ceil(n/2) for n = 0..trusted.
  std::vector<double> reference;

  double scale() const { return kTwoPi / boundary_length; }
};

/// lambda^0_n = {0, 1, 1, 2, 2, ...}.
inline double disk_eigenvalue(int n) { return static_cast<double>((n + 1) / 2); }

/// Eigenvalues of assemble_fourier(a, m_big, Lambda_a); trusted = m_big / 2.
SteklovSpectrum steklov_spectrum(const WeightFunction& a, int m_big);

/// Default Galerkin order used by rayleigh_quotient.
inline constexpr int kDefaultPhiOrder = 96;

/// (Lambda_a^t phi_n, phi_n) for a normalized weight.
double rayleigh_quotient(const WeightFunction& a, int n, double t,
                         int order = kDefaultPhiOrder);

struct AsymptoticResiduals {
  /// delta_n = lambda_n - (2pi/L) lambda^0_n, n = 0..trusted.
  std::vector<double> residuals;
  /// Least-squares slope of log|delta_n| against log n over entries above
  /// the noise floor; NaN when fewer than two such entries exist.
  double log_slope = 0.0;
  /// Slope of log|delta_n| against n (exponential rate) on the same set.
  double linear_slope = 0.0;
  double max_abs = 0.0;
};

AsymptoticResiduals asymptotic_residuals(const SteklovSpectrum& sp);

struct ClassicalInequalityReport {
  /// 2pi/L - lambda_1.
  double weinstock_margin = 0.0;
  /// min_k (2 pi k / L - lambda_k) over 1 <= k <= trusted.
  double hps_min_margin = 0.0;
  int hps_worst_k = 0;
  /// min over k, l >= 1 with k + l <= trusted of the product bound margin.
  double product_min_margin = 0.0;
  int product_worst_k = 0;
  int product_worst_l = 0;

  bool weinstock_holds(double slack) const { return weinstock_margin >= -slack; }
  bool hps_holds(double slack) const { return hps_min_margin >= -slack; }
  bool product_holds(double slack) const { return product_min_margin >= -slack; }
};

/// Requires at least 10 trusted entries.
ClassicalInequalityReport classical_inequality_report(const SteklovSpectrum& sp);

}  // namespace steklov
