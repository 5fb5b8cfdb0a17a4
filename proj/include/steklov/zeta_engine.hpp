#pragma once

// Riemann zeta, the entire difference psi(s) = zeta_a(-s) - 2 zeta_R(-s)
// computed as a regularized trace, and the growth estimates built on it.

#include <string>
#include <vector>

#include "steklov/circle_fourier.hpp"
#include "steklov/dtn_operators.hpp"
#include "steklov/steklov_spectral.hpp"

namespace steklov {

/// Riemann zeta on the real line, x != 1. Relative accuracy ~1e-13.
double riemann_zeta(double x);

enum class TraceEstimator { kPhiTrace, kEigenPairing };

std::string to_string(TraceEstimator e);

/// Largest s accepted by the trace estimators.
inline constexpr double kMaxTracePower = 6.0;

struct TraceValue {
  double value = 0.0;
  /// |psi at M_big - psi at M_big/2|.
  double convergence_gap = 0.0;
};

/// Evaluates psi(s) = Tr[Lambda_a^s - |D_a|^s] for a normalized weight at a
/// fixed Galerkin order. Holds the phi-basis data at M_big and M_big/2 and
/// Fourier-basis spectra at 2 M_big and M_big so that many powers can be
/// evaluated cheaply.
class TraceEvaluator {
 public:
  TraceEvaluator(const WeightFunction& a, int m_big);

  int m_big() const { return m_big_; }
  int trusted() const { return m_big_ / 2; }
  const PhiGalerkin& galerkin() const { return fine_; }
  const SteklovSpectrum& spectrum() const { return spectrum_; }

  /// Per-mode terms (Lambda_a^s phi_n, phi_n) - |n|^s for |n| <= trusted,
  /// indexed n + trusted.
  std::vector<double> mode_terms(double s) const;

  double phi_trace(double s) const;
  double eigen_pairing(double s) const;

  /// psi(s) with the convergence gap against the half-size assembly.
  /// Throws kEstimatorDivergence when the gap exceeds 1e-4 (1 + |psi|) or,
  /// for the phi trace, when the per-mode terms have not decayed below
  /// 1e-10 (1 + |psi|) near the edge of the trusted window.
  TraceValue trace(double s, TraceEstimator estimator) const;

 private:
  int m_big_;
  PhiGalerkin fine_;
  PhiGalerkin coarse_;
  SteklovSpectrum spectrum_;
  // Order 2 M_big, so that the pairing window sits at a quarter of the
  // basis; the M_big spectrum over M_big/4 modes is the coarse comparison.
  SteklovSpectrum wide_spectrum_;
};

/// psi(s) for a normalized weight.
TraceValue trace_R(const WeightFunction& a, double s, int m_big,
                   TraceEstimator estimator);

/// zeta_a(x) for x > 1 (eigenvalue sum plus asymptotic tail) or x <= 0
/// (regularized trace of the normalized weight and the scaling law).
double zeta_a(const WeightFunction& a, double x, int m_big);

struct ZetaCurve {
  std::vector<double> s_grid;
  std::vector<double> psi_phi;
  /// NaN where the eigenvalue pairing did not converge (its terms carry
  /// the Fourier-basis eigenvalue error times n^s).
  std::vector<double> psi_pair;
  std::vector<double> convergence_gap;
  int m_big = 0;
  int trusted = 0;

  bool nonneg_on_s_ge_1 = true;
  bool monotone = true;
  bool estimators_agree = true;
  double min_psi_s_ge_1 = 0.0;
  double max_monotonicity_violation = 0.0;
  double max_estimator_disagreement = 0.0;
  int pair_divergences = 0;
};

/// Both estimators on a sorted grid in [0, 6]. Flags use slack 1e-9 for
/// sign and monotonicity and 1e-6 (1 + |psi|) for estimator agreement,
/// the latter over the points where the pairing converged. Divergence of
/// the phi trace is an error.
ZetaCurve psi_curve(const WeightFunction& a, const std::vector<double>& s_grid,
                    int m_big);
ZetaCurve psi_curve(const TraceEvaluator& eval, const std::vector<double>& s_grid);

struct SandwichTriple {
  double lower = 0.0;   // psi(t)
  double middle = 0.0;  // Tr[|D_a|^{s-t}(Lambda_a^t - |D_a|^t)]
  double upper = 0.0;   // psi(s)

  bool ordered(double relative_slack = 1e-8) const {
    const double slack = relative_slack * (1.0 + std::abs(middle));
    return upper >= middle - slack && middle >= lower - slack;
  }
};

SandwichTriple sandwich_check(const WeightFunction& a, double t, double s, int m_big);
SandwichTriple sandwich_check(const TraceEvaluator& eval, double t, double s);

/// (Lambda_a phi_1, phi_1) - 1 for a normalized weight.
double conformal_defect(const WeightFunction& a, int order = kDefaultPhiOrder);
inline constexpr double kConformalTrivialTolerance = 1e-8;

struct GrowthCertificate {
  int witness = 0;       // n0 >= 2
  double defect = 0.0;   // (Lambda_a phi_n0, phi_n0) - n0
  double alpha = 0.0;    // ln n0
  std::vector<double> t_grid;
  std::vector<double> c_t;  // (Lambda_a^t phi_n0, phi_n0) - n0^t
  /// min over t of C_t - n0^{t-1} defect.
  double min_exponential_margin = 0.0;
  /// min over t <= s of psi(s) - psi(t) - C_t (n0^{s-t} - 1).
  double min_increment_margin = 0.0;

  bool verified(double exp_tol = 1e-9, double inc_tol = 1e-8) const {
    return defect > 0.0 && min_exponential_margin >= -exp_tol &&
           min_increment_margin >= -inc_tol;
  }
};

/// Witness threshold for the Rayleigh scan.
inline constexpr double kWitnessThreshold = 1e-6;

GrowthCertificate growth_certificate(const WeightFunction& a,
                                     const std::vector<double>& t_grid, int m_big);
GrowthCertificate growth_certificate(const TraceEvaluator& eval,
                                     const std::vector<double>& t_grid);

}  // namespace steklov
