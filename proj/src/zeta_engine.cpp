#include "steklov/zeta_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

// B_2, B_4, ..., B_30.
constexpr std::array<double, 15> kBernoulli = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

constexpr int kEulerMaclaurinTerms = 20;

/// sin(pi y), exactly zero at integers.
double sin_pi(double y) {
  double r = std::fmod(y, 2.0);
  if (r > 1.0) r -= 2.0;
  if (r < -1.0) r += 2.0;
  if (r == std::floor(r)) return 0.0;
  if (r > 0.5) r = 1.0 - r;
  if (r < -0.5) r = -1.0 - r;
  return std::sin(kPi * r);
}

double zeta_euler_maclaurin(double x) {
  const double n = kEulerMaclaurinTerms;
  double sum = 0.0;
  for (int k = kEulerMaclaurinTerms - 1; k >= 1; --k) sum += std::pow(k, -x);
  sum += std::pow(n, 1.0 - x) / (x - 1.0) + 0.5 * std::pow(n, -x);
  // Correction terms B_2k/(2k)! x(x+1)...(x+2k-2) N^{-x-2k+1}.
  double rising = x;  // x(x+1)...(x+2k-2)
  double factorial = 2.0;
  double power = std::pow(n, -x - 1.0);
  for (std::size_t k = 1; k <= kBernoulli.size(); ++k) {
    sum += kBernoulli[k - 1] / factorial * rising * power;
    const double two_k = 2.0 * static_cast<double>(k);
    rising *= (x + two_k - 1.0) * (x + two_k);
    factorial *= (two_k + 1.0) * (two_k + 2.0);
    power /= n * n;
  }
  return sum;
}

/// Neumaier-compensated sum in the given order.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double phi_trace_from(const PhiGalerkin& g, int window, double s) {
  const std::vector<double> terms = g.excess_power(s);
  CompensatedSum sum;
  for (int n = -window; n <= window; ++n) sum.add(terms[static_cast<std::size_t>(n + g.order())]);
  return sum.value();
}

double pairing_from(const SteklovSpectrum& sp, int window, double s) {
  CompensatedSum sum;
  for (int n = 1; n <= window; ++n) {
    const double lam = sp.values[static_cast<std::size_t>(n)];
    const double mu = disk_eigenvalue(n);
    // lam^s - mu^s without cancellation.
    sum.add(std::pow(mu, s) * std::expm1(s * std::log(lam / mu)));
  }
  return sum.value();
}

void check_power(double s) {
  if (!(s >= 0.0) || s > kMaxTracePower) {
    std::ostringstream msg;
    msg << "trace power " << s << " outside [0, " << kMaxTracePower << "]";
    throw Error(ErrorCode::kUnsupportedArgument, msg.str());
  }
}

}  // namespace

double riemann_zeta(double x) {
  if (x == 1.0) throw Error(ErrorCode::kPoleAtOne, "zeta_R has a pole at 1");
  if (x <= -1.0) {
    // zeta(x) = 2^x pi^{x-1} sin(pi x / 2) Gamma(1-x) zeta(1-x).
    const double s = sin_pi(0.5 * x);
    if (s == 0.0) return 0.0;
    return std::pow(2.0, x) * std::pow(kPi, x - 1.0) * s * std::tgamma(1.0 - x) *
           zeta_euler_maclaurin(1.0 - x);
  }
  return zeta_euler_maclaurin(x);
}

std::string to_string(TraceEstimator e) {
  return e == TraceEstimator::kPhiTrace ? "phi_trace" : "eigen_pairing";
}

// ---------------------------------------------------------------------------
// TraceEvaluator

TraceEvaluator::TraceEvaluator(const WeightFunction& a, int m_big)
    : m_big_(m_big),
      fine_(a, m_big),
      coarse_(a, std::max(1, m_big / 2)),
      spectrum_(steklov_spectrum(a, m_big)),
      wide_spectrum_(steklov_spectrum(a, 2 * m_big)) {
  if (m_big < 8) throw Error(ErrorCode::kInvalidGrid, "M_big must be >= 8");
}

std::vector<double> TraceEvaluator::mode_terms(double s) const {
  check_power(s);
  const std::vector<double> all = fine_.excess_power(s);
  const int k = trusted();
  return {all.begin() + (m_big_ - k), all.begin() + (m_big_ + k + 1)};
}

double TraceEvaluator::phi_trace(double s) const {
  check_power(s);
  return phi_trace_from(fine_, trusted(), s);
}

double TraceEvaluator::eigen_pairing(double s) const {
  check_power(s);
  return pairing_from(wide_spectrum_, trusted(), s);
}

TraceValue TraceEvaluator::trace(double s, TraceEstimator estimator) const {
  check_power(s);
  TraceValue out;
  const int coarse_window = std::max(1, m_big_ / 4);
  if (estimator == TraceEstimator::kPhiTrace) {
    out.value = phi_trace(s);
    out.convergence_gap = std::abs(out.value - phi_trace_from(coarse_, coarse_window, s));
    const std::vector<double> terms = mode_terms(s);
    const int k = trusted();
    const int edge = std::max(1, (9 * k) / 10);
    double edge_term = 0.0;
    for (int n = edge; n <= k; ++n) {
      edge_term = std::max({edge_term, std::abs(terms[static_cast<std::size_t>(n + k)]),
                            std::abs(terms[static_cast<std::size_t>(k - n)])});
    }
    // Rounding floor of the extended-precision block solve, amplified by
    // the derivative s k^{s-1} of the power at the window edge.
    const double floor = 32.0 * std::numeric_limits<long double>::epsilon() * m_big_ *
                         std::max(1.0, s * std::pow(static_cast<double>(k), s - 1.0));
    if (edge_term > 1e-10 * (1.0 + std::abs(out.value)) + floor) {
      std::ostringstream msg;
      msg << "per-mode trace terms still " << edge_term << " at |n| ~ " << k
          << " for s = " << s;
      throw Error(ErrorCode::kEstimatorDivergence, msg.str());
    }
  } else {
    out.value = eigen_pairing(s);
    out.convergence_gap =
        std::abs(out.value - pairing_from(spectrum_, coarse_window, s));
  }
  if (out.convergence_gap > 1e-4 * (1.0 + std::abs(out.value))) {
    std::ostringstream msg;
    msg << to_string(estimator) << " convergence gap " << out.convergence_gap
        << " at s = " << s;
    throw Error(ErrorCode::kEstimatorDivergence, msg.str());
  }
  return out;
}

TraceValue trace_R(const WeightFunction& a, double s, int m_big,
                   TraceEstimator estimator) {
  check_power(s);
  return TraceEvaluator(a, m_big).trace(s, estimator);
}

double zeta_a(const WeightFunction& a, double x, int m_big) {
  if (x > 0.0 && x <= 1.0) {
    throw Error(ErrorCode::kUnsupportedArgument,
                "zeta_a is not evaluated on the strip 0 < x <= 1");
  }
  if (x > 1.0) {
    const SteklovSpectrum sp = steklov_spectrum(a, m_big);
    const double scale = sp.scale();
    CompensatedSum head;
    CompensatedSum model;
    for (int n = 1; n <= sp.trusted; ++n) {
      head.add(std::pow(sp.values[static_cast<std::size_t>(n)], -x));
      model.add(std::pow(disk_eigenvalue(n), -x));
    }
    // Tail from lambda_n ~ (2pi/L) lambda^0_n beyond the trusted window.
    return head.value() + std::pow(scale, -x) * (2.0 * riemann_zeta(x) - model.value());
  }
  const double ratio = boundary_length(a) / kTwoPi;
  const WeightFunction normalized = normalize(a);
  const double psi = trace_R(normalized, -x, m_big, TraceEstimator::kPhiTrace).value;
  return std::pow(ratio, x) * (psi + 2.0 * riemann_zeta(x));
}

// ---------------------------------------------------------------------------
// psi curve, sandwich, growth

ZetaCurve psi_curve(const TraceEvaluator& eval, const std::vector<double>& s_grid) {
  if (!std::is_sorted(s_grid.begin(), s_grid.end())) {
    throw Error(ErrorCode::kConfigError, "s grid must be sorted ascending");
  }
  ZetaCurve c;
  c.s_grid = s_grid;
  c.m_big = eval.m_big();
  c.trusted = eval.trusted();
  c.min_psi_s_ge_1 = std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    const TraceValue phi = eval.trace(s, TraceEstimator::kPhiTrace);
    c.psi_phi.push_back(phi.value);
    try {
      const TraceValue pair = eval.trace(s, TraceEstimator::kEigenPairing);
      c.psi_pair.push_back(pair.value);
      c.convergence_gap.push_back(std::max(phi.convergence_gap, pair.convergence_gap));
      const double disagreement = std::abs(phi.value - pair.value) / (1.0 + std::abs(phi.value));
      c.max_estimator_disagreement = std::max(c.max_estimator_disagreement, disagreement);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEstimatorDivergence) throw;
      c.psi_pair.push_back(std::numeric_limits<double>::quiet_NaN());
      c.convergence_gap.push_back(phi.convergence_gap);
      ++c.pair_divergences;
    }
    if (s >= 1.0) c.min_psi_s_ge_1 = std::min(c.min_psi_s_ge_1, phi.value);
  }
  for (std::size_t i = 1; i < c.psi_phi.size(); ++i) {
    if (c.s_grid[i - 1] < 1.0) continue;
    c.max_monotonicity_violation =
        std::max(c.max_monotonicity_violation, c.psi_phi[i - 1] - c.psi_phi[i]);
  }
  if (!std::isfinite(c.min_psi_s_ge_1)) c.min_psi_s_ge_1 = 0.0;
  c.nonneg_on_s_ge_1 = c.min_psi_s_ge_1 >= -1e-9;
  c.monotone = c.max_monotonicity_violation <= 1e-9;
  c.estimators_agree = c.max_estimator_disagreement <= 1e-6;
  return c;
}

ZetaCurve psi_curve(const WeightFunction& a, const std::vector<double>& s_grid,
                    int m_big) {
  return psi_curve(TraceEvaluator(a, m_big), s_grid);
}

SandwichTriple sandwich_check(const TraceEvaluator& eval, double t, double s) {
  if (!(t >= 1.0) || !(s >= t)) {
    throw Error(ErrorCode::kUnsupportedArgument, "sandwich needs 1 <= t <= s");
  }
  SandwichTriple out;
  out.lower = eval.trace(t, TraceEstimator::kPhiTrace).value;
  out.upper = eval.trace(s, TraceEstimator::kPhiTrace).value;
  const std::vector<double> terms = eval.mode_terms(t);
  const int k = eval.trusted();
  CompensatedSum middle;
  for (int n = -k; n <= k; ++n) {
    middle.add(mode_power(n, s - t) * terms[static_cast<std::size_t>(n + k)]);
  }
  out.middle = middle.value();
  return out;
}

SandwichTriple sandwich_check(const WeightFunction& a, double t, double s, int m_big) {
  return sandwich_check(TraceEvaluator(a, m_big), t, s);
}

double conformal_defect(const WeightFunction& a, int order) {
  return PhiGalerkin(a, order).rayleigh(1, 1.0) - 1.0;
}

GrowthCertificate growth_certificate(const TraceEvaluator& eval,
                                     const std::vector<double>& t_grid) {
  const int k = eval.trusted();
  const std::vector<double> first = eval.mode_terms(1.0);
  GrowthCertificate cert;
  for (int n = 2; n <= k; ++n) {
    const double defect = first[static_cast<std::size_t>(n + k)];
    if (defect > kWitnessThreshold) {
      cert.witness = n;
      cert.defect = defect;
      break;
    }
  }
  if (cert.witness == 0) {
    throw Error(ErrorCode::kNoWitness,
                "no mode 2 <= n <= K_trust has a Rayleigh defect above 1e-6");
  }
  const double n0 = cert.witness;
  cert.alpha = std::log(n0);
  cert.t_grid = t_grid;
  cert.min_exponential_margin = std::numeric_limits<double>::infinity();
  cert.min_increment_margin = std::numeric_limits<double>::infinity();
  std::vector<double> psi;
  for (double t : t_grid) {
    if (t < 1.0) throw Error(ErrorCode::kUnsupportedArgument, "growth grid needs t >= 1");
    const double c = eval.mode_terms(t)[static_cast<std::size_t>(cert.witness + k)];
    cert.c_t.push_back(c);
    cert.min_exponential_margin = std::min(
        cert.min_exponential_margin, c - std::pow(n0, t - 1.0) * cert.defect);
    psi.push_back(eval.trace(t, TraceEstimator::kPhiTrace).value);
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
      if (t_grid[j] < t_grid[i]) continue;
      const double bound = cert.c_t[i] * (std::pow(n0, t_grid[j] - t_grid[i]) - 1.0);
      cert.min_increment_margin =
          std::min(cert.min_increment_margin, psi[j] - psi[i] - bound);
    }
  }
  return cert;
}

GrowthCertificate growth_certificate(const WeightFunction& a,
                                     const std::vector<double>& t_grid, int m_big) {
  return growth_certificate(TraceEvaluator(a, m_big), t_grid);
}

}  // namespace steklov
