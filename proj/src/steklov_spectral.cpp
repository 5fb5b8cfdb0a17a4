#include "steklov/steklov_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr double kResidualFloor = 1e-13;

}  // namespace

SteklovSpectrum steklov_spectrum(const WeightFunction& a, int m_big) {
  if (m_big < 2) throw Error(ErrorCode::kInvalidGrid, "M_big must be >= 2");
  const OperatorMatrix lambda = assemble_fourier(a, m_big, FourierOperator::kLambdaA);
  const Eigen::MatrixXcd sym = 0.5 * (lambda.entries + lambda.entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenSolverFailure, "Fourier-basis eigensolver failed");
  }
  SteklovSpectrum sp;
  const Eigen::VectorXd& ev = solver.eigenvalues();
  sp.values.assign(ev.data(), ev.data() + ev.size());
  std::sort(sp.values.begin(), sp.values.end());
  sp.trusted = m_big / 2;
  sp.boundary_length = boundary_length(a);
  sp.reference.resize(static_cast<std::size_t>(sp.trusted + 1));
  for (int n = 0; n <= sp.trusted; ++n) sp.reference[n] = disk_eigenvalue(n);
  return sp;
}

double rayleigh_quotient(const WeightFunction& a, int n, double t, int order) {
  const PhiGalerkin galerkin(a, std::max(order, 2 * std::abs(n) + 16));
  return galerkin.rayleigh(n, t);
}

AsymptoticResiduals asymptotic_residuals(const SteklovSpectrum& sp) {
  AsymptoticResiduals out;
  const double scale = sp.scale();
  std::vector<double> log_n, log_d, lin_n;
  for (int n = 0; n <= sp.trusted && n < static_cast<int>(sp.values.size()); ++n) {
    const double delta = sp.values[n] - scale * disk_eigenvalue(n);
    out.residuals.push_back(delta);
    out.max_abs = std::max(out.max_abs, std::abs(delta));
    if (n >= 1 && std::abs(delta) > kResidualFloor) {
      log_n.push_back(std::log(static_cast<double>(n)));
      lin_n.push_back(static_cast<double>(n));
      log_d.push_back(std::log(std::abs(delta)));
    }
  }
  auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double k = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double den = k * sxx - sx * sx;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                      : (k * sxy - sx * sy) / den;
  };
  out.log_slope = slope(log_n, log_d);
  out.linear_slope = slope(lin_n, log_d);
  return out;
}

ClassicalInequalityReport classical_inequality_report(const SteklovSpectrum& sp) {
  if (sp.trusted < 10) {
    throw Error(ErrorCode::kInvalidGrid, "classical inequalities need >= 10 trusted eigenvalues");
  }
  ClassicalInequalityReport r;
  const double length = sp.boundary_length;
  r.weinstock_margin = kTwoPi / length - sp.values[1];

  r.hps_min_margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= sp.trusted; ++k) {
    const double margin = kTwoPi * k / length - sp.values[k];
    if (margin < r.hps_min_margin) {
      r.hps_min_margin = margin;
      r.hps_worst_k = k;
    }
  }

  r.product_min_margin = std::numeric_limits<double>::infinity();
  const double base = (kPi / length) * (kPi / length);
  for (int k = 1; k <= sp.trusted; ++k) {
    for (int l = k; k + l <= sp.trusted; ++l) {
      const int m = ((k + l) % 2 == 0) ? k + l : k + l - 1;
      const double margin = base * m * m - sp.values[k] * sp.values[l];
      if (margin < r.product_min_margin) {
        r.product_min_margin = margin;
        r.product_worst_k = k;
        r.product_worst_l = l;
      }
    }
  }
  return r;
}

}  // namespace steklov
