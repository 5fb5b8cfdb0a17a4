#include "steklov/dtn_operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr int kMaxSqrtBandwidth = 8192;
constexpr double kNormalizationTolerance = 1e-10;
constexpr double kPhiTailTolerance = 1e-15;
// Once the tail is below this, a doubling that fails to shrink it by 4x
// means the rounding floor of exp(i n b) has been reached.
constexpr double kPhiPlateauTolerance = 1e-12;
constexpr std::size_t kMaxPhiGrid = std::size_t{1} << 17;
constexpr double kDResidualLimit = 1e-10;

void require_normalized(const WeightFunction& a) {
  const double defect = normalization_defect(a);
  if (defect > kNormalizationTolerance) {
    std::ostringstream msg;
    msg << "weight violates L(a) = 2pi by " << defect;
    throw Error(ErrorCode::kNotNormalized, msg.str());
  }
}

Eigen::MatrixXcd toeplitz(const FourierSeries& f, int order) {
  const Eigen::Index size = 2 * order + 1;
  Eigen::MatrixXcd t(size, size);
  for (int m = -order; m <= order; ++m) {
    for (int n = -order; n <= order; ++n) {
      t(m + order, n + order) = f.coefficient(m - n);
    }
  }
  return t;
}

/// (2M+1) x (2M+2W+1) block of the multiplication operator by s; column j
/// is the Fourier mode j - M - W.
Eigen::MatrixXcd multiplication_band(const FourierSeries& s, int order) {
  const int w = s.order();
  const int cols = 2 * (order + w) + 1;
  Eigen::MatrixXcd band = Eigen::MatrixXcd::Zero(2 * order + 1, cols);
  for (int m = -order; m <= order; ++m) {
    for (int d = -w; d <= w; ++d) {
      const int k = m - d;
      band(m + order, k + order + w) = s.coefficient(d);
    }
  }
  return band;
}

struct PhiGrid {
  std::size_t size = 0;
  std::vector<double> b;       // antiderivative of 1/a on the grid
  std::vector<double> weight;  // a on the grid
};

std::vector<Complex> phi_factor_coefficients(const std::vector<double>& b,
                                             int n, Eigen::FFT<double>& fft) {
  const std::size_t size = b.size();
  std::vector<Complex> values(size);
  for (std::size_t j = 0; j < size; ++j) values[j] = std::polar(1.0, n * b[j]);
  std::vector<Complex> out;
  fft.fwd(out, values);
  const double inv = 1.0 / static_cast<double>(size);
  for (auto& c : out) c *= inv;
  return out;
}

double relative_outer_tail(const std::vector<Complex>& spectrum) {
  const std::size_t size = spectrum.size();
  double peak = 0.0;
  double tail = 0.0;
  for (std::size_t j = 0; j < size; ++j) {
    const std::size_t k = std::min(j, size - j);
    const double v = std::abs(spectrum[j]);
    peak = std::max(peak, v);
    if (k >= size / 4) tail = std::max(tail, v);
  }
  return peak > 0.0 ? tail / peak : 0.0;
}

PhiGrid resolve_phi_grid(const WeightFunction& a, int order) {
  const WeightFunction recip = pointwise_map(a, PointwiseMap::reciprocal());
  const CircleAntiderivative b = antiderivative_mean_one(recip);
  std::size_t size = next_power_of_two(std::max<std::size_t>(
      {static_cast<std::size_t>(2 * (2 * recip.order() + 1)),
       static_cast<std::size_t>(2 * (2 * a.order() + 1)),
       static_cast<std::size_t>(8 * (order + 1)), 64}));
  Eigen::FFT<double> fft;
  auto finish = [&](std::size_t n) {
    PhiGrid grid;
    grid.size = n;
    grid.b = b.on_grid(n);
    const GridSampling w = to_samples(a.series(), n);
    grid.weight.resize(n);
    for (std::size_t j = 0; j < n; ++j) grid.weight[j] = w.values[j].real();
    return grid;
  };
  double previous = std::numeric_limits<double>::infinity();
  while (true) {
    const double tail =
        relative_outer_tail(phi_factor_coefficients(b.on_grid(size), order, fft));
    if (tail <= kPhiTailTolerance || size >= kMaxPhiGrid) return finish(size);
    if (previous <= kPhiPlateauTolerance && tail > 0.25 * previous) return finish(size / 2);
    previous = tail;
    size *= 2;
  }
}

}  // namespace

double mode_power(int n, double s) {
  if (n == 0) return 0.0;
  return std::pow(static_cast<double>(std::abs(n)), s);
}

double OperatorMatrix::hermitian_defect() const {
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff() / scale;
}

OperatorMatrix assemble_fourier(const WeightFunction& a, int order,
                                FourierOperator which) {
  if (order < 0) throw Error(ErrorCode::kInvalidGrid, "negative order");
  OperatorMatrix out;
  out.basis = Basis::kFourier;
  out.order = order;
  out.weight_id = a.meta();

  switch (which) {
    case FourierOperator::kMultA:
      out.entries = toeplitz(a.series(), order);
      return out;
    case FourierOperator::kDsqA: {
      const FourierSeries& f = a.series();
      const FourierSeries df = f.derivative();
      const FourierSeries d2f = df.derivative();
      const FourierSeries a2 = f * f;
      const FourierSeries first = f * df * Complex(2.0);
      const FourierSeries zeroth = f * d2f * Complex(0.5) + df * df * Complex(0.25);
      Eigen::VectorXcd n(2 * order + 1);
      for (int k = -order; k <= order; ++k) n(k + order) = static_cast<double>(k);
      out.entries = toeplitz(a2, order) * n.cwiseProduct(n).asDiagonal() +
                    toeplitz(first, order) * n.asDiagonal() +
                    toeplitz(zeroth, order);
      return out;
    }
    case FourierOperator::kLambdaA:
    case FourierOperator::kDA: {
      const WeightFunction root = pointwise_map(a, PointwiseMap::sqrt());
      if (root.order() > kMaxSqrtBandwidth) {
        std::ostringstream msg;
        msg << "a^{1/2} needs " << root.order() << " modes (limit "
            << kMaxSqrtBandwidth << ")";
        throw Error(ErrorCode::kBandwidthExceeded, msg.str());
      }
      const int w = root.order();
      const Eigen::MatrixXcd band = multiplication_band(root.series(), order);
      Eigen::VectorXd symbol(band.cols());
      for (int k = -(order + w); k <= order + w; ++k) {
        symbol(k + order + w) = which == FourierOperator::kLambdaA
                                    ? std::abs(static_cast<double>(k))
                                    : static_cast<double>(k);
      }
      out.entries = band * symbol.asDiagonal() * band.adjoint();
      return out;
    }
  }
  return out;
}

GridSampling phi_basis_samples(const WeightFunction& a, int n,
                               std::size_t grid_size) {
  require_normalized(a);
  if (!is_power_of_two(grid_size)) {
    throw Error(ErrorCode::kInvalidGrid, "grid size must be a power of two");
  }
  const WeightFunction recip = pointwise_map(a, PointwiseMap::reciprocal());
  const CircleAntiderivative b = antiderivative_mean_one(recip);
  GridSampling out;
  out.values.resize(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    const double theta = GridSampling::node(j, grid_size);
    const double amplitude = 1.0 / std::sqrt(kTwoPi * a(theta));
    out.values[j] = std::polar(amplitude, n * b(theta));
  }
  return out;
}

OperatorMatrix assemble_phi(const WeightFunction& a, int order, double t) {
  const PhiGalerkin galerkin(a, order);
  OperatorMatrix out;
  out.basis = Basis::kPhi;
  out.order = order;
  out.weight_id = a.meta();
  out.entries = galerkin.lambda_matrix();
  if (t == 1.0) return out;
  return matrix_power(out, t);
}

OperatorMatrix matrix_power(const OperatorMatrix& a, double s) {
  const Eigen::MatrixXcd sym = 0.5 * (a.entries + a.entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenSolverFailure, "Hermitian eigensolver failed");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (values.size() > 0 && values(0) < -kNegativeFloor) {
    std::ostringstream msg;
    msg << "eigenvalue " << values(0) << " below the -1e-9 floor";
    throw Error(ErrorCode::kNegativeEigenvalue, msg.str());
  }
  Eigen::VectorXd g(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    g(i) = values(i) > kKernelTolerance ? std::pow(values(i), s) : 0.0;
  }
  OperatorMatrix out = a;
  out.entries = solver.eigenvectors() * g.asDiagonal() *
                solver.eigenvectors().adjoint();
  return out;
}

KernelProjection kernel_projection(const WeightFunction& a, int order,
                                   Basis basis) {
  KernelProjection p;
  p.basis = basis;
  p.vector = Eigen::VectorXcd::Zero(2 * order + 1);
  if (basis == Basis::kPhi) {
    require_normalized(a);
    p.vector(order) = 1.0;
    return p;
  }
  // phi_0 = (2 pi a)^{-1/2}; in the orthonormal basis e^{ik theta}/sqrt(2pi)
  // its coordinates are the coefficients of a^{-1/2}.
  const WeightFunction root = pointwise_map(a, PointwiseMap::power(-0.5));
  for (int k = -order; k <= order; ++k) p.vector(k + order) = root.coefficient(k);
  p.vector.normalize();
  return p;
}

// ---------------------------------------------------------------------------
// PhiGalerkin

PhiGalerkin::PhiGalerkin(const WeightFunction& a, int order)
    : order_(order), weight_id_(a.meta()) {
  if (order < 1) throw Error(ErrorCode::kInvalidGrid, "phi basis order must be >= 1");
  require_normalized(a);
  const PhiGrid grid = resolve_phi_grid(a, order);
  grid_size_ = grid.size;

  const Eigen::Index dim = 2 * order + 1;
  const auto half = static_cast<Eigen::Index>(grid.size / 2);
  // Columns q = 1..half-1 stand for k = -q (neg) and k = +q (pos), scaled
  // by sqrt(q) so that the Gram products carry the |k| symbol.
  Eigen::MatrixXcd neg(dim, half - 1);
  Eigen::MatrixXcd pos(dim, half - 1);
  Eigen::FFT<double> fft;
  for (int m = -order; m <= order; ++m) {
    const std::vector<Complex> c = phi_factor_coefficients(grid.b, m, fft);
    for (Eigen::Index q = 1; q < half; ++q) {
      const double root = std::sqrt(static_cast<double>(q));
      pos(m + order, q - 1) = c[static_cast<std::size_t>(q)] * root;
      neg(m + order, q - 1) = c[grid.size - static_cast<std::size_t>(q)] * root;
    }
  }
  // N_nm = sum_k |k| c_m(k) conj(c_n(k)) = ((C C^H)^T)_nm.
  const Eigen::MatrixXcd gram_neg = (neg * neg.adjoint()).transpose();
  const Eigen::MatrixXcd gram_pos = (pos * pos.adjoint()).transpose();

  correction_.resize(dim, dim);
  for (int n = -order; n <= order; ++n) {
    for (int m = -order; m <= order; ++m) {
      const bool nonpositive = n <= 0 && m <= 0;
      correction_(n + order, m + order) =
          2.0 * (nonpositive ? gram_pos(n + order, m + order)
                             : gram_neg(n + order, m + order));
    }
  }
  correction_ = 0.5 * (correction_ + correction_.adjoint()).eval();

  Eigen::MatrixXcd d = gram_pos - gram_neg;
  for (int n = -order; n <= order; ++n) d(n + order, n + order) -= static_cast<double>(n);
  d_residual_ = d.cwiseAbs().maxCoeff();
  if (d_residual_ > kDResidualLimit) {
    std::ostringstream msg;
    msg << "D_a is not diagonal in the phi basis (residual " << d_residual_
        << "); grid " << grid.size << " does not resolve the basis";
    throw Error(ErrorCode::kBandwidthExceeded, msg.str());
  }

  radius_ = 1;
  for (int n = -order; n <= order; ++n) {
    if (correction_.row(n + order).cwiseAbs().maxCoeff() > kDecoupledCoupling) {
      radius_ = std::max(radius_, std::abs(n));
    }
  }
  const Eigen::Index bdim = 2 * radius_ + 1;
  using WideMatrix = Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic>;
  WideMatrix block = correction_.block(order - radius_, order - radius_, bdim, bdim)
                         .cast<std::complex<long double>>();
  for (int n = -radius_; n <= radius_; ++n) {
    block(n + radius_, n + radius_) += static_cast<long double>(std::abs(n));
  }
  Eigen::SelfAdjointEigenSolver<WideMatrix> solver(block);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kEigenSolverFailure, "phi-basis eigensolver failed");
  }
  block_values_ = solver.eigenvalues();
  block_vectors_ = solver.eigenvectors();
  min_eigenvalue_ = static_cast<double>(block_values_(0));
  if (min_eigenvalue_ < -kNegativeFloor) {
    std::ostringstream msg;
    msg << "phi-basis eigenvalue " << min_eigenvalue_ << " below the -1e-9 floor";
    throw Error(ErrorCode::kNegativeEigenvalue, msg.str());
  }
}

Eigen::MatrixXcd PhiGalerkin::lambda_matrix() const {
  Eigen::MatrixXcd a = correction_;
  for (int n = -order_; n <= order_; ++n) a(n + order_, n + order_) += std::abs(n);
  return a;
}

std::vector<double> PhiGalerkin::excess_power(double s) const {
  std::vector<double> out(static_cast<std::size_t>(2 * order_ + 1));
  const long double ls = s;
  Eigen::Matrix<long double, Eigen::Dynamic, 1> g(block_values_.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    g(j) = block_values_(j) > kKernelTolerance ? std::pow(block_values_(j), ls) : 0.0L;
  }
  for (int n = -order_; n <= order_; ++n) {
    double value = 0.0;
    if (std::abs(n) <= radius_) {
      const long double h = n == 0 ? 0.0L : std::pow(static_cast<long double>(std::abs(n)), ls);
      const Eigen::Index row = n + radius_;
      long double acc = 0.0L;
      for (Eigen::Index j = 0; j < g.size(); ++j) {
        acc += std::norm(block_vectors_(row, j)) * (g(j) - h);
      }
      value = static_cast<double>(acc);
    } else {
      const double an = std::abs(n);
      const double rel = correction_(n + order_, n + order_).real() / an;
      value = std::pow(an, s) * std::expm1(s * std::log1p(rel));
    }
    out[static_cast<std::size_t>(n + order_)] = value;
  }
  return out;
}

double PhiGalerkin::rayleigh(int n, double s) const {
  if (std::abs(n) > order_) {
    throw Error(ErrorCode::kInvalidGrid, "mode outside the Galerkin space");
  }
  return mode_power(n, s) + excess_power(s)[static_cast<std::size_t>(n + order_)];
}

}  // namespace steklov
