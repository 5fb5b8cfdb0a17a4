#pragma once

// Finite Hermitian matrices of D, Lambda, D_a, Lambda_a and their powers in
// the Fourier basis and in the phi basis of D_a.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "steklov/circle_fourier.hpp"

namespace steklov {

enum class Basis { kFourier, kPhi };

enum class FourierOperator {
  kLambdaA,  // a^{1/2} Lambda a^{1/2}
  kDA,       // a^{1/2} D a^{1/2}
  kDsqA,     // a^2 D^2 + 2a(Da)D + a(D^2 a)/2 + (Da)^2/4
  kMultA,    // multiplication by a
};

/// Kernel threshold of the power convention |A|^s = (A + P0)^s - P0.
inline constexpr double kKernelTolerance = 1e-8;
/// Eigenvalues below -kNegativeFloor mean the assembly is inconsistent.
inline constexpr double kNegativeFloor = 1e-9;

/// Matrix indexed by modes -M..M (row/column index n + M).
struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  Basis basis = Basis::kFourier;
  std::string weight_id;
  int order = 0;

  Eigen::Index index(int n) const { return static_cast<Eigen::Index>(n + order); }
  Complex operator()(int m, int n) const { return entries(index(m), index(n)); }
  /// ||A - A^*||_max / max(1, ||A||_max).
  double hermitian_defect() const;
};

/// Rank-one projection onto span{phi_0}, stored as the unit coefficient
/// vector of phi_0 in the given basis.
struct KernelProjection {
  Eigen::VectorXcd vector;
  Basis basis = Basis::kFourier;

  Eigen::MatrixXcd matrix() const { return vector * vector.adjoint(); }
};

OperatorMatrix assemble_fourier(const WeightFunction& a, int order,
                                FourierOperator which);

/// phi_n(theta_j) = (2 pi a)^{-1/2} exp(i n b(theta_j)), b the antiderivative
/// of 1/a. Requires a normalized.
GridSampling phi_basis_samples(const WeightFunction& a, int n,
                               std::size_t grid_size);

/// Matrix of Lambda_a^t in the phi basis, |n| <= order. Requires a normalized.
OperatorMatrix assemble_phi(const WeightFunction& a, int order, double t);

/// U g(Lambda) U^* with g(x) = x^s above kKernelTolerance and 0 below.
OperatorMatrix matrix_power(const OperatorMatrix& a, double s);

KernelProjection kernel_projection(const WeightFunction& a, int order,
                                   Basis basis);

/// Galerkin data of Lambda_a on span{phi_n : |n| <= order}.
///
/// The matrix is held as |D_a| + E. Writing c_m(k) for the Fourier
/// coefficients of exp(i m b), D_a-diagonality gives
///   A_nm = m delta_nm + 2 sum_{k<0} |k| c_m(k) conj(c_n(k))
///        = -m delta_nm + 2 sum_{k>0} k c_m(k) conj(c_n(k)),
/// so E is accumulated from the small side of each block without
/// cancellation. Modes whose coupling in E stays below kDecoupledCoupling
/// are treated as decoupled when forming powers.
class PhiGalerkin {
 public:
  static constexpr double kDecoupledCoupling = 1e-14;

  PhiGalerkin(const WeightFunction& a, int order);

  int order() const { return order_; }
  std::size_t grid_size() const { return grid_size_; }
  const std::string& weight_id() const { return weight_id_; }

  /// E = A - |D_a| restricted to the Galerkin space.
  const Eigen::MatrixXcd& correction() const { return correction_; }
  /// A = |D_a| + E.
  Eigen::MatrixXcd lambda_matrix() const;
  /// max |(D_a phi_m, phi_n) - n delta_nm| over the Galerkin block.
  double d_residual() const { return d_residual_; }
  /// Radius of the central block that is diagonalized; modes outside it are
  /// decoupled to within kDecoupledCoupling.
  int coupling_radius() const { return radius_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

  /// (Lambda_a^s phi_n, phi_n) - |n|^s for n = -order..order, with the
  /// kernel convention 0^s = 0 (so the n = 0 entry is (Lambda_a^s phi_0,
  /// phi_0)).
  std::vector<double> excess_power(double s) const;
  /// (Lambda_a^s phi_n, phi_n).
  double rayleigh(int n, double s) const;

 private:
  int order_;
  int radius_ = 0;
  std::size_t grid_size_ = 0;
  std::string weight_id_;
  Eigen::MatrixXcd correction_;
  double d_residual_ = 0.0;
  // Extended precision: the rounding error of the eigenvalues enters the
  // excess terms amplified by s |n|^{s-1}.
  Eigen::Matrix<long double, Eigen::Dynamic, 1> block_values_;
  Eigen::Matrix<std::complex<long double>, Eigen::Dynamic, Eigen::Dynamic> block_vectors_;
  double min_eigenvalue_ = 0.0;
};

/// |n|^s with 0^s = 0 (kernel convention).
double mode_power(int n, double s);

}  // namespace steklov
