#pragma once

// Zeta-invariants Z_k(a) = zeta_a(-2k) as lattice sums over Fourier
// coefficients with exact combinatorial weights N_j.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <vector>

#include "steklov/circle_fourier.hpp"

namespace steklov {

using BigInt = boost::multiprecision::cpp_int;

/// j_1, ..., j_{2k} with sum zero, plus the partial sums S_0 = 0,
/// S_i = j_1 + ... + j_i for i < 2k.
class IndexTuple {
 public:
  /// Throws kNonZeroSum (or kInvalidGrid for odd/empty input).
  explicit IndexTuple(std::vector<int> j);

  const std::vector<int>& indices() const { return j_; }
  const std::vector<long long>& partial_sums() const { return partial_; }
  int k() const { return static_cast<int>(j_.size() / 2); }

 private:
  std::vector<int> j_;
  std::vector<long long> partial_;
};

/// N_j = sum_n (|f(n)| - f(n)), f(n) = prod_i (n + S_i), exact.
BigInt n_coefficient(const IndexTuple& j);
/// Same sum from a partial-sum profile (order irrelevant).
BigInt n_coefficient_from_profile(const std::vector<long long>& partial_sums);

inline constexpr std::uint64_t kDefaultTupleBudget = 100'000'000;

struct ZetaInvariantResult {
  Complex value;
  std::uint64_t tuples = 0;       // lattice points visited
  std::uint64_t distinct_n = 0;   // memo table size
};

/// Brute-force lattice sum over all 2k-tuples |j_i| <= M with zero sum.
/// Throws kBudgetExceeded when k (2M+1)^{2k-1} > budget.
ZetaInvariantResult zeta_invariant(const FourierSeries& a, int k,
                                   std::uint64_t budget = kDefaultTupleBudget,
                                   unsigned workers = 1);
/// Real part of the lattice sum for a real weight.
double zeta_invariant(const WeightFunction& a, int k,
                      std::uint64_t budget = kDefaultTupleBudget);

/// (2/3) sum_{n>=2} (n^3 - n)|a_n|^2. Throws kNonRealWeight for
/// non-Hermitian input.
double edward_z1(const FourierSeries& a);

struct InvariantReport {
  int k = 0;
  int order = 0;
  double z_k = 0.0;
  double z_k_imag = 0.0;
  std::optional<double> edward;  // k = 1 only
  std::uint64_t lattice_size = 0;
  /// sum_{n>=2} n^{2k+1} |a_n|^{2k}
  double rhs_power = 0.0;
  /// sum_{n>=2} n^{2k+1} |b_n|^2, b = a^k
  double rhs_lifted = 0.0;
  /// Z_k / rhs; empty when the right side vanishes.
  std::optional<double> ratio_power;
  std::optional<double> ratio_lifted;
};

InvariantReport estimate_residuals(const WeightFunction& a, int k,
                                   std::uint64_t budget = kDefaultTupleBudget);

}  // namespace steklov
