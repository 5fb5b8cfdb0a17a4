#pragma once

// Smooth periodic functions on the unit circle: truncated Fourier series,
// uniform-grid samples, pointwise nonlinear maps and the mean-one
// antiderivative used to build the phi basis.

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace steklov {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// Values at the nodes theta_j = 2*pi*j/N, j = 0..N-1.
struct GridSampling {
  std::vector<Complex> values;

  std::size_t size() const { return values.size(); }
  static double node(std::size_t j, std::size_t n) {
    return kTwoPi * static_cast<double>(j) / static_cast<double>(n);
  }
};

/// Truncated series sum_{|n| <= M} c_n e^{i n theta} with arbitrary complex
/// coefficients. Coefficients outside the stored range read as zero.
class FourierSeries {
 public:
  FourierSeries() : FourierSeries(0) {}
  explicit FourierSeries(int order);
  FourierSeries(int order, std::vector<Complex> coeffs);

  static FourierSeries constant(Complex value);
  static FourierSeries from_modes(
      std::initializer_list<std::pair<int, Complex>> modes);

  int order() const { return order_; }
  Complex coefficient(int n) const {
    return (n < -order_ || n > order_) ? Complex{} : coeffs_[n + order_];
  }
  /// Grows the order when n is outside the current range.
  void set(int n, Complex value);
  std::span<const Complex> coefficients() const { return coeffs_; }

  Complex operator()(double theta) const;

  /// max_n |c_{-n} - conj(c_n)|.
  double hermitian_defect() const;
  double max_abs() const;
  /// Drops trailing modes whose magnitude is <= relative * max_abs().
  FourierSeries trimmed(double relative) const;
  FourierSeries widened(int order) const;

  /// Symbol of D = -i d/dtheta: c_n -> n c_n.
  FourierSeries derivative() const;
  /// Exact product of two band-limited functions (coefficient convolution).
  FourierSeries operator*(const FourierSeries& other) const;
  FourierSeries operator*(Complex factor) const;
  FourierSeries operator+(const FourierSeries& other) const;

 private:
  int order_;
  std::vector<Complex> coeffs_;
};

/// c_n = (1/N) sum_j values_j e^{-i n theta_j} for |n| <= N/2 - 1.
FourierSeries from_samples(const GridSampling& g);

/// values_j = sum_n c_n e^{i n theta_j}. Throws kAliasing when
/// grid_size < 2(2M+1) and kInvalidGrid when it is not a power of two.
GridSampling to_samples(const FourierSeries& a, std::size_t grid_size);

/// Analyzes sampler(N) on successively doubled grids, starting at
/// min_grid, until the outer quarter band is below tail_tol relative to the
/// largest coefficient. The result is trimmed at 1e-16 relative.
struct AdaptiveAnalysis {
  FourierSeries series;
  std::size_t grid_size = 0;
  double tail = 0.0;
};
AdaptiveAnalysis analyze_adaptive(
    const std::function<std::vector<Complex>(std::size_t)>& sampler,
    std::size_t min_grid, double tail_tol = 1e-15);

/// Positive, real smooth function on the circle stored by its Fourier
/// coefficients. Hermitian symmetry and positivity are checked on
/// construction.
class WeightFunction {
 public:
  explicit WeightFunction(FourierSeries series, std::string meta = {});

  static WeightFunction constant(double value, std::string meta = {});

  const FourierSeries& series() const { return series_; }
  int order() const { return series_.order(); }
  Complex coefficient(int n) const { return series_.coefficient(n); }
  double operator()(double theta) const { return series_(theta).real(); }

  const std::string& meta() const { return meta_; }
  WeightFunction with_meta(std::string meta) const;

  /// |a_M| / max_n |a_n|.
  double tail_ratio() const { return tail_ratio_; }
  /// Minimum over the positivity grid (at least 8M points).
  double min_value() const { return min_value_; }

  WeightFunction scaled(double factor) const;

 private:
  FourierSeries series_;
  std::string meta_;
  double tail_ratio_ = 0.0;
  double min_value_ = 0.0;
};

/// Grid used for positivity checks of a series of the given order.
std::size_t positivity_grid_size(int order);

struct PointwiseMap {
  enum class Kind { kReciprocal, kSqrt, kPower };
  Kind kind = Kind::kReciprocal;
  double exponent = 1.0;

  static PointwiseMap reciprocal() { return {Kind::kReciprocal, -1.0}; }
  static PointwiseMap sqrt() { return {Kind::kSqrt, 0.5}; }
  static PointwiseMap power(double p) { return {Kind::kPower, p}; }
};

/// f(a) analyzed from an oversampled grid (factor at least 4, doubled until
/// the tail is resolved).
WeightFunction pointwise_map(const WeightFunction& a, PointwiseMap f);

/// L(a) = integral of 1/a over the circle.
double boundary_length(const WeightFunction& a);

/// (L(a)/2pi) a, which has boundary length 2pi.
WeightFunction normalize(const WeightFunction& a);

/// |L(a)/2pi - 1|.
double normalization_defect(const WeightFunction& a);

/// b(theta) = integral_0^theta c(s) ds for c of mean one, i.e.
/// theta + sum_{k != 0} c_k (e^{ik theta} - 1)/(ik).
class CircleAntiderivative {
 public:
  explicit CircleAntiderivative(FourierSeries periodic_part);

  double operator()(double theta) const;
  /// b at theta_j = 2 pi j / N.
  std::vector<double> on_grid(std::size_t grid_size) const;

 private:
  FourierSeries periodic_;  // g with g_k = c_k/(ik), g_0 = 0
  double offset_;           // g(0)
};

CircleAntiderivative antiderivative_mean_one(const WeightFunction& c);
/// Same for a series that need not be positive; throws kMeanNotOne when
/// |c_0 - 1| > 1e-12.
CircleAntiderivative antiderivative_mean_one(const FourierSeries& c);

}  // namespace steklov
