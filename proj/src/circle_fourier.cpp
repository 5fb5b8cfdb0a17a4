#include "steklov/circle_fourier.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

constexpr std::size_t kMaxAdaptiveGrid = std::size_t{1} << 18;
constexpr double kTrimRelative = 1e-16;
constexpr double kHermitianTolerance = 1e-12;

std::vector<Complex> forward_unscaled(const std::vector<Complex>& in) {
  Eigen::FFT<double> fft;
  std::vector<Complex> out;
  fft.fwd(out, in);
  return out;
}

std::vector<Complex> inverse_unscaled(const std::vector<Complex>& in) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> out;
  fft.inv(out, in);
  return out;
}

std::size_t wrap(int n, std::size_t size) {
  const auto s = static_cast<long long>(size);
  return static_cast<std::size_t>(((n % s) + s) % s);
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// ---------------------------------------------------------------------------
// FourierSeries

FourierSeries::FourierSeries(int order)
    : order_(order), coeffs_(static_cast<std::size_t>(2 * order + 1)) {
  if (order < 0) throw Error(ErrorCode::kInvalidGrid, "negative order");
}

FourierSeries::FourierSeries(int order, std::vector<Complex> coeffs)
    : order_(order), coeffs_(std::move(coeffs)) {
  if (order < 0 || coeffs_.size() != static_cast<std::size_t>(2 * order + 1)) {
    throw Error(ErrorCode::kInvalidGrid,
                "coefficient vector must have 2M+1 entries");
  }
}

FourierSeries FourierSeries::constant(Complex value) {
  return FourierSeries(0, {value});
}

FourierSeries FourierSeries::from_modes(
    std::initializer_list<std::pair<int, Complex>> modes) {
  FourierSeries s;
  for (const auto& [n, c] : modes) s.set(n, s.coefficient(n) + c);
  return s;
}

void FourierSeries::set(int n, Complex value) {
  if (std::abs(n) > order_) *this = widened(std::abs(n));
  coeffs_[n + order_] = value;
}

Complex FourierSeries::operator()(double theta) const {
  Complex sum = coeffs_[order_];
  for (int n = 1; n <= order_; ++n) {
    const Complex e = std::polar(1.0, n * theta);
    sum += coeffs_[order_ + n] * e + coeffs_[order_ - n] * std::conj(e);
  }
  return sum;
}

double FourierSeries::hermitian_defect() const {
  double defect = 0.0;
  for (int n = 0; n <= order_; ++n) {
    defect = std::max(defect, std::abs(coefficient(-n) - std::conj(coefficient(n))));
  }
  return defect;
}

double FourierSeries::max_abs() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

FourierSeries FourierSeries::trimmed(double relative) const {
  const double cutoff = relative * max_abs();
  int keep = order_;
  while (keep > 0 && std::abs(coefficient(keep)) <= cutoff &&
         std::abs(coefficient(-keep)) <= cutoff) {
    --keep;
  }
  if (keep == order_) return *this;
  std::vector<Complex> c(coeffs_.begin() + (order_ - keep),
                         coeffs_.begin() + (order_ + keep + 1));
  return FourierSeries(keep, std::move(c));
}

FourierSeries FourierSeries::widened(int order) const {
  if (order <= order_) return *this;
  FourierSeries out(order);
  for (int n = -order_; n <= order_; ++n) out.coeffs_[n + order] = coefficient(n);
  return out;
}

FourierSeries FourierSeries::derivative() const {
  FourierSeries out(order_);
  for (int n = -order_; n <= order_; ++n) {
    out.coeffs_[n + order_] = static_cast<double>(n) * coefficient(n);
  }
  return out;
}

FourierSeries FourierSeries::operator*(const FourierSeries& other) const {
  const int order = order_ + other.order_;
  FourierSeries out(order);
  for (int m = -order_; m <= order_; ++m) {
    const Complex cm = coefficient(m);
    if (cm == Complex{}) continue;
    for (int n = -other.order_; n <= other.order_; ++n) {
      out.coeffs_[m + n + order] += cm * other.coefficient(n);
    }
  }
  return out;
}

FourierSeries FourierSeries::operator*(Complex factor) const {
  FourierSeries out = *this;
  for (auto& c : out.coeffs_) c *= factor;
  return out;
}

FourierSeries FourierSeries::operator+(const FourierSeries& other) const {
  FourierSeries out = widened(std::max(order_, other.order_));
  for (int n = -other.order_; n <= other.order_; ++n) {
    out.coeffs_[n + out.order_] += other.coefficient(n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discrete analysis / synthesis

FourierSeries from_samples(const GridSampling& g) {
  const std::size_t n = g.size();
  if (!is_power_of_two(n) || n < 2) {
    throw Error(ErrorCode::kInvalidGrid, "grid size must be a power of two >= 2");
  }
  const std::vector<Complex> spectrum = forward_unscaled(g.values);
  const int order = static_cast<int>(n / 2) - 1;
  FourierSeries out(order);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int k = -order; k <= order; ++k) {
    out.set(k, spectrum[wrap(k, n)] * inv_n);
  }
  return out;
}

GridSampling to_samples(const FourierSeries& a, std::size_t grid_size) {
  if (!is_power_of_two(grid_size)) {
    throw Error(ErrorCode::kInvalidGrid, "grid size must be a power of two");
  }
  const auto needed = static_cast<std::size_t>(2 * (2 * a.order() + 1));
  if (grid_size < needed) {
    std::ostringstream msg;
    msg << "grid of " << grid_size << " points aliases a series of order "
        << a.order() << " (need >= " << needed << ")";
    throw Error(ErrorCode::kAliasing, msg.str());
  }
  std::vector<Complex> spectrum(grid_size);
  for (int k = -a.order(); k <= a.order(); ++k) {
    spectrum[wrap(k, grid_size)] = a.coefficient(k);
  }
  return GridSampling{inverse_unscaled(spectrum)};
}

AdaptiveAnalysis analyze_adaptive(
    const std::function<std::vector<Complex>(std::size_t)>& sampler,
    std::size_t min_grid, double tail_tol) {
  std::size_t n = next_power_of_two(std::max<std::size_t>(min_grid, 16));
  AdaptiveAnalysis result;
  while (true) {
    FourierSeries full = from_samples(GridSampling{sampler(n)});
    const double peak = full.max_abs();
    double tail = 0.0;
    const int quarter = static_cast<int>(n / 4);
    for (int k = quarter; k <= full.order(); ++k) {
      tail = std::max({tail, std::abs(full.coefficient(k)),
                       std::abs(full.coefficient(-k))});
    }
    const double rel_tail = peak > 0.0 ? tail / peak : 0.0;
    if (rel_tail <= tail_tol || n >= kMaxAdaptiveGrid) {
      result.series = full.trimmed(kTrimRelative);
      result.grid_size = n;
      result.tail = rel_tail;
      return result;
    }
    n *= 2;
  }
}

// ---------------------------------------------------------------------------
// WeightFunction

std::size_t positivity_grid_size(int order) {
  return next_power_of_two(std::max<std::size_t>(
      256, 16 * static_cast<std::size_t>(order + 1)));
}

WeightFunction::WeightFunction(FourierSeries series, std::string meta)
    : meta_(std::move(meta)) {
  const double scale = std::max(1.0, series.max_abs());
  if (series.hermitian_defect() > kHermitianTolerance * scale) {
    throw Error(ErrorCode::kNonRealWeight,
                "weight coefficients violate c_{-n} = conj(c_n)");
  }
  const int m = series.order();
  FourierSeries sym(m);
  for (int n = 0; n <= m; ++n) {
    const Complex c = 0.5 * (series.coefficient(n) + std::conj(series.coefficient(-n)));
    sym.set(n, n == 0 ? Complex(c.real(), 0.0) : c);
    if (n != 0) sym.set(-n, std::conj(c));
  }
  series_ = std::move(sym);

  const double peak = series_.max_abs();
  tail_ratio_ = peak > 0.0 ? std::abs(series_.coefficient(m)) / peak : 0.0;

  const GridSampling grid = to_samples(series_, positivity_grid_size(m));
  min_value_ = grid.values.front().real();
  for (const auto& v : grid.values) min_value_ = std::min(min_value_, v.real());
  if (!(min_value_ > 0.0)) {
    std::ostringstream msg;
    msg << "minimum sample " << min_value_ << " is not positive";
    throw Error(ErrorCode::kNonPositiveWeight, msg.str());
  }
}

WeightFunction WeightFunction::constant(double value, std::string meta) {
  return WeightFunction(FourierSeries::constant(value), std::move(meta));
}

WeightFunction WeightFunction::with_meta(std::string meta) const {
  WeightFunction out = *this;
  out.meta_ = std::move(meta);
  return out;
}

WeightFunction WeightFunction::scaled(double factor) const {
  return WeightFunction(series_ * factor, meta_);
}

// ---------------------------------------------------------------------------
// Pointwise maps and quadrature

WeightFunction pointwise_map(const WeightFunction& a, PointwiseMap f) {
  const FourierSeries& s = a.series();
  const auto oversampled =
      next_power_of_two(4 * static_cast<std::size_t>(2 * s.order() + 1));
  auto sampler = [&](std::size_t n) {
    std::vector<Complex> values = to_samples(s, n).values;
    for (auto& v : values) {
      const double x = v.real();
      if (!(x > 0.0)) {
        throw Error(ErrorCode::kNonPositiveWeight,
                    "pointwise map needs a positive weight");
      }
      switch (f.kind) {
        case PointwiseMap::Kind::kReciprocal: v = 1.0 / x; break;
        case PointwiseMap::Kind::kSqrt: v = std::sqrt(x); break;
        case PointwiseMap::Kind::kPower: v = std::pow(x, f.exponent); break;
      }
    }
    return values;
  };
  AdaptiveAnalysis r = analyze_adaptive(sampler, oversampled);
  // Samples are real, so any asymmetry is rounding in the transform.
  const double scale = std::max(1.0, r.series.max_abs());
  if (r.series.hermitian_defect() > kHermitianTolerance * scale) {
    throw Error(ErrorCode::kNonRealWeight, "pointwise map lost Hermitian symmetry");
  }
  std::ostringstream meta;
  switch (f.kind) {
    case PointwiseMap::Kind::kReciprocal: meta << "reciprocal"; break;
    case PointwiseMap::Kind::kSqrt: meta << "sqrt"; break;
    case PointwiseMap::Kind::kPower: meta << "power(" << f.exponent << ")"; break;
  }
  meta << "[" << a.meta() << "]";
  return WeightFunction(std::move(r.series), meta.str());
}

double boundary_length(const WeightFunction& a) {
  if (a.order() == 0) return kTwoPi / a.coefficient(0).real();
  return kTwoPi * pointwise_map(a, PointwiseMap::reciprocal()).coefficient(0).real();
}

WeightFunction normalize(const WeightFunction& a) {
  const double factor = boundary_length(a) / kTwoPi;
  std::ostringstream meta;
  meta.precision(17);
  meta << a.meta() << ";normalized(scale=" << factor << ")";
  return a.scaled(factor).with_meta(meta.str());
}

double normalization_defect(const WeightFunction& a) {
  return std::abs(boundary_length(a) / kTwoPi - 1.0);
}

// ---------------------------------------------------------------------------
// Antiderivative

CircleAntiderivative::CircleAntiderivative(FourierSeries periodic_part)
    : periodic_(std::move(periodic_part)), offset_(periodic_(0.0).real()) {}

double CircleAntiderivative::operator()(double theta) const {
  return theta + periodic_(theta).real() - offset_;
}

std::vector<double> CircleAntiderivative::on_grid(std::size_t grid_size) const {
  const GridSampling g = to_samples(periodic_, grid_size);
  std::vector<double> out(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    out[j] = GridSampling::node(j, grid_size) + g.values[j].real() - offset_;
  }
  return out;
}

CircleAntiderivative antiderivative_mean_one(const WeightFunction& c) {
  return antiderivative_mean_one(c.series());
}

CircleAntiderivative antiderivative_mean_one(const FourierSeries& c) {
  const double mean = c.coefficient(0).real();
  if (std::abs(mean - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "mean coefficient " << mean << " differs from 1";
    throw Error(ErrorCode::kMeanNotOne, msg.str());
  }
  FourierSeries g(c.order());
  for (int k = -c.order(); k <= c.order(); ++k) {
    if (k == 0) continue;
    g.set(k, c.coefficient(k) / Complex(0.0, static_cast<double>(k)));
  }
  return CircleAntiderivative(std::move(g));
}

}  // namespace steklov
