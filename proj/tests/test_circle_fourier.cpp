#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "steklov/circle_fourier.hpp"
#include "steklov/errors.hpp"

using namespace steklov;

namespace {

GridSampling sample(std::size_t n, const std::function<Complex(double)>& f) {
  GridSampling g;
  g.values.resize(n);
  for (std::size_t j = 0; j < n; ++j) g.values[j] = f(GridSampling::node(j, n));
  return g;
}

template <class F>
void expect_code(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(FromSamples, Constant) {
  const FourierSeries s = from_samples(sample(16, [](double) { return Complex(1.0); }));
  EXPECT_NEAR(std::abs(s.coefficient(0) - 1.0), 0.0, 1e-15);
  for (int n = 1; n <= s.order(); ++n) {
    EXPECT_LT(std::abs(s.coefficient(n)), 1e-15);
    EXPECT_LT(std::abs(s.coefficient(-n)), 1e-15);
  }
}

TEST(FromSamples, CosineTwo) {
  const FourierSeries s = from_samples(sample(32, [](double t) { return Complex(std::cos(2 * t)); }));
  EXPECT_NEAR(s.coefficient(2).real(), 0.5, 1e-15);
  EXPECT_NEAR(s.coefficient(-2).real(), 0.5, 1e-15);
  EXPECT_LT(std::abs(s.coefficient(0)), 1e-15);
}

TEST(FromSamples, SquareExpandedByHand) {
  const FourierSeries s = from_samples(
      sample(32, [](double t) { return Complex(std::pow(1.0 + std::cos(t), 2)); }));
  EXPECT_NEAR(s.coefficient(0).real(), 1.5, 1e-14);
  EXPECT_NEAR(s.coefficient(1).real(), 1.0, 1e-14);
  EXPECT_NEAR(s.coefficient(-1).real(), 1.0, 1e-14);
  EXPECT_NEAR(s.coefficient(2).real(), 0.25, 1e-14);
  EXPECT_NEAR(s.coefficient(-2).real(), 0.25, 1e-14);
}

TEST(FromSamples, MatchesDirectDft) {
  oracle::WeightGenerator rng(11);
  for (std::size_t n : {8u, 32u, 128u}) {
    GridSampling g;
    for (std::size_t j = 0; j < n; ++j) g.values.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const FourierSeries s = from_samples(g);
    EXPECT_EQ(s.order(), static_cast<int>(n / 2 - 1));
    for (int k = -s.order(); k <= s.order(); ++k) {
      EXPECT_LT(std::abs(s.coefficient(k) - oracle::dft_coefficient(g.values, k)), 1e-14);
    }
  }
}

TEST(FromSamples, RejectsNonPowerOfTwo) {
  expect_code(ErrorCode::kInvalidGrid, [] { from_samples(sample(12, [](double) { return Complex(1.0); })); });
}

TEST(ToSamples, ConstantAndCosine) {
  const GridSampling ones = to_samples(FourierSeries::constant(1.0), 8);
  for (const auto& v : ones.values) EXPECT_NEAR(std::abs(v - 1.0), 0.0, 1e-15);
  const FourierSeries cosine = FourierSeries::from_modes({{1, 0.5}, {-1, 0.5}});
  const GridSampling g = to_samples(cosine, 8);
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_NEAR(g.values[j].real(), std::cos(GridSampling::node(j, 8)), 1e-15);
    EXPECT_NEAR(g.values[j].imag(), 0.0, 1e-15);
  }
}

TEST(ToSamples, AliasingAndGridErrors) {
  const FourierSeries s = FourierSeries::from_modes({{0, 1.0}, {3, 0.1}, {-3, 0.1}});
  expect_code(ErrorCode::kAliasing, [&] { to_samples(s, 8); });
  expect_code(ErrorCode::kInvalidGrid, [&] { to_samples(s, 24); });
  EXPECT_NO_THROW(to_samples(s, 16));
}

TEST(ToSamples, MatchesDirectSynthesis) {
  oracle::WeightGenerator rng(12);
  const FourierSeries s = rng.complex_series(7);
  const GridSampling g = to_samples(s, 64);
  for (std::size_t j = 0; j < 64; ++j) {
    EXPECT_LT(std::abs(g.values[j] - oracle::synthesize(s, GridSampling::node(j, 64))), 1e-13);
  }
}

TEST(RoundTripProperty, AnalysisInvertsSynthesis) {
  oracle::WeightGenerator rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int order = rng.integer(0, 40);
    const FourierSeries s = rng.complex_series(order);
    const std::size_t n = next_power_of_two(2 * (2 * order + 1)) << rng.integer(0, 2);
    const FourierSeries back = from_samples(to_samples(s, n));
    for (int k = -back.order(); k <= back.order(); ++k) {
      ASSERT_LT(std::abs(back.coefficient(k) - s.coefficient(k)), 1e-13)
          << "order " << order << " grid " << n << " mode " << k;
    }
  }
}

TEST(WeightFunction, RejectsNonPositiveAndNonReal) {
  expect_code(ErrorCode::kNonPositiveWeight, [] {
    WeightFunction(FourierSeries::from_modes({{0, 1.0}, {1, 0.75}, {-1, 0.75}}));
  });
  expect_code(ErrorCode::kNonPositiveWeight, [] { WeightFunction::constant(-1.0); });
  expect_code(ErrorCode::kNonRealWeight, [] {
    WeightFunction(FourierSeries::from_modes({{0, 1.0}, {1, 0.2}, {-1, 0.1}}));
  });
}

TEST(WeightFunction, TailRatioRecorded) {
  const WeightFunction a(FourierSeries::from_modes({{0, 1.0}, {2, 0.25}, {-2, 0.25}}));
  EXPECT_NEAR(a.tail_ratio(), 0.25, 1e-15);
  EXPECT_NEAR(a.min_value(), 0.5, 1e-12);
}

TEST(PointwiseMap, ConstantCases) {
  const WeightFunction r = pointwise_map(WeightFunction::constant(4.0), PointwiseMap::sqrt());
  EXPECT_NEAR(r.coefficient(0).real(), 2.0, 1e-15);
  const WeightFunction q = pointwise_map(WeightFunction::constant(2.0), PointwiseMap::reciprocal());
  EXPECT_NEAR(q.coefficient(0).real(), 0.5, 1e-15);
}

TEST(PointwiseMap, ReciprocalMeanByQuadrature) {
  const WeightFunction a(FourierSeries::from_modes({{0, 1.0}, {2, 0.25}, {-2, 0.25}}));
  const WeightFunction r = pointwise_map(a, PointwiseMap::reciprocal());
  const double quad = oracle::circle_mean([](double t) { return 1.0 / (1.0 + 0.5 * std::cos(2 * t)); });
  EXPECT_NEAR(quad, 2.0 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(r.coefficient(0).real(), 2.0 / std::sqrt(3.0), 1e-14);
  EXPECT_LT(r.series().hermitian_defect(), 1e-15);
}

TEST(PointwiseMapProperty, SqrtSquaredRecoversInput) {
  oracle::WeightGenerator rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const WeightFunction a = rng.positive(rng.integer(1, 10), rng.uniform(0.1, 0.9));
    const WeightFunction r = pointwise_map(a, PointwiseMap::sqrt());
    const FourierSeries sq = r.series() * r.series();
    const std::size_t n = 1024;
    const GridSampling ga = to_samples(a.series(), n);
    const GridSampling gs = to_samples(sq.widened(std::max(sq.order(), a.order())), n * 4);
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_LT(std::abs(ga.values[j] - gs.values[4 * j]), 1e-10);
    }
  }
}

TEST(PointwiseMapProperty, PowerMatchesPointwiseEvaluation) {
  oracle::WeightGenerator rng(15);
  const WeightFunction a = rng.positive(5, 0.6);
  const WeightFunction b = pointwise_map(a, PointwiseMap::power(3.0));
  for (double t : {0.0, 0.3, 1.7, 4.0, 6.1}) EXPECT_NEAR(b(t), std::pow(a(t), 3.0), 1e-12);
  // Integer power of a band-limited weight is band-limited.
  EXPECT_LE(b.order(), 15);
}

TEST(BoundaryLength, ClosedForms) {
  EXPECT_NEAR(boundary_length(WeightFunction::constant(1.0)), kTwoPi, 1e-15);
  EXPECT_NEAR(boundary_length(WeightFunction::constant(2.0)), kPi, 1e-15);
  const WeightFunction m(FourierSeries::from_modes({{0, 5.0 / 3.0}, {1, -2.0 / 3.0}, {-1, -2.0 / 3.0}}));
  EXPECT_NEAR(boundary_length(m), kTwoPi, 1e-13);
  for (double c : {0.1, 0.5, 0.9}) {
    const WeightFunction a(FourierSeries::from_modes({{0, 1.0}, {1, c / 2}, {-1, c / 2}}));
    EXPECT_NEAR(boundary_length(a), kTwoPi / std::sqrt(1 - c * c), 1e-12 * kTwoPi / std::sqrt(1 - c * c));
  }
}

TEST(BoundaryLength, AgreesWithQuadrature) {
  oracle::WeightGenerator rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    const WeightFunction a = rng.positive(rng.integer(1, 8), 0.7);
    const double quad = kTwoPi * oracle::circle_mean([&](double t) { return 1.0 / a(t); });
    EXPECT_NEAR(boundary_length(a), quad, 1e-12 * quad);
  }
}

TEST(Normalize, Examples) {
  const WeightFunction two = normalize(WeightFunction::constant(2.0));
  EXPECT_NEAR(two.coefficient(0).real(), 1.0, 1e-15);
  const WeightFunction one = normalize(WeightFunction::constant(1.0));
  EXPECT_NEAR(one.coefficient(0).real(), 1.0, 1e-15);
  EXPECT_NE(two.meta().find("normalized"), std::string::npos);
}

TEST(Normalize, DomainWeightByQuadrature) {
  const double eps = 0.1;
  auto f = [&](double t) { return 1.0 / std::abs(1.0 + 2.0 * eps * std::polar(1.0, t)); };
  const AdaptiveAnalysis r = analyze_adaptive(
      [&](std::size_t n) {
        std::vector<Complex> v(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = f(GridSampling::node(j, n));
        return v;
      },
      64);
  const WeightFunction a = normalize(WeightFunction(r.series));
  const double quad = kTwoPi * oracle::circle_mean([&](double t) { return 1.0 / a(t); });
  EXPECT_NEAR(quad, kTwoPi, 1e-12);
  EXPECT_LT(normalization_defect(a), 1e-12);
}

TEST(NormalizeProperty, LengthIsTwoPiAndScaleInvariant) {
  oracle::WeightGenerator rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const WeightFunction a = rng.positive(rng.integer(1, 10), rng.uniform(0.05, 0.95));
    const WeightFunction n1 = normalize(a);
    EXPECT_NEAR(boundary_length(n1), kTwoPi, 1e-12);
    const WeightFunction n2 = normalize(a.scaled(rng.uniform(0.2, 5.0)));
    for (int k = -a.order(); k <= a.order(); ++k) {
      EXPECT_LT(std::abs(n1.coefficient(k) - n2.coefficient(k)), 1e-13);
    }
  }
}

TEST(Antiderivative, Examples) {
  const CircleAntiderivative id = antiderivative_mean_one(WeightFunction::constant(1.0));
  for (double t : {0.0, 1.0, 3.0, 6.0}) EXPECT_NEAR(id(t), t, 1e-15);
  const FourierSeries c = FourierSeries::from_modes({{0, 1.0}, {1, 0.5}, {-1, 0.5}});
  const CircleAntiderivative b = antiderivative_mean_one(c);
  for (double t : {0.0, 0.5, 2.0, 4.5}) EXPECT_NEAR(b(t), t + std::sin(t), 1e-15);
  EXPECT_NEAR(b(kTwoPi), kTwoPi, 1e-14);
  expect_code(ErrorCode::kMeanNotOne, [] { antiderivative_mean_one(WeightFunction::constant(1.1)); });
}

TEST(AntiderivativeProperty, MonotoneAndPeriodicIncrement) {
  oracle::WeightGenerator rng(18);
  for (int trial = 0; trial < 30; ++trial) {
    const WeightFunction a = normalize(rng.positive(rng.integer(1, 8), 0.8));
    const WeightFunction c = pointwise_map(a, PointwiseMap::reciprocal());
    const CircleAntiderivative b = antiderivative_mean_one(c);
    EXPECT_NEAR(b(0.0), 0.0, 1e-15);
    EXPECT_NEAR(b(kTwoPi), kTwoPi, 1e-12);
    const double t = rng.uniform(0, kTwoPi);
    EXPECT_NEAR(b(t + kTwoPi), b(t) + kTwoPi, 1e-12);
    const std::vector<double> grid = b.on_grid(1024);
    for (std::size_t j = 1; j < grid.size(); ++j) ASSERT_GT(grid[j], grid[j - 1]);
    for (std::size_t j = 0; j < grid.size(); j += 97) {
      EXPECT_NEAR(grid[j], b(GridSampling::node(j, 1024)), 1e-13);
    }
  }
}
