#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "oracles.hpp"
#include "steklov/errors.hpp"
#include "steklov/serialization.hpp"

using namespace steklov;

namespace {

std::filesystem::path scratch_dir() {
  const auto p = std::filesystem::temp_directory_path() /
                 ("steklov_ser_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                  ::testing::UnitTest::GetInstance()->current_test_info()->name());
  std::filesystem::remove_all(p);
  return p;
}

ErrorCode parse_code(const json& j) {
  try {
    weight_from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted " << j.dump();
  return ErrorCode::kConfigError;
}

}  // namespace

TEST(WeightJson, RoundTripIsExact) {
  oracle::WeightGenerator rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const WeightFunction a = rng.positive(rng.integer(0, 9)).with_meta("w" + std::to_string(trial));
    const WeightFunction b = weight_from_json(json::parse(weight_to_json(a).dump()));
    ASSERT_EQ(b.order(), a.order());
    EXPECT_EQ(b.meta(), a.meta());
    for (int n = -a.order(); n <= a.order(); ++n) EXPECT_EQ(b.coefficient(n), a.coefficient(n)) << n;
  }
}

TEST(WeightJson, Layout) {
  const json j = weight_to_json(gallery("cosine(0.5,2)"));
  EXPECT_EQ(j["M"], 2);
  ASSERT_EQ(j["coeffs"].size(), 3u);
  EXPECT_EQ(j["coeffs"][2], json::array({2, 0.25, 0.0}));
  EXPECT_EQ(j["meta"], "cosine(0.5,2)");
}

TEST(WeightJson, HermitianCompletion) {
  const json j = json::parse(R"({"coeffs": [[0, 1.0, 0.0], [-1, 0.1, 0.2]]})");
  const WeightFunction a = weight_from_json(j);
  EXPECT_EQ(a.coefficient(1), Complex(0.1, -0.2));
  EXPECT_EQ(a.coefficient(-1), Complex(0.1, 0.2));
}

TEST(WeightJson, Malformed) {
  EXPECT_EQ(parse_code(json::parse(R"({"M": 1})")), ErrorCode::kParseError);
  EXPECT_EQ(parse_code(json::parse(R"({"coeffs": [[0, 1.0]]})")), ErrorCode::kParseError);
  EXPECT_EQ(parse_code(json::parse(R"({"coeffs": [[0, "x", 0.0]]})")), ErrorCode::kParseError);
  EXPECT_EQ(parse_code(json::parse(R"([1, 2, 3])")), ErrorCode::kParseError);
  EXPECT_EQ(parse_code(json::parse(R"({"coeffs": [[0, 0.2, 0.0], [1, 0.5, 0.0]]})")),
            ErrorCode::kNonPositiveWeight);
}

TEST(SeriesJson, RoundTripKeepsNonHermitianData) {
  oracle::WeightGenerator rng(72);
  const FourierSeries s = rng.complex_series(5);
  const FourierSeries t = series_from_json(json::parse(series_to_json(s).dump()));
  for (int n = -5; n <= 5; ++n) EXPECT_EQ(t.coefficient(n), s.coefficient(n));
}

TEST(DomainMapJson, RoundTrip) {
  const DomainMap d{{Complex(1.0), Complex(0.1, -0.05), Complex(0.0, 0.02)}, "lens"};
  const DomainMap e = domain_map_from_json(json::parse(domain_map_to_json(d).dump()));
  EXPECT_EQ(e.name, "lens");
  ASSERT_EQ(e.taylor.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(e.taylor[i], d.taylor[i]);
  try {
    domain_map_from_json(json::parse(R"({"taylor": [[1.0]]})"));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kParseError);
  }
}

TEST(MatrixJson, Layout) {
  const OperatorMatrix m = assemble_fourier(WeightFunction::constant(1.0), 2, FourierOperator::kDA);
  const json j = matrix_to_json(m);
  EXPECT_EQ(j["basis"], "fourier");
  EXPECT_EQ(j["M"], 2);
  ASSERT_EQ(j["rows"].size(), 5u);
  EXPECT_EQ(j["rows"][0][0], json::array({-2.0, 0.0}));
  EXPECT_EQ(j["rows"][4][4], json::array({2.0, 0.0}));
}

TEST(SpectrumCsv, Disk) {
  std::ostringstream out;
  write_spectrum_csv(out, steklov_spectrum(WeightFunction::constant(1.0), 16));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,lambda,reference,delta");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 9);
  const json j = spectrum_to_json(steklov_spectrum(WeightFunction::constant(1.0), 16));
  EXPECT_EQ(j["values"].size(), 9u);
  EXPECT_EQ(j["trusted"], 8);
}

TEST(ZetaCurveCsv, Layout) {
  const ZetaCurve c = psi_curve(WeightFunction::constant(1.0), {0.0, 1.0, 2.0}, 16);
  std::ostringstream out;
  write_zeta_curve_csv(out, c);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "s,psi_phi,psi_pair,gap");
  const json j = zeta_curve_to_json(c);
  EXPECT_EQ(j["s"].size(), 3u);
  EXPECT_EQ(j["monotone"], true);
}

TEST(InvariantReportJson, Layout) {
  const json j = invariant_report_to_json(estimate_residuals(gallery("cosine(0.5,2)"), 1));
  EXPECT_EQ(j["k"], 1);
  EXPECT_EQ(j["M"], 2);
  EXPECT_NEAR(j["Z_k"].get<double>(), 0.25, 1e-15);
  EXPECT_NEAR(j["edward"].get<double>(), 0.25, 1e-15);
  EXPECT_NEAR(j["ratios"]["power"].get<double>(), 0.5, 1e-14);
  EXPECT_GT(j["budget_used"].get<std::uint64_t>(), 0u);
  const json k = invariant_report_to_json(estimate_residuals(WeightFunction::constant(1.0), 2));
  EXPECT_TRUE(k["edward"].is_null());
  EXPECT_TRUE(k["ratios"]["power"].is_null());
}

TEST(Files, WriteAndRead) {
  const auto dir = scratch_dir();
  const std::string path = (dir / "nested" / "w.json").string();
  write_text_file(path, weight_to_json(gallery("moebius(0.5,0)")).dump(2));
  const WeightFunction a = weight_from_json(read_json_file(path));
  EXPECT_NEAR(a.coefficient(0).real(), 5.0 / 3.0, 1e-13);
  write_text_file((dir / "bad.json").string(), "{not json");
  try {
    read_json_file((dir / "bad.json").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
  EXPECT_THROW(read_json_file((dir / "missing.json").string()), Error);
  std::filesystem::remove_all(dir);
}
