#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>

#include "steklov/errors.hpp"
#include "steklov/harness.hpp"
#include "steklov/serialization.hpp"

using namespace steklov;

namespace {

std::filesystem::path scratch_dir() {
  const auto p = std::filesystem::temp_directory_path() /
                 (std::string("steklov_harness_") +
                  ::testing::UnitTest::GetInstance()->current_test_info()->name());
  std::filesystem::remove_all(p);
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kParseError;
}

const CheckRecord* find_check(const std::vector<CheckRecord>& v, const std::string& name) {
  for (const auto& r : v) {
    if (r.check == name) return &r;
  }
  return nullptr;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STEKLOV_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig small_config(const std::filesystem::path& out) {
  ExperimentConfig c;
  c.M = 4;
  c.M_big = 64;
  c.count = 3;
  c.k_list = {1, 2};
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST(Config, DefaultsValidate) {
  EXPECT_NO_THROW(ExperimentConfig{}.validate());
}

TEST(Config, Rejections) {
  auto bad = [](const std::function<void(ExperimentConfig&)>& edit) {
    ExperimentConfig c;
    edit(c);
    return code_of([&] { c.validate(); });
  };
  EXPECT_EQ(bad([](auto& c) { c.count = 0; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.M = 0; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.M_big = 16; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.rho = 1.0; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.sigma = -0.1; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.budget = 0; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.s_grid = {2.0, 1.0}; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.s_grid = {1.0, 7.0}; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.t_grid = {0.5, 1.0}; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.k_list = {0}; }), ErrorCode::kConfigError);
  EXPECT_EQ(bad([](auto& c) { c.family.clear(); }), ErrorCode::kConfigError);
}

TEST(Config, JsonRoundTripAndHash) {
  ExperimentConfig c;
  c.seed = 17;
  c.family = "gallery";
  c.k_list = {1, 2, 3};
  const ExperimentConfig d = ExperimentConfig::from_json(json::parse(c.to_json().dump()));
  EXPECT_EQ(d.to_json(), c.to_json());
  EXPECT_EQ(d.hash(), c.hash());
  EXPECT_EQ(c.hash().size(), 16u);
  d.validate();
  ExperimentConfig e = c;
  e.seed = 18;
  EXPECT_NE(e.hash(), c.hash());
}

TEST(Config, FromJsonPartialAndUnknown) {
  const ExperimentConfig c = ExperimentConfig::from_json(json::parse(R"({"seed": 5, "M": 6})"));
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.M, 6);
  EXPECT_EQ(c.count, ExperimentConfig{}.count);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json::parse(R"({"sede": 5})")); }), ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json::parse(R"({"seed": "x"})")); }), ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { ExperimentConfig::from_json(json::parse(R"({"count": -1})")); }), ErrorCode::kConfigError);
}

TEST(RandomWeight, Deterministic) {
  const WeightFunction a = random_weight(7, 8, 0.2, 0.5);
  const WeightFunction b = random_weight(7, 8, 0.2, 0.5);
  const WeightFunction c = random_weight(8, 8, 0.2, 0.5);
  for (int n = -8; n <= 8; ++n) EXPECT_EQ(a.coefficient(n), b.coefficient(n));
  EXPECT_NE(a.coefficient(1), c.coefficient(1));
  EXPECT_EQ(a.coefficient(0), Complex(1.0));
  EXPECT_LT(a.series().hermitian_defect(), 1e-16);
}

TEST(RandomWeight, ZeroSigmaIsConstant) {
  const WeightFunction a = random_weight(3, 6, 0.0, 0.5);
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(a.coefficient(n), Complex{});
}

TEST(RandomWeight, RepairKeepsPositivity) {
  int repaired = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const WeightFunction a = random_weight(seed, 6, 1.5, 0.8);
    EXPECT_GE(a.min_value(), 0.05 - 1e-12) << seed;
    if (a.meta().find("repaired") != std::string::npos) {
      ++repaired;
      EXPECT_NEAR(a.min_value(), 0.1, 1e-3) << seed;
    }
  }
  EXPECT_GT(repaired, 0);
}

TEST(ResolveWeight, Specs) {
  EXPECT_EQ(resolve_weight("random(4,3)").order(), 3);
  EXPECT_EQ(resolve_weight("random(4, 3, 0.1, 0.4)").coefficient(1), random_weight(4, 3, 0.1, 0.4).coefficient(1));
  EXPECT_EQ(resolve_weight("cosine(0.5,2)").order(), 2);
  EXPECT_EQ(code_of([] { resolve_weight("random(4)"); }), ErrorCode::kUnknownGallery);
  EXPECT_EQ(code_of([] { resolve_weight("nothing"); }), ErrorCode::kUnknownGallery);
}

TEST(ResolveWeight, Files) {
  const auto dir = scratch_dir();
  const WeightFunction a = random_weight(9, 4, 0.2, 0.5);
  write_text_file((dir / "w.json").string(), weight_to_json(a).dump());
  write_text_file((dir / "d.json").string(), R"({"taylor": [[1.0, 0.0], [0.2, 0.0]], "name": "q"})");
  write_text_file((dir / "b.json").string(), json{{"weight", weight_to_json(a)}, {"k", 1}}.dump());
  EXPECT_EQ(resolve_weight((dir / "w.json").string()).coefficient(2), a.coefficient(2));
  EXPECT_NEAR(resolve_weight((dir / "d.json").string())(0.0), 1.0 / 1.2, 1e-14);
  EXPECT_EQ(resolve_weight((dir / "b.json").string()).coefficient(3), a.coefficient(3));
  std::filesystem::remove_all(dir);
}

TEST(FamilyWeights, Kinds) {
  ExperimentConfig c;
  c.count = 4;
  c.seed = 10;
  const auto random = family_weights(c);
  ASSERT_EQ(random.size(), 4u);
  EXPECT_EQ(random[2].first, "random(12,8)");
  c.family = "gallery";
  EXPECT_EQ(family_weights(c).size(), default_gallery().size());
  c.family = "disk; cosine(0.5,2)";
  const auto two = family_weights(c);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[1].first, "cosine(0.5,2)");
}

TEST(Verify, DiskPassesEverything) {
  ExperimentConfig c = small_config(scratch_dir());
  c.family = "disk";
  const ResultRecord r = run_verify(c, false);
  EXPECT_EQ(r.count(CheckStatus::kFail), 0);
  EXPECT_EQ(r.count(CheckStatus::kWarn), 0);
  EXPECT_EQ(r.exit_code(), 0);
  for (const char* name : {"weinstock", "trivial_spectrum", "trivial_psi", "Z_1_trivial", "Z_2_trivial", "psi_zero"}) {
    EXPECT_NE(find_check(r.checks, name), nullptr) << name;
  }
  EXPECT_NEAR(find_check(r.checks, "weinstock")->margin, 0.0, 1e-10);
}

TEST(Verify, MoebiusIsTrivial) {
  ExperimentConfig c = small_config(scratch_dir());
  c.M_big = 128;
  const auto checks = verify_weight("moebius", resolve_weight("moebius(0.5,0)"), c);
  for (const auto& r : checks) EXPECT_EQ(r.status, CheckStatus::kPass) << r.check << ' ' << r.detail;
  EXPECT_NE(find_check(checks, "trivial_spectrum"), nullptr);
  EXPECT_EQ(find_check(checks, "growth_certificate"), nullptr);
}

TEST(Verify, CosineUsesGrowthCertificate) {
  ExperimentConfig c = small_config(scratch_dir());
  c.M_big = 128;
  const auto checks = verify_weight("cosine", resolve_weight("cosine(0.5,2)"), c);
  for (const auto& r : checks) EXPECT_EQ(r.status, CheckStatus::kPass) << r.check << ' ' << r.detail;
  const CheckRecord* g = find_check(checks, "growth_certificate");
  ASSERT_NE(g, nullptr);
  EXPECT_NE(g->detail.find("n0=3"), std::string::npos) << g->detail;
}

TEST(Verify, RandomFamilyWritesArtifacts) {
  const auto dir = scratch_dir();
  const ExperimentConfig c = small_config(dir);
  const ResultRecord r = run_verify(c);
  EXPECT_EQ(r.count(CheckStatus::kFail), 0);
  for (const char* f : {"checks.csv", "psi.csv", "verify.json"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  const json j = read_json_file((dir / "verify.json").string());
  EXPECT_EQ(j["config_hash"], c.hash());
  EXPECT_EQ(j["summary"]["fail"], 0);
  std::filesystem::remove_all(dir);
}

TEST(Verify, DeterministicMargins) {
  const ExperimentConfig c = small_config(scratch_dir());
  const ResultRecord a = run_verify(c, false);
  const ResultRecord b = run_verify(c, false);
  EXPECT_EQ(a.to_json(false).dump(), b.to_json(false).dump());
}

TEST(Verify, NumericalFailureBecomesRecord) {
  ExperimentConfig c = small_config(scratch_dir());
  c.M = 2;
  c.M_big = 16;
  const auto checks = verify_weight("narrow", resolve_weight("perturbed_disk(0.1,3)"), c);
  int fails = 0;
  for (const auto& r : checks) {
    if (r.status == CheckStatus::kFail) {
      ++fails;
      ASSERT_TRUE(r.reproduction.has_value());
      EXPECT_EQ(weight_from_json(*r.reproduction).order(), resolve_weight("perturbed_disk(0.1,3)").order());
    }
  }
  EXPECT_GT(fails, 0);
}

TEST(Verify, BudgetExceededIsWarning) {
  ExperimentConfig c = small_config(scratch_dir());
  c.budget = 10;
  const auto checks = verify_weight("w", random_weight(1, 4, 0.2, 0.5), c);
  const CheckRecord* z2 = find_check(checks, "Z_2");
  ASSERT_NE(z2, nullptr);
  EXPECT_EQ(z2->status, CheckStatus::kWarn);
}

TEST(Scan, ZeroSigmaGivesZeros) {
  ExperimentConfig c = small_config(scratch_dir());
  c.sigma = 0.0;
  c.count = 4;
  const ScanResult r = run_scan(c, false);
  ASSERT_EQ(r.rows.size(), 8u);
  for (const auto& row : r.rows) EXPECT_EQ(row.z_k, 0.0);
  for (double z : r.min_z) EXPECT_EQ(z, 0.0);
  EXPECT_NEAR(r.min_psi, 0.0, 1e-12);
  EXPECT_TRUE(r.counterexamples.empty());
}

TEST(Scan, RowsInSeedOrderAndWorkerIndependent) {
  ExperimentConfig c = small_config(scratch_dir());
  c.count = 6;
  c.scan_psi = false;
  setenv("STEKLOV_WORKERS", "1", 1);
  const ScanResult one = run_scan(c, false);
  setenv("STEKLOV_WORKERS", "4", 1);
  const ScanResult four = run_scan(c, false);
  unsetenv("STEKLOV_WORKERS");
  ASSERT_EQ(one.rows.size(), four.rows.size());
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    EXPECT_EQ(one.rows[i].seed, c.seed + i / 2);
    EXPECT_EQ(one.rows[i].seed, four.rows[i].seed);
    EXPECT_EQ(one.rows[i].z_k, four.rows[i].z_k);
  }
  EXPECT_EQ(one.record.to_json(false).dump(), four.record.to_json(false).dump());
}

TEST(Scan, InvalidWorkerCount) {
  setenv("STEKLOV_WORKERS", "zero", 1);
  EXPECT_EQ(code_of([] { worker_count(); }), ErrorCode::kConfigError);
  setenv("STEKLOV_WORKERS", "0", 1);
  EXPECT_EQ(code_of([] { worker_count(); }), ErrorCode::kConfigError);
  unsetenv("STEKLOV_WORKERS");
  EXPECT_GE(worker_count(), 1u);
}

TEST(Scan, BudgetSkipsRows) {
  ExperimentConfig c = small_config(scratch_dir());
  c.budget = 100;
  c.scan_psi = false;
  const ScanResult r = run_scan(c, false);
  for (const auto& row : r.rows) EXPECT_EQ(row.skipped, row.k == 2);
  EXPECT_TRUE(std::isnan(r.min_z[1]));
  EXPECT_EQ(r.record.count(CheckStatus::kFail), 0);
}

TEST(Scan, CounterexampleBundlesReplay) {
  // A threshold above every value forces a bundle per row.
  const auto dir = scratch_dir();
  ExperimentConfig c = small_config(dir);
  c.counterexample_threshold = 1e9;
  c.scan_psi = false;
  const ScanResult r = run_scan(c);
  ASSERT_EQ(r.counterexamples.size(), r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_NEAR(replay_counterexample(r.counterexamples[i]), r.rows[i].z_k, 1e-12 * (1.0 + std::abs(r.rows[i].z_k)));
  }
  for (const char* f : {"scan.csv", "scan.json"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::filesystem::remove_all(dir);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir();
  std::filesystem::create_directories(dir);
  const std::string out = (dir / "x").string();
  EXPECT_EQ(run_cli("gallery"), 0);
  EXPECT_EQ(run_cli("gallery 'moebius(0.5,0)' --out " + out + ".json"), 0);
  EXPECT_EQ(run_cli("spectrum --weight disk --M-big 32 --out " + out + ".csv"), 0);
  EXPECT_EQ(run_cli("spectrum --weight 'cosine(0.5,2)' --M-big 32 --format json --out " + out + "s.json"), 0);
  EXPECT_EQ(run_cli("zeta --weight disk --M-big 32 --s 0,1,2 --x -1,2 --out " + out + "z.csv"), 0);
  EXPECT_EQ(run_cli("invariants --weight 'cosine(0.5,2)' --k 1,2 --format json --out " + out + "i.json"), 0);
  EXPECT_EQ(run_cli("verify --family disk --M 4 --M-big 32 --out " + out + "v"), 0);
  EXPECT_EQ(run_cli("verify --family 'perturbed_disk(0.1,3)' --M 2 --M-big 16 --out " + out + "f"), 1);
  EXPECT_EQ(run_cli("scan --count 2 --M 3 --M-big 32 --k 1 --out " + out + "s"), 0);
  EXPECT_EQ(run_cli("spectrum --weight nonsense"), 2);
  EXPECT_EQ(run_cli("verify --count 0"), 2);
  EXPECT_EQ(run_cli("verify --config " + out + "missing.json"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("zeta --x 0.5"), 2);

  const json inv = read_json_file(out + "i.json");
  EXPECT_NEAR(inv[0]["Z_k"].get<double>(), 0.25, 1e-15);
  std::ifstream csv(out + ".csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "n,lambda,reference,delta");
  std::filesystem::remove_all(dir);
}

TEST(Cli, ConfigFile) {
  const auto dir = scratch_dir();
  const std::string cfg = (dir / "cfg.json").string();
  write_text_file(cfg, R"({"family": "disk", "M": 2, "M_big": 32, "k_list": [1]})");
  EXPECT_EQ(run_cli("verify --config " + cfg + " --out " + (dir / "o").string()), 0);
  const json j = read_json_file((dir / "o" / "verify.json").string());
  EXPECT_EQ(j["config"]["family"], "disk");
  write_text_file(cfg, R"({"famly": "disk"})");
  EXPECT_EQ(run_cli("verify --config " + cfg), 2);
  std::filesystem::remove_all(dir);
}
