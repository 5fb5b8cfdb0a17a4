#pragma once

// Experiment configuration, seeded random weights, the verification battery
// and the invariant scan.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "steklov/circle_fourier.hpp"
#include "steklov/zeta_invariants.hpp"

namespace steklov {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int count = 10;
  int M = 8;
  int M_big = 128;
  std::vector<double> s_grid = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0};
  std::vector<double> t_grid = {1.0, 2.0, 3.0, 4.0};
  std::vector<int> k_list = {1, 2};
  /// "random", "gallery" (the default set), or gallery specs joined by ';'.
  std::string family = "random";
  double sigma = 0.2;
  double rho = 0.5;
  std::uint64_t budget = kDefaultTupleBudget;
  std::string out_dir = "results";
  /// Scan: Z_k below this emits a counterexample bundle.
  double counterexample_threshold = -1e-8;
  /// Scan: psi samples on [0, 1).
  std::vector<double> scan_s_grid = {0.0, 0.25, 0.5, 0.75};
  bool scan_psi = true;

  /// Throws kConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static ExperimentConfig from_json(const nlohmann::json& j);
  /// FNV-1a of the canonical JSON dump, as 16 hex digits.
  std::string hash() const;
};

/// a_0 = 1, a_n = sigma rho^n (g_n + i h_n) for 1 <= n <= M, Hermitian
/// completion. A minimum sample <= 0.05 triggers a rescale of the deviation
/// so that the minimum becomes 0.1; the factor is recorded in meta.
WeightFunction random_weight(std::uint64_t seed, int M, double sigma, double rho);

/// Accepts a weight JSON file, a domain-map JSON file, a counterexample
/// bundle, random(seed, M[, sigma, rho]) or a gallery spec.
WeightFunction resolve_weight(const std::string& spec);

/// Labelled weights for a config family.
std::vector<std::pair<std::string, WeightFunction>> family_weights(const ExperimentConfig& c);

/// The default gallery used by family = "gallery".
std::vector<std::string> default_gallery();

enum class CheckStatus { kPass, kFail, kWarn };
std::string to_string(CheckStatus s);

struct CheckRecord {
  std::string weight;
  std::string check;
  CheckStatus status = CheckStatus::kPass;
  /// Positive means satisfied with room to spare; NaN when not applicable.
  double margin = 0.0;
  std::string detail;
  /// Serialized weight for fail records.
  std::optional<nlohmann::json> reproduction;
};

struct ResultRecord {
  std::string config_hash;
  std::vector<CheckRecord> checks;
  std::vector<std::string> artifacts;
  double wall_clock_seconds = 0.0;

  int count(CheckStatus s) const;
  bool any_fail() const { return count(CheckStatus::kFail) > 0; }
  int exit_code() const { return any_fail() ? 1 : 0; }
  /// Deterministic part only (no wall clock) when `with_timing` is false.
  nlohmann::json to_json(bool with_timing = true) const;
};

/// Full check battery on one weight, no file output.
std::vector<CheckRecord> verify_weight(const std::string& label, const WeightFunction& a,
                                       const ExperimentConfig& c);

/// verify_weight over the family; writes checks.csv, psi.csv and
/// verify.json under out_dir when `write` is set.
ResultRecord run_verify(const ExperimentConfig& c, bool write = true);

struct ScanRow {
  std::uint64_t seed = 0;
  int k = 0;
  double z_k = 0.0;
  std::optional<double> ratio_power;
  std::optional<double> ratio_lifted;
  bool skipped = false;
  std::string note;
};

struct ScanResult {
  ResultRecord record;
  std::vector<ScanRow> rows;
  /// Per k in k_list; NaN when every seed was skipped.
  std::vector<double> min_z;
  double min_psi = 0.0;
  std::vector<std::string> counterexamples;
};

/// Random weights seed .. seed+count-1. Worker count from STEKLOV_WORKERS
/// (default: hardware concurrency). Rows are ordered by seed, then k.
ScanResult run_scan(const ExperimentConfig& c, bool write = true);

/// Recomputes Z_k from a counterexample bundle.
double replay_counterexample(const std::string& path);

unsigned worker_count();

}  // namespace steklov
