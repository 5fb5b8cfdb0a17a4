#include "steklov/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "steklov/conformal.hpp"
#include "steklov/errors.hpp"
#include "steklov/serialization.hpp"
#include "steklov/steklov_spectral.hpp"
#include "steklov/zeta_engine.hpp"

namespace steklov {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Tolerances of the verification battery.
constexpr double kInequalitySlack = 1e-9;
constexpr double kAsymptoticTolerance = 1e-8;
constexpr int kAsymptoticIndex = 30;
constexpr double kPsiZeroTolerance = 1e-9;
constexpr double kPsiSignSlack = 1e-9;
constexpr double kMonotoneSlack = 1e-9;
constexpr double kEstimatorAgreement = 1e-6;
constexpr double kSandwichSlack = 1e-8;
constexpr double kRayleighSlack = 1e-9;
constexpr int kRayleighWindow = 32;
constexpr double kTrivialSpectrumTolerance = 1e-6;
constexpr double kTrivialPsiTolerance = 1e-7;
constexpr double kTrivialInvariantTolerance = 1e-10;
constexpr double kInvariantSignSlack = 1e-10;
constexpr double kEdwardRelative = 1e-12;
constexpr double kTraceConsistency = 1e-6;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigError, what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fnv_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

class CheckList {
 public:
  CheckList(std::string weight, const WeightFunction& a) : weight_(std::move(weight)), a_(a) {}

  void add(const std::string& check, bool ok, double margin, std::string detail = {},
           CheckStatus failing = CheckStatus::kFail) {
    CheckRecord r;
    r.weight = weight_;
    r.check = check;
    r.status = ok ? CheckStatus::kPass : failing;
    r.margin = margin;
    r.detail = std::move(detail);
    if (r.status == CheckStatus::kFail) r.reproduction = weight_to_json(a_);
    records_.push_back(std::move(r));
  }

  /// Runs `body`, turning module errors into a single record for `check`.
  template <class F>
  void guarded(const std::string& check, F&& body) {
    try {
      body();
    } catch (const Error& e) {
      const bool soft = e.code() == ErrorCode::kBudgetExceeded ||
                        e.code() == ErrorCode::kNoWitness;
      add(check, false, kNaN, e.what(), soft ? CheckStatus::kWarn : CheckStatus::kFail);
    } catch (const std::exception& e) {
      add(check, false, kNaN, e.what());
    }
  }

  std::vector<CheckRecord> take() { return std::move(records_); }

 private:
  std::string weight_;
  const WeightFunction& a_;
  std::vector<CheckRecord> records_;
};

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(6) << v;
  return out.str();
}

std::vector<double> with_zero(std::vector<double> grid) {
  grid.push_back(0.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double psi_at(const TraceEvaluator& ev, const ZetaCurve& curve, double s) {
  for (std::size_t i = 0; i < curve.s_grid.size(); ++i) {
    if (curve.s_grid[i] == s) return curve.psi_phi[i];
  }
  return ev.trace(s, TraceEstimator::kPhiTrace).value;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (count < 1) config_error("count must be positive");
  if (M < 1) config_error("M must be positive");
  if (M_big < 8) config_error("M_big must be at least 8");
  if (M_big < 4 * M) config_error("M_big must be at least 4 M");
  if (!(rho > 0.0 && rho < 1.0)) config_error("rho must lie in (0, 1)");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) config_error("sigma must be finite and >= 0");
  if (budget == 0) config_error("budget must be positive");
  for (const auto* grid : {&s_grid, &t_grid, &scan_s_grid}) {
    if (!std::is_sorted(grid->begin(), grid->end())) config_error("grids must be sorted ascending");
    for (double s : *grid) {
      if (!(s >= 0.0 && s <= kMaxTracePower)) config_error("grid values must lie in [0, 6]");
    }
  }
  if (!t_grid.empty() && t_grid.front() < 1.0) config_error("t grid must start at 1 or above");
  for (int k : k_list) {
    if (k < 1) config_error("k_list entries must be positive");
  }
  if (family.empty()) config_error("family must not be empty");
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"seed", seed},
          {"count", count},
          {"M", M},
          {"M_big", M_big},
          {"s_grid", s_grid},
          {"t_grid", t_grid},
          {"k_list", k_list},
          {"family", family},
          {"sigma", sigma},
          {"rho", rho},
          {"budget", budget},
          {"out_dir", out_dir},
          {"counterexample_threshold", counterexample_threshold},
          {"scan_s_grid", scan_s_grid},
          {"scan_psi", scan_psi}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "count") c.count = value.get<int>();
      else if (key == "M") c.M = value.get<int>();
      else if (key == "M_big") c.M_big = value.get<int>();
      else if (key == "s_grid") c.s_grid = value.get<std::vector<double>>();
      else if (key == "t_grid") c.t_grid = value.get<std::vector<double>>();
      else if (key == "k_list") c.k_list = value.get<std::vector<int>>();
      else if (key == "family") c.family = value.get<std::string>();
      else if (key == "sigma") c.sigma = value.get<double>();
      else if (key == "rho") c.rho = value.get<double>();
      else if (key == "budget") c.budget = value.get<std::uint64_t>();
      else if (key == "out_dir") c.out_dir = value.get<std::string>();
      else if (key == "counterexample_threshold") c.counterexample_threshold = value.get<double>();
      else if (key == "scan_s_grid") c.scan_s_grid = value.get<std::vector<double>>();
      else if (key == "scan_psi") c.scan_psi = value.get<bool>();
      else config_error("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(e.what());
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::hash() const { return fnv_hex(to_json().dump()); }

WeightFunction random_weight(std::uint64_t seed, int M, double sigma, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) config_error("rho must lie in (0, 1)");
  if (M < 1) config_error("M must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FourierSeries s(M);
  s.set(0, 1.0);
  for (int n = 1; n <= M; ++n) {
    const double g = normal(gen);
    const double h = normal(gen);
    const Complex c = sigma * std::pow(rho, n) * Complex(g, h);
    s.set(n, c);
    s.set(-n, std::conj(c));
  }
  std::ostringstream meta;
  meta << std::setprecision(17) << "random(seed=" << seed << ",M=" << M << ",sigma=" << sigma
       << ",rho=" << rho << ")";

  const GridSampling g = to_samples(s, positivity_grid_size(M));
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& v : g.values) lowest = std::min(lowest, v.real());
  if (lowest <= 0.05) {
    const double factor = 0.9 / (1.0 - lowest);
    for (int n = 1; n <= M; ++n) {
      s.set(n, factor * s.coefficient(n));
      s.set(-n, factor * s.coefficient(-n));
    }
    meta << ";repaired(scale=" << factor << ")";
  }
  return WeightFunction(std::move(s), meta.str());
}

WeightFunction resolve_weight(const std::string& spec) {
  const std::string text = trim(spec);
  std::error_code ec;
  if (std::filesystem::is_regular_file(text, ec)) {
    const nlohmann::json j = read_json_file(text);
    if (j.contains("weight")) return weight_from_json(j["weight"]);
    if (j.contains("taylor")) return weight_from_map(domain_map_from_json(j)).weight;
    return weight_from_json(j);
  }
  if (text.rfind("random(", 0) == 0 && text.back() == ')') {
    const auto args = split(text.substr(7, text.size() - 8), ',');
    if (args.size() != 2 && args.size() != 4) {
      throw Error(ErrorCode::kUnknownGallery, "random(seed, M[, sigma, rho]) expected");
    }
    try {
      const std::uint64_t seed = std::stoull(args[0]);
      const int m = std::stoi(args[1]);
      const double sigma = args.size() == 4 ? std::stod(args[2]) : ExperimentConfig{}.sigma;
      const double rho = args.size() == 4 ? std::stod(args[3]) : ExperimentConfig{}.rho;
      return random_weight(seed, m, sigma, rho);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kUnknownGallery, "cannot parse '" + text + "'");
    }
  }
  return gallery(text);
}

std::vector<std::string> default_gallery() {
  return {"disk", "moebius(0.5,0)", "moebius(0.3,-0.2,1.1)", "cosine(0.5,1)",
          "cosine(0.5,2)", "perturbed_disk(0.1,3)"};
}

std::vector<std::pair<std::string, WeightFunction>> family_weights(const ExperimentConfig& c) {
  std::vector<std::pair<std::string, WeightFunction>> out;
  if (c.family == "random") {
    for (int i = 0; i < c.count; ++i) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
      std::ostringstream label;
      label << "random(" << seed << "," << c.M << ")";
      out.emplace_back(label.str(), random_weight(seed, c.M, c.sigma, c.rho));
    }
    return out;
  }
  const auto specs = c.family == "gallery" ? default_gallery() : split(c.family, ';');
  for (const auto& s : specs) out.emplace_back(s, resolve_weight(s));
  return out;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "fail";
    case CheckStatus::kWarn: return "warn";
  }
  return "unknown";
}

int ResultRecord::count(CheckStatus s) const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(),
                                        [s](const CheckRecord& r) { return r.status == s; }));
}

nlohmann::json ResultRecord::to_json(bool with_timing) const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : checks) {
    nlohmann::json item = {{"weight", r.weight},
                           {"check", r.check},
                           {"status", to_string(r.status)},
                           {"margin", number_or_null(r.margin)},
                           {"detail", r.detail}};
    if (r.reproduction) item["reproduction"] = *r.reproduction;
    list.push_back(std::move(item));
  }
  nlohmann::json out = {{"config_hash", config_hash},
                        {"summary",
                         {{"pass", count(CheckStatus::kPass)},
                          {"fail", count(CheckStatus::kFail)},
                          {"warn", count(CheckStatus::kWarn)}}},
                        {"checks", list},
                        {"artifacts", artifacts}};
  if (with_timing) out["wall_clock_seconds"] = wall_clock_seconds;
  return out;
}

namespace {

std::vector<CheckRecord> verify_impl(const std::string& label, const WeightFunction& a,
                                     const ExperimentConfig& c,
                                     std::optional<ZetaCurve>* curve_out) {
  CheckList out(label, a);

  std::optional<SteklovSpectrum> spectrum;
  out.guarded("spectrum", [&] {
    spectrum = steklov_spectrum(a, c.M_big);
    const ClassicalInequalityReport rep = classical_inequality_report(*spectrum);
    out.add("weinstock", rep.weinstock_holds(kInequalitySlack), rep.weinstock_margin);
    out.add("hersch_payne_schiffer", rep.hps_holds(kInequalitySlack), rep.hps_min_margin,
            "worst k=" + std::to_string(rep.hps_worst_k));
    out.add("hps_product", rep.product_holds(kInequalitySlack), rep.product_min_margin,
            "worst k=" + std::to_string(rep.product_worst_k) +
                ",l=" + std::to_string(rep.product_worst_l));
    const AsymptoticResiduals res = asymptotic_residuals(*spectrum);
    if (static_cast<int>(res.residuals.size()) > kAsymptoticIndex) {
      const double d = std::abs(res.residuals[kAsymptoticIndex]);
      out.add("asymptotics", d < kAsymptoticTolerance, kAsymptoticTolerance - d,
              "log_slope=" + fmt(res.log_slope) + ",linear_slope=" + fmt(res.linear_slope),
              CheckStatus::kWarn);
    }
  });

  const WeightFunction normalized = normalize(a);
  std::optional<TraceEvaluator> ev;
  out.guarded("trace_setup", [&] { ev.emplace(normalized, c.M_big); });
  std::optional<ZetaCurve> curve;
  double defect = kNaN;
  if (ev) {
    out.guarded("psi_curve", [&] {
      curve = psi_curve(*ev, with_zero(c.s_grid));
      const double psi0 = curve->psi_phi[0];
      out.add("psi_zero", std::abs(psi0) <= kPsiZeroTolerance,
              kPsiZeroTolerance - std::abs(psi0));
      out.add("psi_nonnegative", curve->min_psi_s_ge_1 >= -kPsiSignSlack, curve->min_psi_s_ge_1);
      out.add("psi_monotone", curve->max_monotonicity_violation <= kMonotoneSlack,
              -curve->max_monotonicity_violation);
    });
    out.guarded("estimator_agreement", [&] {
      double worst = std::numeric_limits<double>::infinity();
      for (double s : {1.0, 2.0, 3.0}) {
        const double phi = ev->trace(s, TraceEstimator::kPhiTrace).value;
        double pair = 0.0;
        try {
          pair = ev->trace(s, TraceEstimator::kEigenPairing).value;
        } catch (const Error& e) {
          // The pairing needs a wider window than the phi trace for slowly
          // decaying residuals; not converging is not a disagreement.
          if (e.code() != ErrorCode::kEstimatorDivergence) throw;
          out.add("estimator_agreement", false, kNaN, e.what(), CheckStatus::kWarn);
          return;
        }
        worst = std::min(worst, kEstimatorAgreement * (1.0 + std::abs(phi)) - std::abs(phi - pair));
      }
      out.add("estimator_agreement", worst >= 0.0, worst);
    });
    out.guarded("sandwich", [&] {
      double worst = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (auto [t, s] : {std::pair{1.0, 2.0}, {1.0, 3.0}, {2.0, 4.0}}) {
        const SandwichTriple tr = sandwich_check(*ev, t, s);
        ok = ok && tr.ordered(kSandwichSlack);
        worst = std::min({worst, tr.upper - tr.middle, tr.middle - tr.lower});
      }
      out.add("sandwich", ok, worst);
    });
    out.guarded("rayleigh", [&] {
      const int window = std::min(kRayleighWindow, ev->trusted());
      const auto t1 = ev->mode_terms(1.0);
      double worst = std::numeric_limits<double>::infinity();
      for (int n = -window; n <= window; ++n) {
        worst = std::min(worst, t1[static_cast<std::size_t>(n + ev->trusted())]);
      }
      out.add("rayleigh_bound", worst >= -kRayleighSlack, worst);
      double chain = std::numeric_limits<double>::infinity();
      for (double s : {2.0, 3.0}) {
        const auto ts = ev->mode_terms(s);
        for (int n = -window; n <= window; ++n) {
          const std::size_t i = static_cast<std::size_t>(n + ev->trusted());
          const double lhs = ts[i] + mode_power(n, s);
          const double rhs = mode_power(n, s - 1.0) * (t1[i] + mode_power(n, 1.0));
          chain = std::min(chain, lhs - rhs + kRayleighSlack * (1.0 + mode_power(n, s)));
        }
      }
      out.add("rayleigh_chain", chain >= 0.0, chain);
    });
    out.guarded("conformal", [&] {
      defect = ev->galerkin().rayleigh(1, 1.0) - 1.0;
      if (defect < kConformalTrivialTolerance) {
        out.add("conformal_defect", true, kConformalTrivialTolerance - defect, "trivial");
        if (spectrum) {
          double worst = 0.0;
          for (int n = 0; n <= spectrum->trusted; ++n) {
            worst = std::max(worst, std::abs(spectrum->values[static_cast<std::size_t>(n)] -
                                             spectrum->scale() * disk_eigenvalue(n)));
          }
          out.add("trivial_spectrum", worst <= kTrivialSpectrumTolerance,
                  kTrivialSpectrumTolerance - worst);
        }
        double worst_psi = 0.0;
        for (double s : {1.0, 2.0, 3.0}) {
          worst_psi = std::max(worst_psi, std::abs(ev->trace(s, TraceEstimator::kPhiTrace).value));
        }
        out.add("trivial_psi", worst_psi < kTrivialPsiTolerance, kTrivialPsiTolerance - worst_psi);
      } else {
        const GrowthCertificate cert = growth_certificate(*ev, c.t_grid);
        out.add("growth_certificate", cert.verified(),
                std::min(cert.min_exponential_margin, cert.min_increment_margin),
                "n0=" + std::to_string(cert.witness) + ",defect=" + fmt(cert.defect));
      }
    });
  }

  for (int k : c.k_list) {
    const std::string tag = "Z_" + std::to_string(k);
    out.guarded(tag, [&] {
      const InvariantReport r = estimate_residuals(a, k, c.budget);
      out.add(tag + "_nonnegative", r.z_k >= -kInvariantSignSlack, r.z_k);
      if (r.edward) {
        const double tol = kEdwardRelative * std::max(1.0, std::abs(*r.edward));
        out.add(tag + "_edward", std::abs(r.z_k - *r.edward) <= tol,
                tol - std::abs(r.z_k - *r.edward));
      }
      if (defect < kConformalTrivialTolerance) {
        out.add(tag + "_trivial", std::abs(r.z_k) <= kTrivialInvariantTolerance,
                kTrivialInvariantTolerance - std::abs(r.z_k));
      }
      if (ev && 2.0 * k <= kMaxTracePower) {
        out.guarded(tag + "_trace", [&] {
          const double psi = curve ? psi_at(*ev, *curve, 2.0 * k)
                                   : ev->trace(2.0 * k, TraceEstimator::kPhiTrace).value;
          const double lifted = psi * std::pow(kTwoPi / boundary_length(a), 2.0 * k);
          const double tol = kTraceConsistency * (1.0 + std::abs(r.z_k));
          out.add(tag + "_trace", std::abs(lifted - r.z_k) <= tol,
                  tol - std::abs(lifted - r.z_k));
        });
      }
    });
  }
  if (curve_out) *curve_out = std::move(curve);
  return out.take();
}

}  // namespace

std::vector<CheckRecord> verify_weight(const std::string& label, const WeightFunction& a,
                                       const ExperimentConfig& c) {
  return verify_impl(label, a, c, nullptr);
}

ResultRecord run_verify(const ExperimentConfig& c, bool write) {
  const auto start = std::chrono::steady_clock::now();
  c.validate();
  ResultRecord record;
  record.config_hash = c.hash();
  std::ostringstream psi_csv;
  psi_csv << "weight,s,psi_phi,psi_pair,gap\n" << std::setprecision(17);

  std::vector<std::pair<std::string, WeightFunction>> weights;
  try {
    weights = family_weights(c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigError || e.code() == ErrorCode::kUnknownGallery ||
        e.code() == ErrorCode::kParseError) {
      throw;
    }
    CheckRecord r;
    r.weight = c.family;
    r.check = "family";
    r.status = CheckStatus::kFail;
    r.margin = kNaN;
    r.detail = e.what();
    record.checks.push_back(std::move(r));
  }
  for (const auto& [label, a] : weights) {
    std::optional<ZetaCurve> curve;
    auto checks = verify_impl(label, a, c, &curve);
    record.checks.insert(record.checks.end(), checks.begin(), checks.end());
    if (curve) {
      for (std::size_t i = 0; i < curve->s_grid.size(); ++i) {
        psi_csv << csv_escape(label) << ',' << curve->s_grid[i] << ',' << curve->psi_phi[i]
                << ',' << curve->psi_pair[i] << ',' << curve->convergence_gap[i] << '\n';
      }
    }
  }

  if (write) {
    const std::filesystem::path dir(c.out_dir);
    std::ostringstream checks_csv;
    checks_csv << "weight,check,status,margin,detail\n" << std::setprecision(17);
    for (const auto& r : record.checks) {
      checks_csv << csv_escape(r.weight) << ',' << r.check << ',' << to_string(r.status) << ','
                 << r.margin << ',' << csv_escape(r.detail) << '\n';
    }
    write_text_file((dir / "checks.csv").string(), checks_csv.str());
    write_text_file((dir / "psi.csv").string(), psi_csv.str());
    record.artifacts = {(dir / "checks.csv").string(), (dir / "psi.csv").string(),
                        (dir / "verify.json").string()};
  }
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (write) {
    nlohmann::json j = record.to_json();
    j["config"] = c.to_json();
    write_text_file((std::filesystem::path(c.out_dir) / "verify.json").string(), j.dump(2));
  }
  return record;
}

unsigned worker_count() {
  if (const char* env = std::getenv("STEKLOV_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::logic_error&) {
    }
    config_error("STEKLOV_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct SeedOutcome {
  WeightFunction weight = WeightFunction::constant(1.0);
  std::vector<ScanRow> rows;
  std::vector<double> psi;  // on scan_s_grid, empty when disabled or failed
  std::vector<CheckRecord> checks;
};

SeedOutcome scan_seed(const ExperimentConfig& c, std::uint64_t seed) {
  SeedOutcome o;
  o.weight = random_weight(seed, c.M, c.sigma, c.rho);
  std::ostringstream label;
  label << "random(" << seed << "," << c.M << ")";
  CheckList checks(label.str(), o.weight);
  for (int k : c.k_list) {
    ScanRow row;
    row.seed = seed;
    row.k = k;
    try {
      const InvariantReport r = estimate_residuals(o.weight, k, c.budget);
      row.z_k = r.z_k;
      row.ratio_power = r.ratio_power;
      row.ratio_lifted = r.ratio_lifted;
      checks.add("Z_" + std::to_string(k) + "_scan", r.z_k >= c.counterexample_threshold, r.z_k,
                 {}, CheckStatus::kWarn);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBudgetExceeded) throw;
      row.skipped = true;
      row.z_k = kNaN;
      row.note = e.what();
      checks.add("Z_" + std::to_string(k) + "_scan", false, kNaN, e.what(), CheckStatus::kWarn);
    }
    o.rows.push_back(std::move(row));
  }
  if (c.scan_psi) {
    checks.guarded("psi_scan", [&] {
      const TraceEvaluator ev(normalize(o.weight), c.M_big);
      for (double s : c.scan_s_grid) o.psi.push_back(ev.trace(s, TraceEstimator::kPhiTrace).value);
      double lowest = std::numeric_limits<double>::infinity();
      for (double s : c.s_grid) {
        if (s >= 1.0) lowest = std::min(lowest, ev.trace(s, TraceEstimator::kPhiTrace).value);
      }
      if (std::isfinite(lowest)) {
        checks.add("psi_scan_nonnegative", lowest >= -kPsiSignSlack, lowest);
      }
    });
  }
  o.checks = checks.take();
  return o;
}

}  // namespace

ScanResult run_scan(const ExperimentConfig& c, bool write) {
  const auto start = std::chrono::steady_clock::now();
  c.validate();
  ScanResult result;
  result.record.config_hash = c.hash();

  const std::size_t n = static_cast<std::size_t>(c.count);
  std::vector<std::optional<SeedOutcome>> outcomes(n);
  std::vector<std::string> errors(n);
  const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(n));
  auto work = [&](unsigned id) {
    for (std::size_t i = id; i < n; i += workers) {
      try {
        outcomes[i] = scan_seed(c, c.seed + i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
  }

  // Single serialization point, in seed order.
  const std::filesystem::path dir(c.out_dir);
  result.min_z.assign(c.k_list.size(), kNaN);
  result.min_psi = std::numeric_limits<double>::infinity();
  std::ostringstream rows_csv, psi_csv;
  rows_csv << "seed,k,Z_k,ratio_power,ratio_lifted,skipped\n" << std::setprecision(17);
  psi_csv << "seed,s,psi\n" << std::setprecision(17);
  auto opt = [](const std::optional<double>& v) { return v ? *v : kNaN; };
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = c.seed + i;
    if (!outcomes[i]) {
      CheckRecord r;
      r.weight = "random(" + std::to_string(seed) + "," + std::to_string(c.M) + ")";
      r.check = "scan";
      r.status = CheckStatus::kFail;
      r.margin = kNaN;
      r.detail = errors[i];
      result.record.checks.push_back(std::move(r));
      continue;
    }
    const SeedOutcome& o = *outcomes[i];
    for (const auto& row : o.rows) {
      rows_csv << row.seed << ',' << row.k << ',' << row.z_k << ',' << opt(row.ratio_power) << ','
               << opt(row.ratio_lifted) << ',' << (row.skipped ? 1 : 0) << '\n';
      result.rows.push_back(row);
      if (row.skipped) continue;
      const auto ki = static_cast<std::size_t>(
          std::find(c.k_list.begin(), c.k_list.end(), row.k) - c.k_list.begin());
      if (!(result.min_z[ki] <= row.z_k)) result.min_z[ki] = row.z_k;
      if (row.z_k < c.counterexample_threshold && write) {
        const nlohmann::json bundle = {
            {"weight", weight_to_json(o.weight)},
            {"seed", seed},
            {"k", row.k},
            {"budget", c.budget},
            {"Z_k", row.z_k},
            {"sigma", c.sigma},
            {"rho", c.rho},
            {"M", c.M}};
        const auto path = (dir / ("counterexample_seed" + std::to_string(seed) + "_k" +
                                  std::to_string(row.k) + ".json"))
                              .string();
        write_text_file(path, bundle.dump(2));
        result.counterexamples.push_back(path);
      }
    }
    for (std::size_t j = 0; j < o.psi.size(); ++j) {
      psi_csv << seed << ',' << c.scan_s_grid[j] << ',' << o.psi[j] << '\n';
    }
    for (const auto& r : o.checks) {
      if (r.check == "psi_scan_nonnegative" && std::isfinite(r.margin)) {
        result.min_psi = std::min(result.min_psi, r.margin);
      }
      result.record.checks.push_back(r);
    }
  }
  if (!std::isfinite(result.min_psi)) result.min_psi = kNaN;

  if (write) {
    write_text_file((dir / "scan.csv").string(), rows_csv.str());
    result.record.artifacts.push_back((dir / "scan.csv").string());
    if (c.scan_psi) {
      write_text_file((dir / "scan_psi.csv").string(), psi_csv.str());
      result.record.artifacts.push_back((dir / "scan_psi.csv").string());
    }
    for (const auto& p : result.counterexamples) result.record.artifacts.push_back(p);
    result.record.artifacts.push_back((dir / "scan.json").string());
  }
  result.record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (write) {
    nlohmann::json j = result.record.to_json();
    j["config"] = c.to_json();
    nlohmann::json mins = nlohmann::json::object();
    for (std::size_t i = 0; i < c.k_list.size(); ++i) {
      mins[std::to_string(c.k_list[i])] = number_or_null(result.min_z[i]);
    }
    j["min_Z"] = mins;
    j["min_psi"] = number_or_null(result.min_psi);
    write_text_file((dir / "scan.json").string(), j.dump(2));
  }
  return result;
}

double replay_counterexample(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  try {
    const WeightFunction a = weight_from_json(j.at("weight"));
    return zeta_invariant(a, j.at("k").get<int>(), j.value("budget", kDefaultTupleBudget));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

}  // namespace steklov
