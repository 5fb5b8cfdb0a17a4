#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steklov/conformal.hpp"
#include "steklov/errors.hpp"
#include "steklov/harness.hpp"
#include "steklov/serialization.hpp"
#include "steklov/steklov_spectral.hpp"
#include "steklov/zeta_engine.hpp"
#include "steklov/zeta_invariants.hpp"

namespace {

using namespace steklov;

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

struct Common {
  std::string weight = "disk";
  int m_big = 128;
  std::string out;
  std::string format = "csv";
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(c.out, text);
  }
}

void add_common(CLI::App* cmd, Common& c, bool with_weight) {
  if (with_weight) {
    cmd->add_option("--weight", c.weight, "weight JSON, domain-map JSON, bundle, or gallery spec")
        ->capture_default_str();
  }
  cmd->add_option("--M-big", c.m_big, "Galerkin order")->capture_default_str();
  cmd->add_option("--out", c.out, "output file (stdout when empty)");
  cmd->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kConfigError, "cannot parse list '" + text + "'");
    }
  }
  return out;
}

int cmd_spectrum(const Common& c) {
  const WeightFunction a = resolve_weight(c.weight);
  const SteklovSpectrum sp = steklov_spectrum(a, c.m_big);
  if (c.format == "json") {
    json j = spectrum_to_json(sp);
    const AsymptoticResiduals r = asymptotic_residuals(sp);
    j["residuals"] = r.residuals;
    j["log_slope"] = std::isfinite(r.log_slope) ? json(r.log_slope) : json(nullptr);
    j["linear_slope"] = std::isfinite(r.linear_slope) ? json(r.linear_slope) : json(nullptr);
    emit(c, j.dump(2) + "\n");
  } else {
    std::ostringstream out;
    write_spectrum_csv(out, sp);
    emit(c, out.str());
  }
  return 0;
}

int cmd_zeta(const Common& c, const std::string& s_list, const std::string& x_list) {
  const WeightFunction a = resolve_weight(c.weight);
  const ZetaCurve curve = psi_curve(normalize(a), parse_list(s_list), c.m_big);
  std::vector<std::pair<double, double>> zeta_values;
  if (!x_list.empty()) {
    for (double x : parse_list(x_list)) zeta_values.emplace_back(x, zeta_a(a, x, c.m_big));
  }
  if (c.format == "json") {
    json j = zeta_curve_to_json(curve);
    json z = json::array();
    for (auto [x, v] : zeta_values) z.push_back({{"x", x}, {"zeta_a", v}});
    j["zeta_a"] = z;
    emit(c, j.dump(2) + "\n");
  } else {
    std::ostringstream out;
    write_zeta_curve_csv(out, curve);
    if (!zeta_values.empty()) {
      out << "\nx,zeta_a\n" << std::setprecision(17);
      for (auto [x, v] : zeta_values) out << x << ',' << v << '\n';
    }
    emit(c, out.str());
  }
  return 0;
}

int cmd_invariants(const Common& c, const std::vector<int>& ks, std::uint64_t budget) {
  const WeightFunction a = resolve_weight(c.weight);
  json reports = json::array();
  std::ostringstream csv;
  csv << "k,M,Z_k,edward,ratio_power,ratio_lifted,budget_used\n" << std::setprecision(17);
  auto opt = [](const std::optional<double>& v) {
    std::ostringstream s;
    s << std::setprecision(17);
    if (v) s << *v;
    return s.str();
  };
  for (int k : ks) {
    const InvariantReport r = estimate_residuals(a, k, budget);
    reports.push_back(invariant_report_to_json(r));
    csv << r.k << ',' << r.order << ',' << r.z_k << ',' << opt(r.edward) << ','
        << opt(r.ratio_power) << ',' << opt(r.ratio_lifted) << ',' << r.lattice_size << '\n';
  }
  emit(c, c.format == "json" ? reports.dump(2) + "\n" : csv.str());
  return 0;
}

int print_record(const ResultRecord& r) {
  std::cout << "config " << r.config_hash << ": " << r.count(CheckStatus::kPass) << " pass, "
            << r.count(CheckStatus::kWarn) << " warn, " << r.count(CheckStatus::kFail)
            << " fail (" << std::fixed << std::setprecision(1) << r.wall_clock_seconds << " s)\n";
  for (const auto& chk : r.checks) {
    if (chk.status == CheckStatus::kPass) continue;
    std::cout << "  " << to_string(chk.status) << "  " << chk.weight << "  " << chk.check;
    if (!chk.detail.empty()) std::cout << "  " << chk.detail;
    std::cout << '\n';
  }
  for (const auto& p : r.artifacts) std::cout << "  wrote " << p << '\n';
  return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Steklov spectra, zeta functions and zeta-invariants on the circle"};
  app.require_subcommand(1);

  Common common;
  std::string s_list = "0,1,2,3,4,5";
  std::string x_list;
  std::vector<int> ks = {1, 2};
  std::uint64_t budget = kDefaultTupleBudget;

  auto* spectrum = app.add_subcommand("spectrum", "Steklov eigenvalues and asymptotic residuals");
  add_common(spectrum, common, true);

  auto* zeta = app.add_subcommand("zeta", "psi(s) curve of the normalized weight, optional zeta_a(x)");
  add_common(zeta, common, true);
  zeta->add_option("--s", s_list, "comma-separated sorted s grid in [0, 6]")->capture_default_str();
  zeta->add_option("--x", x_list, "comma-separated points for zeta_a (x > 1 or x <= 0)");

  auto* invariants = app.add_subcommand("invariants", "zeta-invariants Z_k and growth ratios");
  add_common(invariants, common, true);
  invariants->add_option("--k", ks, "invariant orders")->delimiter(',')->capture_default_str();
  invariants->add_option("--budget", budget, "tuple-evaluation cap")->capture_default_str();

  ExperimentConfig config;
  std::string config_path;
  std::string family;
  std::uint64_t seed = config.seed;
  int count = config.count;
  int order = config.M;
  std::string out_dir;
  auto add_experiment = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config");
    cmd->add_option("--family", family, "random, gallery, or gallery specs joined by ';'");
    cmd->add_option("--seed", seed, "first seed");
    cmd->add_option("--count", count, "number of random weights");
    cmd->add_option("--M", order, "order of random weights");
    cmd->add_option("--M-big", common.m_big, "Galerkin order");
    cmd->add_option("--k", ks, "invariant orders")->delimiter(',');
    cmd->add_option("--budget", budget, "tuple-evaluation cap");
    cmd->add_option("--out", out_dir, "output directory");
  };
  auto* verify = app.add_subcommand("verify", "run the verification battery");
  add_experiment(verify);
  auto* scan = app.add_subcommand("scan", "scan random weights for negative zeta-invariants");
  add_experiment(scan);

  std::string gallery_spec;
  auto* gal = app.add_subcommand("gallery", "list gallery weights or dump one as JSON");
  gal->add_option("spec", gallery_spec, "gallery spec, e.g. moebius(0.5,0)");
  gal->add_option("--out", common.out, "output file (stdout when empty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*spectrum) return cmd_spectrum(common);
    if (*zeta) return cmd_zeta(common, s_list, x_list);
    if (*invariants) return cmd_invariants(common, ks, budget);
    if (*gal) {
      if (gallery_spec.empty()) {
        for (const auto& name : gallery_names()) std::cout << name << '\n';
        return 0;
      }
      emit(common, weight_to_json(resolve_weight(gallery_spec)).dump(2) + "\n");
      return 0;
    }
    CLI::App* sub = *verify ? verify : scan;
    if (!config_path.empty()) config = ExperimentConfig::from_json(read_json_file(config_path));
    if (sub->count("--family")) config.family = family;
    if (sub->count("--seed")) config.seed = seed;
    if (sub->count("--count")) config.count = count;
    if (sub->count("--M")) config.M = order;
    if (sub->count("--M-big")) config.M_big = common.m_big;
    if (sub->count("--k")) config.k_list = ks;
    if (sub->count("--budget")) config.budget = budget;
    if (sub->count("--out")) config.out_dir = out_dir;
    config.validate();
    if (*verify) return print_record(run_verify(config));
    const ScanResult r = run_scan(config);
    for (std::size_t i = 0; i < config.k_list.size(); ++i) {
      std::cout << "min Z_" << config.k_list[i] << " = " << std::setprecision(17) << r.min_z[i]
                << '\n';
    }
    for (const auto& p : r.counterexamples) std::cout << "counterexample bundle " << p << '\n';
    return print_record(r.record);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::kConfigError:
      case ErrorCode::kParseError:
      case ErrorCode::kUnknownGallery:
      case ErrorCode::kUnsupportedArgument:
        return kExitConfig;
      default:
        return kExitFail;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
