#include "steklov/serialization.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

json complex_pair(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorCode::kParseError, "expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

FourierSeries parse_coefficients(const json& j, bool hermitian_completion) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array()) {
    throw Error(ErrorCode::kParseError, "weight JSON needs a \"coeffs\" array");
  }
  int order = j.value("M", 0);
  for (const auto& row : j["coeffs"]) {
    if (!row.is_array() || row.size() != 3) {
      throw Error(ErrorCode::kParseError, "coefficient rows must be [n, re, im]");
    }
    order = std::max(order, std::abs(row[0].get<int>()));
  }
  FourierSeries s(order);
  std::vector<bool> given(static_cast<std::size_t>(2 * order + 1), false);
  for (const auto& row : j["coeffs"]) {
    const int n = row[0].get<int>();
    s.set(n, Complex(row[1].get<double>(), row[2].get<double>()));
    given[static_cast<std::size_t>(n + order)] = true;
  }
  if (hermitian_completion) {
    for (int n = 1; n <= order; ++n) {
      const bool pos = given[static_cast<std::size_t>(n + order)];
      const bool neg = given[static_cast<std::size_t>(order - n)];
      if (pos && !neg) s.set(-n, std::conj(s.coefficient(n)));
      if (neg && !pos) s.set(n, std::conj(s.coefficient(-n)));
    }
  }
  return s;
}

}  // namespace

json weight_to_json(const WeightFunction& a) {
  json coeffs = json::array();
  for (int n = 0; n <= a.order(); ++n) {
    const Complex c = a.coefficient(n);
    coeffs.push_back(json::array({n, c.real(), c.imag()}));
  }
  return {{"M", a.order()}, {"coeffs", coeffs}, {"meta", a.meta()}};
}

WeightFunction weight_from_json(const json& j) {
  try {
    FourierSeries s = parse_coefficients(j, true);
    return WeightFunction(std::move(s), j.value("meta", std::string("file")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

json series_to_json(const FourierSeries& s) {
  json coeffs = json::array();
  for (int n = -s.order(); n <= s.order(); ++n) {
    const Complex c = s.coefficient(n);
    coeffs.push_back(json::array({n, c.real(), c.imag()}));
  }
  return {{"M", s.order()}, {"coeffs", coeffs}};
}

FourierSeries series_from_json(const json& j) {
  try {
    return parse_coefficients(j, false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

json domain_map_to_json(const DomainMap& d) {
  json taylor = json::array();
  for (const auto& c : d.taylor) taylor.push_back(complex_pair(c));
  return {{"taylor", taylor}, {"name", d.name}};
}

DomainMap domain_map_from_json(const json& j) {
  try {
    DomainMap d;
    if (!j.contains("taylor") || !j["taylor"].is_array()) {
      throw Error(ErrorCode::kParseError, "domain map needs a \"taylor\" array");
    }
    for (const auto& c : j["taylor"]) d.taylor.push_back(complex_from(c));
    d.name = j.value("name", std::string("domain"));
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

json matrix_to_json(const OperatorMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.entries.cols(); ++k) row.push_back(complex_pair(m.entries(i, k)));
    rows.push_back(std::move(row));
  }
  return {{"basis", m.basis == Basis::kPhi ? "phi" : "fourier"},
          {"M", m.order},
          {"weight", m.weight_id},
          {"rows", rows}};
}

void write_spectrum_csv(std::ostream& out, const SteklovSpectrum& sp) {
  out << "n,lambda,reference,delta\n" << std::setprecision(17);
  for (int n = 0; n <= sp.trusted && n < static_cast<int>(sp.values.size()); ++n) {
    const double ref = sp.scale() * disk_eigenvalue(n);
    out << n << ',' << sp.values[n] << ',' << ref << ',' << sp.values[n] - ref << '\n';
  }
}

json spectrum_to_json(const SteklovSpectrum& sp) {
  std::vector<double> trusted(sp.values.begin(),
                              sp.values.begin() + std::min<std::size_t>(sp.values.size(), sp.trusted + 1));
  return {{"values", trusted},
          {"trusted", sp.trusted},
          {"boundary_length", sp.boundary_length},
          {"reference", sp.reference}};
}

void write_zeta_curve_csv(std::ostream& out, const ZetaCurve& c) {
  out << "s,psi_phi,psi_pair,gap\n" << std::setprecision(17);
  for (std::size_t i = 0; i < c.s_grid.size(); ++i) {
    out << c.s_grid[i] << ',' << c.psi_phi[i] << ',' << c.psi_pair[i] << ','
        << c.convergence_gap[i] << '\n';
  }
}

json zeta_curve_to_json(const ZetaCurve& c) {
  return {{"s", c.s_grid},
          {"psi_phi", c.psi_phi},
          {"psi_pair", c.psi_pair},
          {"gap", c.convergence_gap},
          {"M_big", c.m_big},
          {"K_trust", c.trusted},
          {"nonneg_on_s_ge_1", c.nonneg_on_s_ge_1},
          {"monotone", c.monotone},
          {"estimators_agree", c.estimators_agree},
          {"pair_divergences", c.pair_divergences},
          {"max_estimator_disagreement", c.max_estimator_disagreement}};
}

json invariant_report_to_json(const InvariantReport& r) {
  return {{"k", r.k},
          {"M", r.order},
          {"Z_k", r.z_k},
          {"Z_k_imag", r.z_k_imag},
          {"edward", optional_number(r.edward)},
          {"ratios",
           {{"power", optional_number(r.ratio_power)},
            {"lifted", optional_number(r.ratio_lifted)},
            {"rhs_power", r.rhs_power},
            {"rhs_lifted", r.rhs_lifted}}},
          {"budget_used", r.lattice_size}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kConfigError, "cannot write " + path);
  out << text;
}

}  // namespace steklov
