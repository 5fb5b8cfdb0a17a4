#pragma once

// File formats: weight JSON, domain-map JSON, matrix dumps and the CSV/JSON
// exports of spectra, psi curves and invariant reports.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "steklov/circle_fourier.hpp"
#include "steklov/conformal.hpp"
#include "steklov/dtn_operators.hpp"
#include "steklov/steklov_spectral.hpp"
#include "steklov/zeta_engine.hpp"
#include "steklov/zeta_invariants.hpp"

namespace steklov {

using json = nlohmann::json;

/// {"M": int, "coeffs": [[n, re, im], ...], "meta": str}; only n >= 0 is
/// written, negative modes follow by Hermitian completion.
json weight_to_json(const WeightFunction& a);
/// Accepts any subset of modes; missing -n entries are completed as
/// conj(c_n). Throws kParseError on malformed input.
WeightFunction weight_from_json(const json& j);

/// Same layout as a weight, without the realness/positivity requirements.
json series_to_json(const FourierSeries& s);
FourierSeries series_from_json(const json& j);

/// {"taylor": [[re, im], ...], "name": str}.
json domain_map_to_json(const DomainMap& d);
DomainMap domain_map_from_json(const json& j);

/// {"basis": "fourier"|"phi", "M": int, "rows": [[[re, im], ...], ...]}.
json matrix_to_json(const OperatorMatrix& m);

/// Rows (n, lambda_n, lambda_n^0 2pi/L, delta_n) for n <= trusted.
void write_spectrum_csv(std::ostream& out, const SteklovSpectrum& sp);
json spectrum_to_json(const SteklovSpectrum& sp);

/// Rows (s, psi_phi, psi_pair, gap).
void write_zeta_curve_csv(std::ostream& out, const ZetaCurve& c);
json zeta_curve_to_json(const ZetaCurve& c);

/// {k, M, Z_k, edward, ratios, budget_used}.
json invariant_report_to_json(const InvariantReport& r);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace steklov
