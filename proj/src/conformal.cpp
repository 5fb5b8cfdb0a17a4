#include "steklov/conformal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

using Mobius2 = std::array<Complex, 4>;  // (A z + B) / (C z + D)

Mobius2 matrix_of(const MoebiusMap& m) {
  const Complex rot = std::polar(1.0, m.alpha);
  return {rot, -rot * m.w, -std::conj(m.w), Complex(1.0)};
}

Mobius2 multiply(const Mobius2& p, const Mobius2& q) {
  return {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
          p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]};
}

Mobius2 conjugated(const Mobius2& p) {
  return {std::conj(p[0]), std::conj(p[1]), std::conj(p[2]), std::conj(p[3])};
}

std::vector<double> parse_arguments(const std::string& text, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kUnknownGallery, "cannot parse arguments of '" + spec + "'");
    }
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void MoebiusMap::validate() const {
  if (!(std::abs(w) < 1.0)) {
    throw Error(ErrorCode::kUnsupportedArgument, "Moebius parameter needs |w| < 1");
  }
}

Complex MoebiusMap::operator()(Complex z) const {
  const Complex u = reversing ? std::conj(z) : z;
  return std::polar(1.0, alpha) * (u - w) / (1.0 - std::conj(w) * u);
}

double MoebiusMap::boundary_angle(double theta) const {
  return std::arg((*this)(std::polar(1.0, theta)));
}

double MoebiusMap::boundary_speed(double theta) const {
  const Complex u = std::polar(1.0, reversing ? -theta : theta);
  return (1.0 - std::norm(w)) / std::norm(1.0 - std::conj(w) * u);
}

MoebiusMap compose(const MoebiusMap& m1, const MoebiusMap& m2) {
  const Mobius2 p = m1.reversing ? multiply(matrix_of(m1), conjugated(matrix_of(m2)))
                                 : multiply(matrix_of(m1), matrix_of(m2));
  MoebiusMap out;
  out.reversing = m1.reversing != m2.reversing;
  out.w = -p[1] / p[0];
  out.alpha = std::arg(p[0] / p[3]);
  return out;
}

WeightFunction moebius_pullback(const WeightFunction& a, const MoebiusMap& m) {
  m.validate();
  const FourierSeries& s = a.series();
  auto sampler = [&](std::size_t n) {
    std::vector<Complex> values(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = GridSampling::node(j, n);
      values[j] = s(m.boundary_angle(theta)).real() / m.boundary_speed(theta);
    }
    return values;
  };
  const std::size_t min_grid = 4 * static_cast<std::size_t>(2 * a.order() + 1);
  AdaptiveAnalysis r = analyze_adaptive(sampler, min_grid);
  std::ostringstream meta;
  meta.precision(17);
  meta << "pullback(w=" << m.w.real() << (m.w.imag() < 0 ? "" : "+") << m.w.imag()
       << "i,alpha=" << m.alpha << (m.reversing ? ",reversing" : "") << ")["
       << a.meta() << "]";
  return WeightFunction(std::move(r.series), meta.str());
}

Complex DomainMap::derivative(Complex z) const {
  Complex acc{};
  for (auto it = taylor.rbegin(); it != taylor.rend(); ++it) acc = acc * z + *it;
  return acc;
}

bool DomainMap::univalence_criterion() const {
  if (taylor.empty()) return false;
  double rest = 0.0;
  for (std::size_t n = 1; n < taylor.size(); ++n) rest += std::abs(taylor[n]);
  return rest <= std::abs(taylor[0]);
}

DomainWeight weight_from_map(const DomainMap& d) {
  if (d.taylor.empty()) throw Error(ErrorCode::kVanishingDerivative, "empty Taylor data");
  double scale = 0.0;
  for (const auto& c : d.taylor) scale = std::max(scale, std::abs(c));
  const std::size_t check = positivity_grid_size(static_cast<int>(d.taylor.size()));
  for (std::size_t j = 0; j < check; ++j) {
    const double speed = std::abs(d.derivative(std::polar(1.0, GridSampling::node(j, check))));
    if (!(speed > 1e-12 * scale)) {
      throw Error(ErrorCode::kVanishingDerivative,
                  "Phi' vanishes on the boundary of the disk");
    }
  }
  auto sampler = [&](std::size_t n) {
    std::vector<Complex> values(n);
    for (std::size_t j = 0; j < n; ++j) {
      values[j] = 1.0 / std::abs(d.derivative(std::polar(1.0, GridSampling::node(j, n))));
    }
    return values;
  };
  AdaptiveAnalysis r =
      analyze_adaptive(sampler, 4 * (2 * d.taylor.size() + 1));
  DomainWeight out{WeightFunction(std::move(r.series), "domain(" + d.name + ")")};
  out.length = boundary_length(out.weight);
  out.univalence_warning = !d.univalence_criterion();
  return out;
}

WeightFunction gallery(const std::string& spec) {
  const std::string text = trim(spec);
  const auto open = text.find('(');
  std::string name = trim(text.substr(0, open));
  std::vector<double> args;
  if (open != std::string::npos) {
    const auto close = text.rfind(')');
    if (close == std::string::npos || close < open || trim(text.substr(close + 1)) != "") {
      throw Error(ErrorCode::kUnknownGallery, "malformed gallery spec '" + spec + "'");
    }
    args = parse_arguments(text.substr(open + 1, close - open - 1), spec);
  }
  auto arity = [&](std::initializer_list<std::size_t> allowed) {
    if (std::find(allowed.begin(), allowed.end(), args.size()) == allowed.end()) {
      throw Error(ErrorCode::kUnknownGallery, "wrong number of arguments in '" + spec + "'");
    }
  };

  if (name == "disk") {
    arity({0});
    return WeightFunction::constant(1.0, "disk");
  }
  if (name == "moebius") {
    arity({1, 2, 3});
    MoebiusMap m;
    if (args.size() == 3) {
      m.w = Complex(args[0], args[1]);
      m.alpha = args[2];
    } else {
      m.w = Complex(args[0], 0.0);
      m.alpha = args.size() == 2 ? args[1] : 0.0;
    }
    return moebius_pullback(WeightFunction::constant(1.0, "disk"), m).with_meta(text);
  }
  if (name == "perturbed_disk") {
    arity({2});
    const int power = static_cast<int>(std::lround(args[1]));
    if (power < 2 || std::abs(args[1] - power) > 0) {
      throw Error(ErrorCode::kUnknownGallery, "perturbed_disk needs an integer m >= 2");
    }
    DomainMap d;
    d.name = text;
    d.taylor.assign(static_cast<std::size_t>(power), Complex{});
    d.taylor[0] = 1.0;
    d.taylor[static_cast<std::size_t>(power - 1)] = power * args[0];
    return weight_from_map(d).weight.with_meta(text);
  }
  if (name == "cosine") {
    arity({2});
    const int mode = static_cast<int>(std::lround(args[1]));
    if (mode < 1 || std::abs(args[1] - mode) > 0) {
      throw Error(ErrorCode::kUnknownGallery, "cosine needs an integer mode m >= 1");
    }
    FourierSeries s = FourierSeries::constant(1.0);
    s.set(mode, 0.5 * args[0]);
    s.set(-mode, 0.5 * args[0]);
    return WeightFunction(std::move(s), text);
  }
  throw Error(ErrorCode::kUnknownGallery, "unknown gallery weight '" + spec + "'");
}

std::vector<std::string> gallery_names() {
  return {"disk", "moebius(w, alpha)", "moebius(wr, wi, alpha)",
          "perturbed_disk(eps, m)", "cosine(c, m)"};
}

}  // namespace steklov
