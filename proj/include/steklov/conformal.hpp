#pragma once

// Disk automorphisms acting on weights, and weights of planar domains given
// by the Taylor data of a Riemann map derivative.

#include <string>
#include <vector>

#include "steklov/circle_fourier.hpp"

namespace steklov {

/// Psi(z) = e^{i alpha} (z - w) / (1 - conj(w) z), or Psi(conj z) when
/// orientation reversing.
struct MoebiusMap {
  Complex w{0.0, 0.0};
  double alpha = 0.0;
  bool reversing = false;

  /// Throws kUnsupportedArgument unless |w| < 1.
  void validate() const;

  Complex operator()(Complex z) const;
  /// psi(theta) = arg Psi(e^{i theta}), continuous branch not enforced.
  double boundary_angle(double theta) const;
  /// |d psi / d theta| = (1 - |w|^2) / |1 - conj(w) e^{+-i theta}|^2.
  double boundary_speed(double theta) const;
};

/// m1 o m2.
MoebiusMap compose(const MoebiusMap& m1, const MoebiusMap& m2);

/// b = (a o psi) |d psi/d theta|^{-1}.
WeightFunction moebius_pullback(const WeightFunction& a, const MoebiusMap& m);

/// Phi'(z) = sum_n taylor[n] z^n on the closed disk.
struct DomainMap {
  std::vector<Complex> taylor;
  std::string name;

  Complex derivative(Complex z) const;
  /// sum_{n>=1} |c_n| <= |c_0| on the Taylor data of Phi' (for Phi = z +
  /// sum b_n z^n this reads sum n |b_n| <= 1), a sufficient univalence test.
  bool univalence_criterion() const;
};

struct DomainWeight {
  WeightFunction weight;
  /// Length of the boundary curve, integral of |Phi'| over the circle.
  double length = 0.0;
  /// Set when the coefficient criterion fails (non-fatal).
  bool univalence_warning = false;
};

/// a(theta) = |Phi'(e^{i theta})|^{-1}. Throws kVanishingDerivative when
/// Phi' vanishes on the boundary grid.
DomainWeight weight_from_map(const DomainMap& d);

/// Named weights: disk, moebius(w[, wi], alpha), perturbed_disk(eps, m),
/// cosine(c, m). Throws kUnknownGallery for anything else.
WeightFunction gallery(const std::string& spec);
std::vector<std::string> gallery_names();

}  // namespace steklov
