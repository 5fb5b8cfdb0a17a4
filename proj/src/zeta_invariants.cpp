#include "steklov/zeta_invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "steklov/errors.hpp"

namespace steklov {

namespace {

using Int128 = __int128;

struct ProfileHash {
  std::size_t operator()(const std::vector<long long>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (long long x : v) {
      h ^= static_cast<std::uint64_t>(x);
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Sorted, shifted so that the smallest partial sum is zero. N depends only
/// on this profile: f(n) = prod (n + S_i) is invariant under reordering of
/// the S_i and a common shift of the S_i is absorbed by n.
std::vector<long long> canonical_profile(std::vector<long long> s) {
  std::sort(s.begin(), s.end());
  const long long lo = s.front();
  for (auto& x : s) x -= lo;
  return s;
}

std::optional<Int128> n_coefficient_fast(const std::vector<long long>& sorted) {
  const long long lo = sorted.front();
  const long long hi = sorted.back();
  Int128 total = 0;
  for (long long n = -hi; n <= -lo; ++n) {
    Int128 f = 1;
    for (long long s : sorted) {
      const Int128 factor = n + s;
      if (factor == 0) {
        f = 0;
        break;
      }
      if (__builtin_mul_overflow(f, factor, &f)) return std::nullopt;
    }
    if (f < 0) {
      Int128 twice;
      if (__builtin_mul_overflow(f, Int128{-2}, &twice)) return std::nullopt;
      if (__builtin_add_overflow(total, twice, &total)) return std::nullopt;
    }
  }
  return total;
}

BigInt to_big(Int128 v) {
  const bool negative = v < 0;
  unsigned __int128 mag = negative ? static_cast<unsigned __int128>(-(v + 1)) + 1
                                   : static_cast<unsigned __int128>(v);
  BigInt out = static_cast<std::uint64_t>(mag >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(mag & 0xFFFFFFFFFFFFFFFFULL);
  return negative ? BigInt(-out) : out;
}

BigInt n_coefficient_big(const std::vector<long long>& sorted) {
  const long long lo = sorted.front();
  const long long hi = sorted.back();
  BigInt total = 0;
  for (long long n = -hi; n <= -lo; ++n) {
    BigInt f = 1;
    for (long long s : sorted) f *= (n + s);
    if (f < 0) total -= 2 * f;
  }
  return total;
}

double n_coefficient_double(const std::vector<long long>& sorted) {
  if (const auto fast = n_coefficient_fast(sorted)) return static_cast<double>(*fast);
  return n_coefficient_big(sorted).convert_to<double>();
}

struct ComplexAccumulator {
  double re = 0.0, re_c = 0.0, im = 0.0, im_c = 0.0;

  static void add(double& sum, double& comp, double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  void add(Complex z) {
    add(re, re_c, z.real());
    add(im, im_c, z.imag());
  }
  Complex value() const { return {re + re_c, im + im_c}; }
};

std::uint64_t lattice_cost(int k, int order, std::uint64_t cap) {
  const long double side = 2.0L * order + 1.0L;
  const long double cost = static_cast<long double>(k) * std::pow(side, 2 * k - 1);
  if (cost > static_cast<long double>(cap)) return cap + 1;
  return static_cast<std::uint64_t>(cost);
}

/// Partial lattice sum for a fixed leading index j_1.
struct LeadingSlice {
  Complex value;
  std::uint64_t tuples = 0;
};

class LatticeWorker {
 public:
  LatticeWorker(const FourierSeries& a, int k) : a_(a), k_(k) {}

  LeadingSlice run(int leading) {
    const int m = a_.order();
    const int len = 2 * k_;
    std::vector<int> j(static_cast<std::size_t>(len), -m);
    j[0] = leading;
    std::vector<long long> partial(static_cast<std::size_t>(len));
    ComplexAccumulator acc;
    LeadingSlice slice;
    const int free_tail = len - 2;  // j_2 .. j_{2k-1}
    while (true) {
      long long sum = 0;
      for (int i = 0; i < len - 1; ++i) sum += j[static_cast<std::size_t>(i)];
      const long long last = -sum;
      if (last >= -m && last <= m) {
        j[static_cast<std::size_t>(len - 1)] = static_cast<int>(last);
        ++slice.tuples;
        Complex product = 1.0;
        for (int x : j) {
          product *= a_.coefficient(x);
          if (product == Complex{}) break;
        }
        if (product != Complex{}) {
          partial[0] = 0;
          for (int i = 1; i < len; ++i) {
            partial[static_cast<std::size_t>(i)] =
                partial[static_cast<std::size_t>(i - 1)] + j[static_cast<std::size_t>(i - 1)];
          }
          const double n = lookup(partial);
          if (n != 0.0) acc.add(n * product);
        }
      }
      // Odometer over j_2 .. j_{2k-1}.
      int pos = 1;
      while (pos <= free_tail) {
        if (++j[static_cast<std::size_t>(pos)] <= m) break;
        j[static_cast<std::size_t>(pos)] = -m;
        ++pos;
      }
      if (pos > free_tail) break;
    }
    slice.value = acc.value();
    return slice;
  }

  std::size_t memo_size() const { return memo_.size(); }

 private:
  double lookup(const std::vector<long long>& partial) {
    std::vector<long long> key = canonical_profile(partial);
    const auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const double n = n_coefficient_double(key);
    memo_.emplace(std::move(key), n);
    return n;
  }

  const FourierSeries& a_;
  int k_;
  std::unordered_map<std::vector<long long>, double, ProfileHash> memo_;
};

}  // namespace

IndexTuple::IndexTuple(std::vector<int> j) : j_(std::move(j)) {
  if (j_.empty() || j_.size() % 2 != 0) {
    throw Error(ErrorCode::kInvalidGrid, "index tuple must have even positive length");
  }
  long long sum = 0;
  partial_.reserve(j_.size());
  for (std::size_t i = 0; i < j_.size(); ++i) {
    partial_.push_back(sum);
    sum += j_[i];
  }
  if (sum != 0) {
    std::ostringstream msg;
    msg << "indices sum to " << sum << ", not zero";
    throw Error(ErrorCode::kNonZeroSum, msg.str());
  }
}

BigInt n_coefficient_from_profile(const std::vector<long long>& partial_sums) {
  if (partial_sums.empty()) return 0;
  const std::vector<long long> sorted = canonical_profile(partial_sums);
  if (const auto fast = n_coefficient_fast(sorted)) return to_big(*fast);
  return n_coefficient_big(sorted);
}

BigInt n_coefficient(const IndexTuple& j) {
  return n_coefficient_from_profile(j.partial_sums());
}

ZetaInvariantResult zeta_invariant(const FourierSeries& a, int k,
                                   std::uint64_t budget, unsigned workers) {
  if (k < 1) throw Error(ErrorCode::kUnsupportedArgument, "k must be positive");
  const int m = a.order();
  const std::uint64_t cost = lattice_cost(k, m, budget);
  if (cost > budget) {
    std::ostringstream msg;
    msg << "k (2M+1)^{2k-1} with k = " << k << ", M = " << m
        << " exceeds the budget of " << budget << " tuple evaluations";
    throw Error(ErrorCode::kBudgetExceeded, msg.str());
  }
  const int leading_count = 2 * m + 1;
  std::vector<LeadingSlice> slices(static_cast<std::size_t>(leading_count));
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(leading_count)));
  std::vector<std::size_t> memo_sizes(workers, 0);

  auto work = [&](unsigned id) {
    LatticeWorker worker(a, k);
    for (int i = static_cast<int>(id); i < leading_count; i += static_cast<int>(workers)) {
      slices[static_cast<std::size_t>(i)] = worker.run(i - m);
    }
    memo_sizes[id] = worker.memo_size();
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
  }

  ZetaInvariantResult out;
  ComplexAccumulator total;
  for (const auto& s : slices) {
    total.add(s.value);
    out.tuples += s.tuples;
  }
  out.value = total.value();
  for (std::size_t size : memo_sizes) out.distinct_n += size;
  return out;
}

double zeta_invariant(const WeightFunction& a, int k, std::uint64_t budget) {
  return zeta_invariant(a.series(), k, budget).value.real();
}

double edward_z1(const FourierSeries& a) {
  if (a.hermitian_defect() > 1e-12 * std::max(1.0, a.max_abs())) {
    throw Error(ErrorCode::kNonRealWeight, "Edward's formula needs a real weight");
  }
  double sum = 0.0;
  for (int n = a.order(); n >= 2; --n) {
    const double dn = n;
    sum += (dn * dn * dn - dn) * std::norm(a.coefficient(n));
  }
  return 2.0 / 3.0 * sum;
}

InvariantReport estimate_residuals(const WeightFunction& a, int k,
                                   std::uint64_t budget) {
  InvariantReport r;
  r.k = k;
  r.order = a.order();
  const ZetaInvariantResult z = zeta_invariant(a.series(), k, budget);
  r.z_k = z.value.real();
  r.z_k_imag = z.value.imag();
  r.lattice_size = z.tuples;
  if (k == 1) r.edward = edward_z1(a.series());

  const double exponent = 2.0 * k + 1.0;
  for (int n = 2; n <= a.order(); ++n) {
    r.rhs_power += std::pow(n, exponent) * std::pow(std::abs(a.coefficient(n)), 2.0 * k);
  }
  const WeightFunction lifted =
      k == 1 ? a : pointwise_map(a, PointwiseMap::power(static_cast<double>(k)));
  for (int n = 2; n <= lifted.order(); ++n) {
    r.rhs_lifted += std::pow(n, exponent) * std::norm(lifted.coefficient(n));
  }
  if (r.rhs_power > 0.0) r.ratio_power = r.z_k / r.rhs_power;
  if (r.rhs_lifted > 0.0) r.ratio_lifted = r.z_k / r.rhs_lifted;
  return r;
}

}  // namespace steklov
