#include "chaining/prf.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace chaining::prf {

using u128 = unsigned __int128;

Residue pow_mod(Residue base, std::uint64_t exponent, Residue p) {
  Residue result = 1 % p;
  base %= p;
  while (exponent != 0) {
    if (exponent & 1u) result = mul_mod(result, base, p);
    base = mul_mod(base, base, p);
    exponent >>= 1;
  }
  return result;
}

Residue inv_mod(Residue a, Residue p) {
  if (a % p == 0) throw std::domain_error("zero has no inverse");
  return pow_mod(a, p - 2, p);
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  static constexpr std::array<std::uint64_t, 12> kWitnesses = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (std::uint64_t w : kWitnesses) {
    if (n % w == 0) return n == w;
  }
  std::uint64_t odd = n - 1;
  int shifts = 0;
  while ((odd & 1u) == 0) {
    odd >>= 1;
    ++shifts;
  }
  for (std::uint64_t w : kWitnesses) {
    Residue x = pow_mod(w, odd, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < shifts; ++i) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

FieldParams make_field(Residue p, Index r) {
  if (r == 0 || r > p) throw std::invalid_argument("hash range must lie in [1, p]");
  if (p > kMaxModulus) throw std::invalid_argument("modulus above 2^61 is not supported");
  return {p, r, r * (p / r)};
}

FieldParams find_prime(Index d, Index r) {
  if (r < 1 || r > d) throw std::invalid_argument("find_prime requires 1 <= r <= d");
  Residue candidate = std::max<Residue>(d, 2 * r);
  while (!is_prime(candidate)) ++candidate;
  return make_field(candidate, r);
}

// ---------------------------------------------------------------------------
// Polynomials

Polynomial::Polynomial(std::vector<Residue> coefficients) : coeffs_(std::move(coefficients)) { normalize(); }

Polynomial Polynomial::constant(Residue c) { return Polynomial(std::vector<Residue>{c}); }

Polynomial Polynomial::linear_root(Residue a, Residue p) {
  return Polynomial(std::vector<Residue>{a % p == 0 ? 0 : p - a % p, 1 % p});
}

void Polynomial::normalize() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Polynomial poly_add(const Polynomial& u, const Polynomial& v, Residue p) {
  const auto& a = u.coefficients();
  const auto& b = v.coefficients();
  std::vector<Residue> out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = add_mod(u[i], v[i], p);
  return Polynomial(std::move(out));
}

namespace {

struct NttPrime {
  std::uint32_t modulus;
  std::uint32_t generator;
  int max_log_length;
};

// c * 2^k + 1 primes with a primitive root each.
constexpr std::array<NttPrime, 5> kNttPrimes = {{
    {469762049u, 3u, 26},   // 7 * 2^26 + 1
    {998244353u, 3u, 23},   // 119 * 2^23 + 1
    {754974721u, 11u, 24},  // 45 * 2^24 + 1
    {1224736769u, 3u, 24},  // 73 * 2^24 + 1
    {1004535809u, 3u, 21},  // 479 * 2^21 + 1
}};

constexpr std::size_t kSchoolbookCutoff = 48;

std::vector<Residue> schoolbook(const std::vector<Residue>& a, const std::vector<Residue>& b, Residue p) {
  std::vector<Residue> out(a.size() + b.size() - 1, 0);
  if (p <= (Residue{1} << 32)) {
    // Products fit in 64 bits, so 128-bit accumulators never overflow here.
    std::vector<u128> acc(out.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      for (std::size_t j = 0; j < b.size(); ++j) acc[i + j] += static_cast<u128>(a[i]) * b[j];
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<Residue>(acc[k] % p);
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = add_mod(out[i + j], mul_mod(a[i], b[j], p), p);
    }
  }
  return out;
}

void ntt(std::vector<std::uint64_t>& data, const NttPrime& prime, bool inverse) {
  const std::uint64_t mod = prime.modulus;
  const std::size_t n = data.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::uint64_t w = pow_mod(prime.generator, (mod - 1) / len, mod);
    if (inverse) w = inv_mod(w, mod);
    const std::size_t half = len / 2;
    std::vector<std::uint64_t> twiddle(half);
    twiddle[0] = 1;
    for (std::size_t i = 1; i < half; ++i) twiddle[i] = twiddle[i - 1] * w % mod;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t i = 0; i < half; ++i) {
        const std::uint64_t x = data[start + i];
        const std::uint64_t y = data[start + i + half] * twiddle[i] % mod;
        data[start + i] = x + y >= mod ? x + y - mod : x + y;
        data[start + i + half] = x >= y ? x - y : x + mod - y;
      }
    }
  }
  if (inverse) {
    const std::uint64_t n_inv = inv_mod(n % mod, mod);
    for (auto& x : data) x = x * n_inv % mod;
  }
}

std::vector<Residue> ntt_multiply(const std::vector<Residue>& a, const std::vector<Residue>& b, Residue p) {
  const std::size_t out_size = a.size() + b.size() - 1;
  const std::size_t length = std::bit_ceil(out_size);
  const int log_length = std::countr_zero(length);

  // Each true coefficient is below min(|a|,|b|) * (p-1)^2; use enough primes
  // that their product exceeds that bound.
  const double bound_bits =
      std::log2(static_cast<double>(std::min(a.size(), b.size()))) + 2.0 * std::log2(static_cast<double>(p)) + 1.0;
  std::vector<const NttPrime*> primes;
  double covered = 0.0;
  for (const auto& prime : kNttPrimes) {
    if (covered > bound_bits) break;
    if (prime.max_log_length < log_length) continue;
    primes.push_back(&prime);
    covered += std::log2(static_cast<double>(prime.modulus));
  }
  if (covered <= bound_bits) return schoolbook(a, b, p);

  std::vector<std::vector<std::uint64_t>> residues;
  for (const NttPrime* prime : primes) {
    std::vector<std::uint64_t> fa(length, 0), fb(length, 0);
    for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i] % prime->modulus;
    for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i] % prime->modulus;
    ntt(fa, *prime, false);
    ntt(fb, *prime, false);
    for (std::size_t i = 0; i < length; ++i) fa[i] = fa[i] * fb[i] % prime->modulus;
    ntt(fa, *prime, true);
    residues.push_back(std::move(fa));
  }

  // Garner recombination: x = sum_i c_i * (m_0 ... m_{i-1}), reduced mod p.
  const std::size_t count = primes.size();
  std::vector<std::vector<std::uint64_t>> prefix_inverse(count, std::vector<std::uint64_t>(count, 0));
  for (std::size_t i = 1; i < count; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      prefix_inverse[i][j] = inv_mod(primes[j]->modulus % primes[i]->modulus, primes[i]->modulus);
    }
  }
  std::vector<Residue> prefix_mod_p(count, 1 % p);
  for (std::size_t i = 1; i < count; ++i) prefix_mod_p[i] = mul_mod(prefix_mod_p[i - 1], primes[i - 1]->modulus, p);

  std::vector<Residue> out(out_size);
  std::vector<std::uint64_t> digits(count);
  for (std::size_t k = 0; k < out_size; ++k) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t mod = primes[i]->modulus;
      std::uint64_t value = residues[i][k];
      for (std::size_t j = 0; j < i; ++j) {
        value = (value + mod - digits[j] % mod) % mod;
        value = value * prefix_inverse[i][j] % mod;
      }
      digits[i] = value;
    }
    Residue x = 0;
    for (std::size_t i = 0; i < count; ++i) x = add_mod(x, mul_mod(digits[i] % p, prefix_mod_p[i], p), p);
    out[k] = x;
  }
  return out;
}

}  // namespace

Polynomial poly_mul(const Polynomial& u, const Polynomial& v, Residue p) {
  if (u.is_zero() || v.is_zero()) return {};
  const auto& a = u.coefficients();
  const auto& b = v.coefficients();
  if (std::min(a.size(), b.size()) <= kSchoolbookCutoff) return Polynomial(schoolbook(a, b, p));
  return Polynomial(ntt_multiply(a, b, p));
}

namespace {

class Reducer {
 public:
  Reducer(const Polynomial& q, Residue p) : p_(p), n_(static_cast<std::size_t>(q.degree())) {
    // x^n = -(q - x^n) mod q.
    std::vector<Residue> low(n_);
    for (std::size_t i = 0; i < n_; ++i) low[i] = q[i] == 0 ? 0 : p - q[i];
    powers_.emplace_back(std::move(low));
  }

  Polynomial reduce(Polynomial h) {
    while (h.degree() >= static_cast<std::int64_t>(n_)) {
      const std::size_t excess = static_cast<std::size_t>(h.degree()) - (n_ - 1);
      const int k = std::bit_width(excess) - 1;
      ensure(static_cast<std::size_t>(k));
      const std::size_t split = n_ - 1 + (std::size_t{1} << k);
      const auto& c = h.coefficients();
      Polynomial high(std::vector<Residue>(c.begin() + static_cast<std::ptrdiff_t>(split), c.end()));
      Polynomial low(std::vector<Residue>(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(split)));
      h = poly_add(low, poly_mul(powers_[static_cast<std::size_t>(k)], high, p_), p_);
    }
    return h;
  }

 private:
  // powers_[j] = x^(n-1+2^j) mod q.
  void ensure(std::size_t k) {
    while (powers_.size() <= k) {
      const std::size_t j = powers_.size() - 1;
      std::vector<Residue> shifted(std::size_t{1} << j, 0);
      const auto& prev = powers_[j].coefficients();
      shifted.insert(shifted.end(), prev.begin(), prev.end());
      Polynomial next = reduce(Polynomial(std::move(shifted)));
      powers_.push_back(std::move(next));
    }
  }

  Residue p_;
  std::size_t n_;
  std::vector<Polynomial> powers_;
};

}  // namespace

Polynomial poly_mod(const Polynomial& h, const Polynomial& q, Residue p) {
  if (q.degree() < 1) throw std::invalid_argument("modulus polynomial must have degree >= 1");
  if (q.leading() != 1) throw std::invalid_argument("modulus polynomial must be monic");
  if (h.degree() < q.degree()) return h;
  Reducer reducer(q, p);
  return reducer.reduce(h);
}

// ---------------------------------------------------------------------------
// Multipoint evaluation

ProductTree::ProductTree(std::span<const Residue> points, Residue p) : p_(p), point_count_(points.size()) {
  const std::size_t padded = std::bit_ceil(std::max<std::size_t>(points.size(), 1));
  std::vector<Polynomial> leaves;
  leaves.reserve(padded);
  for (std::size_t i = 0; i < padded; ++i) leaves.push_back(Polynomial::linear_root(i < points.size() ? points[i] : 0, p));
  levels_.push_back(std::move(leaves));
  while (levels_.back().size() > 1) {
    const auto& below = levels_.back();
    std::vector<Polynomial> above;
    above.reserve(below.size() / 2);
    for (std::size_t i = 0; i < below.size(); i += 2) above.push_back(poly_mul(below[i], below[i + 1], p));
    levels_.push_back(std::move(above));
  }
}

std::vector<Residue> ProductTree::evaluate(const Polynomial& g) const {
  std::vector<Polynomial> remainders{poly_mod(g, root(), p_)};
  for (std::size_t level = levels_.size() - 1; level-- > 0;) {
    const auto& nodes = levels_[level];
    std::vector<Polynomial> next;
    next.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) next.push_back(poly_mod(remainders[i / 2], nodes[i], p_));
    remainders = std::move(next);
  }
  std::vector<Residue> values(point_count_);
  for (std::size_t i = 0; i < point_count_; ++i) values[i] = remainders[i][0];
  return values;
}

std::vector<Residue> mpe(const Polynomial& g, std::span<const Residue> points, Residue p) {
  if (points.empty()) return {};
  return ProductTree(points, p).evaluate(g);
}

// ---------------------------------------------------------------------------
// Hashing

HashSeed draw_hash_seed(const FieldParams& field, std::size_t degree, std::size_t rounds, Rng& rng) {
  if (degree == 0) throw std::invalid_argument("hash degree must be positive");
  if (rounds == 0) throw std::invalid_argument("hash needs at least one rejection round");
  HashSeed seed{field, degree, {}};
  seed.polys.resize(rounds);
  for (auto& coeffs : seed.polys) {
    coeffs.resize(degree);
    for (auto& c : coeffs) c = uniform_below(rng, field.p);
  }
  return seed;
}

std::optional<std::vector<Index>> hash_batch(const HashSeed& seed, std::span<const Index> positions) {
  std::vector<Index> buckets(positions.size(), 0);
  std::vector<std::size_t> pending(positions.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    if (positions[i] >= seed.field.p) throw std::out_of_range("hash position outside the field");
    pending[i] = i;
  }

  for (const auto& coeffs : seed.polys) {
    if (pending.empty()) break;
    std::vector<Residue> points(pending.size());
    for (std::size_t i = 0; i < pending.size(); ++i) points[i] = positions[pending[i]];
    const auto values = mpe(Polynomial(coeffs), points, seed.field.p);
    std::vector<std::size_t> rejected;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (values[i] < seed.field.cutoff) {
        buckets[pending[i]] = seed.field.fold(values[i]);
      } else {
        rejected.push_back(pending[i]);
      }
    }
    pending = std::move(rejected);
  }
  if (!pending.empty()) return std::nullopt;
  return buckets;
}

}  // namespace chaining::prf
