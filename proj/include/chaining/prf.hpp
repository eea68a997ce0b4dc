#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chaining/core.hpp"
#include "chaining/random.hpp"

// Small-space k-wise independent hashing over a prime field: exact polynomial
// arithmetic, product-tree multipoint evaluation, and rejection folding.
namespace chaining::prf {

using Residue = std::uint64_t;

/// Largest supported modulus; keeps every product inside 128 bits.
inline constexpr Residue kMaxModulus = Residue{1} << 61;

inline Residue mul_mod(Residue a, Residue b, Residue p) {
  return static_cast<Residue>(static_cast<unsigned __int128>(a) * b % p);
}
inline Residue add_mod(Residue a, Residue b, Residue p) {
  const Residue s = a + b;
  return s >= p ? s - p : s;
}
inline Residue sub_mod(Residue a, Residue b, Residue p) { return a >= b ? a - b : a + p - b; }
Residue pow_mod(Residue base, std::uint64_t exponent, Residue p);
/// Inverse modulo a prime p (Fermat).
Residue inv_mod(Residue a, Residue p);

/// Deterministic Miller-Rabin, exact for every 64-bit input.
bool is_prime(std::uint64_t n);

struct FieldParams {
  Residue p = 2;
  Index r = 1;
  // r * floor(p / r): field values at or above it are rejected.
  Residue cutoff = 2;

  /// Maps [0, cutoff) exactly floor(p/r)-to-1 onto [0, r).
  Index fold(Residue x) const { return x / (p / r); }

  friend bool operator==(const FieldParams&, const FieldParams&) = default;
};

FieldParams make_field(Residue p, Index r);

/// Smallest prime p >= max(d, 2r), with the matching fold parameters.
FieldParams find_prime(Index d, Index r);

/// Polynomial over Z_p, coefficients low-order first, no trailing zeros.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Residue> coefficients);
  static Polynomial constant(Residue c);
  /// (x - a) over Z_p.
  static Polynomial linear_root(Residue a, Residue p);

  const std::vector<Residue>& coefficients() const { return coeffs_; }
  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  std::int64_t degree() const { return static_cast<std::int64_t>(coeffs_.size()) - 1; }
  Residue operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0; }
  Residue leading() const { return coeffs_.empty() ? 0 : coeffs_.back(); }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void normalize();
  std::vector<Residue> coeffs_;
};

Polynomial poly_add(const Polynomial& u, const Polynomial& v, Residue p);

/// Exact product mod p. Short operands use a 128-bit schoolbook; longer ones a
/// number-theoretic transform over auxiliary primes recombined by CRT.
Polynomial poly_mul(const Polynomial& u, const Polynomial& v, Residue p);

/// Remainder of h modulo the monic polynomial q (deg q >= 1).
///
/// Works by repeatedly folding the top of h down with precomputed
/// x^(n-1+2^k) mod q, halving the excess degree each step.
Polynomial poly_mod(const Polynomial& h, const Polynomial& q, Residue p);

/// Binary tree of subproducts prod (x - a_i). Points are padded with 0 up to a
/// power-of-two count; padded leaves are never reported.
class ProductTree {
 public:
  ProductTree(std::span<const Residue> points, Residue p);

  std::size_t point_count() const { return point_count_; }
  std::size_t padded_count() const { return levels_.front().size(); }
  /// levels()[0] holds the leaves; levels().back() holds the single root.
  const std::vector<std::vector<Polynomial>>& levels() const { return levels_; }
  const Polynomial& root() const { return levels_.back().front(); }

  /// g(a_i) for every original point, by descending the remainder tree.
  std::vector<Residue> evaluate(const Polynomial& g) const;

 private:
  Residue p_;
  std::size_t point_count_;
  std::vector<std::vector<Polynomial>> levels_;
};

std::vector<Residue> mpe(const Polynomial& g, std::span<const Residue> points, Residue p);

struct HashSeed {
  FieldParams field;
  // Independence degree: each polynomial has this many coefficients.
  std::size_t degree = 1;
  // One coefficient sequence per rejection round.
  std::vector<std::vector<Residue>> polys;

  std::size_t rounds() const { return polys.size(); }
  friend bool operator==(const HashSeed&, const HashSeed&) = default;
};

HashSeed draw_hash_seed(const FieldParams& field, std::size_t degree, std::size_t rounds, Rng& rng);

/// Hashes each position into [0, r). A position takes the first round whose
/// field value lands below the cutoff; nullopt (FAIL) if any position is
/// rejected in every round. Rounds are evaluated only on still-rejected
/// positions, which yields the same outputs as evaluating every round.
std::optional<std::vector<Index>> hash_batch(const HashSeed& seed, std::span<const Index> positions);

}  // namespace chaining::prf
