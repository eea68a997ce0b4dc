#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chaining {

using Index = std::uint64_t;

/// A d-dimensional real signal stored as a position -> value map.
///
/// Zero values are never stored: assigning zero erases the entry.
template <typename Scalar>
class BasicSparseSignal {
 public:
  using Entries = std::map<Index, Scalar>;

  BasicSparseSignal() = default;
  explicit BasicSparseSignal(Index dimension) : dimension_(dimension) {
    if (dimension == 0) throw std::invalid_argument("signal dimension must be positive");
  }

  Index dimension() const { return dimension_; }
  std::size_t support_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entries& entries() const { return entries_; }

  Scalar operator[](Index position) const {
    auto it = entries_.find(position);
    return it == entries_.end() ? Scalar(0) : it->second;
  }

  void set(Index position, Scalar value) {
    check(position);
    if (value == Scalar(0)) {
      entries_.erase(position);
    } else {
      entries_[position] = value;
    }
  }

  void add(Index position, Scalar delta) { set(position, (*this)[position] + delta); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const BasicSparseSignal&, const BasicSparseSignal&) = default;

  BasicSparseSignal& operator+=(const BasicSparseSignal& other) {
    require_same_dimension(other);
    for (const auto& [i, v] : other) add(i, v);
    return *this;
  }
  BasicSparseSignal& operator-=(const BasicSparseSignal& other) {
    require_same_dimension(other);
    for (const auto& [i, v] : other) add(i, -v);
    return *this;
  }
  BasicSparseSignal& operator*=(Scalar alpha) {
    if (alpha == Scalar(0)) {
      entries_.clear();
      return *this;
    }
    for (auto& [i, v] : entries_) v *= alpha;
    return *this;
  }

  friend BasicSparseSignal operator+(BasicSparseSignal lhs, const BasicSparseSignal& rhs) { return lhs += rhs; }
  friend BasicSparseSignal operator-(BasicSparseSignal lhs, const BasicSparseSignal& rhs) { return lhs -= rhs; }
  friend BasicSparseSignal operator*(Scalar alpha, BasicSparseSignal f) { return f *= alpha; }

 private:
  void check(Index position) const {
    if (position >= dimension_) {
      throw std::out_of_range("position " + std::to_string(position) + " outside [0, " +
                              std::to_string(dimension_) + ")");
    }
  }
  void require_same_dimension(const BasicSparseSignal& other) const {
    if (other.dimension_ != dimension_) throw std::invalid_argument("signal dimension mismatch");
  }

  Index dimension_ = 1;
  Entries entries_;
};

using SparseSignal = BasicSparseSignal<double>;

enum class MatrixMode : std::uint8_t { Explicit = 0, Seeded = 1 };

struct SketchParams {
  Index d = 2;
  Index m = 1;
  double a = 8.0;
  double c_trials = 1.0;
  double c_buckets = 20.0;
  double retention_fraction = 0.8;
  MatrixMode mode = MatrixMode::Explicit;
  std::uint64_t seed = 0;
  // 0 selects the default ceil(4 log2 d).
  std::uint64_t k_rep = 0;

  std::uint64_t rejection_rounds() const;
  void validate() const;

  friend bool operator==(const SketchParams&, const SketchParams&) = default;
};

/// Per-pass layout: spike budget m_k, trial count T_k, buckets per trial N_k.
struct PassLayout {
  Index spike_budget = 0;
  Index trials = 0;
  Index buckets = 0;

  friend bool operator==(const PassLayout&, const PassLayout&) = default;
};

struct Schedule {
  Index d = 0;
  // Number of binary bit-test rows; a measurement holds bit_rows + 1 scalars.
  Index bit_rows = 0;
  std::vector<PassLayout> passes;

  std::size_t pass_count() const { return passes.size(); }
  Index measurement_width() const { return bit_rows + 1; }
  Index total_trials() const;
  Index total_measurements() const;
  Index scalar_count() const { return total_measurements() * measurement_width(); }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

Schedule derive_schedule(const SketchParams& params);

/// Bits needed to address [0, d): ceil(log2 d).
Index bit_rows_for(Index d);

namespace detail {

template <typename Scalar>
bool larger_magnitude_first(Index pos_a, Scalar val_a, Index pos_b, Scalar val_b) {
  using std::abs;
  if (abs(val_a) != abs(val_b)) return abs(val_a) > abs(val_b);
  return pos_a < pos_b;
}

}  // namespace detail

/// f restricted to its m largest-magnitude positions; ties go to the smaller index.
template <typename Scalar>
BasicSparseSignal<Scalar> best_m_approx(const BasicSparseSignal<Scalar>& f, Index m) {
  if (f.support_size() <= m) return f;
  std::vector<std::pair<Index, Scalar>> ranked(f.begin(), f.end());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(m), ranked.end(),
                    [](const auto& x, const auto& y) {
                      return detail::larger_magnitude_first(x.first, x.second, y.first, y.second);
                    });
  BasicSparseSignal<Scalar> out(f.dimension());
  for (Index j = 0; j < m; ++j) out.set(ranked[j].first, ranked[j].second);
  return out;
}

}  // namespace chaining
