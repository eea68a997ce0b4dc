#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chaining/binary_io.hpp"
#include "chaining/bittest.hpp"
#include "chaining/core.hpp"
#include "chaining/isolation.hpp"

namespace chaining {

/// A (position, value) pair recovered by the decoder or fed to the encoder.
template <typename Scalar>
struct BasicSpike {
  Index position = 0;
  Scalar value = 0;
  friend bool operator==(const BasicSpike&, const BasicSpike&) = default;
};

template <typename Scalar>
using BasicSpikeList = std::vector<BasicSpike<Scalar>>;

using Spike = BasicSpike<double>;
using SpikeList = BasicSpikeList<double>;

/// The sketch V = Phi f, stored in canonical layout: one contiguous block per
/// (pass, trial), each block N_k measurements of L+1 scalars (c, then b MSB-first).
template <typename Scalar>
class BasicSketch {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using BlockMap = Eigen::Map<Block>;
  using ConstBlockMap = Eigen::Map<const Block>;

  BasicSketch() = default;
  explicit BasicSketch(Schedule schedule) : schedule_(std::move(schedule)) {
    offsets_.assign(1, 0);
    for (const auto& pass : schedule_.passes) {
      for (Index t = 0; t < pass.trials; ++t) {
        offsets_.push_back(offsets_.back() + pass.buckets * schedule_.measurement_width());
      }
    }
    first_block_.assign(1, 0);
    for (const auto& pass : schedule_.passes) first_block_.push_back(first_block_.back() + pass.trials);
    payload_ = Vector::Zero(static_cast<Eigen::Index>(offsets_.back()));
  }

  const Schedule& schedule() const { return schedule_; }
  Index scalar_count() const { return static_cast<Index>(payload_.size()); }
  Index byte_size() const { return scalar_count() * sizeof(Scalar); }

  const Vector& payload() const { return payload_; }
  Vector& payload() { return payload_; }

  BlockMap block(std::size_t pass, std::size_t trial) {
    const auto [offset, rows] = locate(pass, trial);
    return BlockMap(payload_.data() + offset, rows, width());
  }
  ConstBlockMap block(std::size_t pass, std::size_t trial) const {
    const auto [offset, rows] = locate(pass, trial);
    return ConstBlockMap(payload_.data() + offset, rows, width());
  }

  bool is_zero() const { return (payload_.array() == Scalar(0)).all(); }

  BasicSketch& operator+=(const BasicSketch& other) {
    require_same_schedule(other);
    payload_ += other.payload_;
    return *this;
  }
  BasicSketch& operator-=(const BasicSketch& other) {
    require_same_schedule(other);
    payload_ -= other.payload_;
    return *this;
  }
  friend BasicSketch operator+(BasicSketch lhs, const BasicSketch& rhs) { return lhs += rhs; }
  friend BasicSketch operator-(BasicSketch lhs, const BasicSketch& rhs) { return lhs -= rhs; }

  friend bool operator==(const BasicSketch& x, const BasicSketch& y) {
    return x.schedule_ == y.schedule_ && x.payload_ == y.payload_;
  }

  void require_same_schedule(const BasicSketch& other) const {
    if (!(schedule_ == other.schedule_)) throw std::invalid_argument("sketch schedules differ");
  }

 private:
  Eigen::Index width() const { return static_cast<Eigen::Index>(schedule_.measurement_width()); }

  std::pair<Index, Eigen::Index> locate(std::size_t pass, std::size_t trial) const {
    if (pass >= schedule_.pass_count() || trial >= schedule_.passes[pass].trials) {
      throw std::out_of_range("(pass, trial) outside the sketch schedule");
    }
    return {offsets_[first_block_[pass] + trial], static_cast<Eigen::Index>(schedule_.passes[pass].buckets)};
  }

  Schedule schedule_;
  std::vector<Index> offsets_;
  std::vector<std::size_t> first_block_;
  Vector payload_;
};

using Sketch = BasicSketch<double>;

namespace detail {

inline void require_matching(const Schedule& sketch_schedule, const IsolationMatrix& matrix) {
  if (!(sketch_schedule == matrix.schedule())) throw std::invalid_argument("sketch and matrix schedules differ");
}

/// Adds the given (position, value) entries into every block of passes
/// [first_pass, K). Batched column lookups keep seeded mode on the MPE path.
template <typename Scalar>
void accumulate_entries(BasicSketch<Scalar>& sketch, const IsolationMatrix& matrix, std::span<const Index> positions,
                        std::span<const Scalar> values, std::size_t first_pass = 0) {
  require_matching(sketch.schedule(), matrix);
  if (positions.empty()) return;
  const auto& schedule = matrix.schedule();
  for (std::size_t k = first_pass; k < schedule.pass_count(); ++k) {
    for (std::size_t t = 0; t < schedule.passes[k].trials; ++t) {
      const auto buckets = matrix.buckets_batch(k, t, positions);
      auto block = sketch.block(k, t);
      for (std::size_t j = 0; j < positions.size(); ++j) {
        accumulate(block.row(static_cast<Eigen::Index>(buckets[j])), positions[j], values[j]);
      }
    }
  }
}

}  // namespace detail

/// Phi f for a sparse signal.
template <typename Scalar>
BasicSketch<Scalar> sketch_signal(const BasicSparseSignal<Scalar>& f, const IsolationMatrix& matrix) {
  if (f.dimension() != matrix.dimension()) throw std::invalid_argument("signal dimension does not match the matrix");
  BasicSketch<Scalar> sketch(matrix.schedule());
  std::vector<Index> positions;
  std::vector<Scalar> values;
  positions.reserve(f.support_size());
  values.reserve(f.support_size());
  for (const auto& [i, v] : f) {
    positions.push_back(i);
    values.push_back(v);
  }
  detail::accumulate_entries<Scalar>(sketch, matrix, positions, values);
  return sketch;
}

/// Streaming update: the sketch becomes that of f + delta e_position.
/// Mutates in place; callers serialize concurrent updates.
template <typename Scalar>
void update(BasicSketch<Scalar>& sketch, const IsolationMatrix& matrix, Index position, Scalar delta) {
  if (position >= matrix.dimension()) throw std::out_of_range("update position outside [0, d)");
  const Index positions[1] = {position};
  const Scalar values[1] = {delta};
  detail::accumulate_entries<Scalar>(sketch, matrix, positions, values);
}

template <typename Scalar>
void require_distinct_positions(const BasicSpikeList<Scalar>& spikes, Index d) {
  std::set<Index> seen;
  for (const auto& s : spikes) {
    if (s.position >= d) throw std::out_of_range("spike position outside [0, d)");
    if (!seen.insert(s.position).second) throw std::invalid_argument("duplicate spike position");
  }
}

/// Sketch of a spike list; passes before first_pass are left zero.
template <typename Scalar>
BasicSketch<Scalar> encode_spikes(const BasicSpikeList<Scalar>& spikes, const IsolationMatrix& matrix,
                                  std::size_t first_pass = 0) {
  require_distinct_positions(spikes, matrix.dimension());
  BasicSketch<Scalar> sketch(matrix.schedule());
  std::vector<Index> positions;
  std::vector<Scalar> values;
  for (const auto& s : spikes) {
    positions.push_back(s.position);
    values.push_back(s.value);
  }
  detail::accumulate_entries<Scalar>(sketch, matrix, positions, values, first_pass);
  return sketch;
}

template <typename Scalar>
BasicSketch<Scalar> subtract(const BasicSketch<Scalar>& lhs, const BasicSketch<Scalar>& rhs) {
  return lhs - rhs;
}

// Sketch file: "CPSK" u32 version, u64 matrix fingerprint, schedule, u64 scalar
// count, then the payload as little-endian f64 in canonical layout.
inline constexpr std::uint32_t kSketchVersion = 1;

inline void write_sketch(std::ostream& out, const Sketch& sketch, const IsolationMatrix& matrix) {
  detail::require_matching(sketch.schedule(), matrix);
  ByteWriter w;
  w.tag("CPSK");
  w.u32(kSketchVersion);
  w.u64(matrix_fingerprint(matrix));
  detail::write_schedule_bytes(w, sketch.schedule());
  w.u64(sketch.scalar_count());
  for (Eigen::Index i = 0; i < sketch.payload().size(); ++i) w.f64(sketch.payload()(i));
  write_bytes(out, w.bytes());
}

/// Reads a sketch and checks that it was produced with the given matrix.
inline Sketch read_sketch(std::istream& in, const IsolationMatrix& matrix) {
  ByteReader r(in);
  r.expect_tag("CPSK");
  if (r.u32() != kSketchVersion) throw FormatError("unsupported sketch version");
  if (r.u64() != matrix_fingerprint(matrix)) throw FormatError("sketch was produced with a different matrix");
  Schedule schedule = detail::read_schedule(r, matrix.dimension());
  if (!(schedule == matrix.schedule())) throw FormatError("sketch schedule disagrees with the matrix");
  Sketch sketch(schedule);
  if (r.u64() != sketch.scalar_count()) throw FormatError("sketch payload size disagrees with its schedule");
  for (Eigen::Index i = 0; i < sketch.payload().size(); ++i) sketch.payload()(i) = r.f64();
  r.expect_end();
  return sketch;
}

}  // namespace chaining
