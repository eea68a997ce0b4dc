#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chaining/binary_io.hpp"
#include "chaining/core.hpp"
#include "chaining/prf.hpp"

namespace chaining {

/// Raised when a seeded partition rejects some position in every round.
class HashFailure : public std::runtime_error {
 public:
  HashFailure(std::size_t pass, std::size_t trial)
      : std::runtime_error("hash construction failed at pass " + std::to_string(pass) + ", trial " +
                           std::to_string(trial)),
        pass_(pass),
        trial_(trial) {}
  std::size_t pass() const { return pass_; }
  std::size_t trial() const { return trial_; }

 private:
  std::size_t pass_;
  std::size_t trial_;
};

/// Independence degree used by seeded partitions for a pass with spike budget m_k.
inline std::size_t seeded_hash_degree(Index spike_budget) {
  return static_cast<std::size_t>(std::max<Index>(4 * spike_budget, 8));
}

/// The hierarchical isolation matrix: one random partition of [0, d) into
/// N_k buckets for every (pass, trial). Explicit mode materializes the bucket
/// table; seeded mode keeps one polynomial hash seed per partition.
class IsolationMatrix {
 public:
  IsolationMatrix(SketchParams params, Schedule schedule, std::vector<std::vector<std::uint32_t>> tables);
  IsolationMatrix(SketchParams params, Schedule schedule, std::vector<prf::HashSeed> seeds);

  const SketchParams& params() const { return params_; }
  const Schedule& schedule() const { return schedule_; }
  MatrixMode mode() const { return params_.mode; }
  Index dimension() const { return schedule_.d; }

  /// Flat index of the (pass, trial) partition.
  std::size_t block_index(std::size_t pass, std::size_t trial) const;
  std::size_t block_count() const { return block_offsets_.back(); }

  Index bucket_of(std::size_t pass, std::size_t trial, Index position) const;
  std::vector<Index> buckets_batch(std::size_t pass, std::size_t trial, std::span<const Index> positions) const;

  /// Seeds of a seeded matrix, one per block (empty in explicit mode).
  const std::vector<prf::HashSeed>& seeds() const { return seeds_; }

  friend bool operator==(const IsolationMatrix&, const IsolationMatrix&) = default;

 private:
  void index_blocks();
  void check_indices(std::size_t pass, std::size_t trial) const;

  SketchParams params_;
  Schedule schedule_;
  std::vector<std::size_t> block_offsets_;
  std::vector<std::vector<std::uint32_t>> tables_;
  std::vector<prf::HashSeed> seeds_;
};

IsolationMatrix build_isolation(const SketchParams& params, const Schedule& schedule);
inline IsolationMatrix build_isolation(const SketchParams& params) {
  return build_isolation(params, derive_schedule(params));
}

/// Explicit-mode bucket for one (pass, trial, position), keyed counter-style on the seed.
std::uint32_t explicit_bucket(std::uint64_t seed, std::size_t pass, std::size_t trial, Index position, Index buckets);

// Binary serialization. All integers little-endian.
//   header: "CPMX" u32 version, u64 d, u64 m, f64 a, f64 c_trials, f64 c_buckets,
//           f64 retention, u8 mode, u64 seed, u64 k_rep, schedule
//   schedule: u64 bit_rows, u64 passes, then per pass u64 m_k, T_k, N_k
//   seeded body: per (pass, trial) u64 p, u64 r, u64 k_rep, u64 degree,
//                k_rep * degree u64 coefficients
std::vector<std::uint8_t> serialize_matrix_header(const IsolationMatrix& matrix);
void write_matrix(std::ostream& out, const IsolationMatrix& matrix);
IsolationMatrix read_matrix(std::istream& in);
/// FNV-1a over the serialized header; sketch files carry it to pin their matrix.
std::uint64_t matrix_fingerprint(const IsolationMatrix& matrix);

namespace detail {
void write_schedule_bytes(ByteWriter& w, const Schedule& s);
Schedule read_schedule(ByteReader& r, Index d);
}  // namespace detail

}  // namespace chaining
