#include "chaining/isolation.hpp"

#include <istream>
#include <limits>
#include <ostream>

#include "chaining/binary_io.hpp"
#include "chaining/random.hpp"

namespace chaining {

namespace {

constexpr std::uint32_t kMatrixVersion = 1;

void write_schedule(ByteWriter& w, const Schedule& s) {
  w.u64(s.bit_rows);
  w.u64(s.passes.size());
  for (const auto& pass : s.passes) {
    w.u64(pass.spike_budget);
    w.u64(pass.trials);
    w.u64(pass.buckets);
  }
}

}  // namespace

namespace detail {

void write_schedule_bytes(ByteWriter& w, const Schedule& s) { write_schedule(w, s); }

Schedule read_schedule(ByteReader& r, Index d) {
  Schedule s;
  s.d = d;
  s.bit_rows = r.u64();
  const auto passes = r.u64();
  if (passes == 0 || passes > 64) throw FormatError("implausible pass count");
  for (std::uint64_t k = 0; k < passes; ++k) {
    PassLayout pass;
    pass.spike_budget = r.u64();
    pass.trials = r.u64();
    pass.buckets = r.u64();
    s.passes.push_back(pass);
  }
  return s;
}

}  // namespace detail

IsolationMatrix::IsolationMatrix(SketchParams params, Schedule schedule, std::vector<std::vector<std::uint32_t>> tables)
    : params_(std::move(params)), schedule_(std::move(schedule)), tables_(std::move(tables)) {
  params_.mode = MatrixMode::Explicit;
  index_blocks();
  if (tables_.size() != block_count()) throw std::invalid_argument("one bucket table per (pass, trial) required");
  for (std::size_t k = 0; k < schedule_.pass_count(); ++k) {
    for (std::size_t t = 0; t < schedule_.passes[k].trials; ++t) {
      const auto& table = tables_[block_index(k, t)];
      if (table.size() != schedule_.d) throw std::invalid_argument("bucket table must cover every position");
      for (auto b : table) {
        if (b >= schedule_.passes[k].buckets) throw std::invalid_argument("bucket index out of range");
      }
    }
  }
}

IsolationMatrix::IsolationMatrix(SketchParams params, Schedule schedule, std::vector<prf::HashSeed> seeds)
    : params_(std::move(params)), schedule_(std::move(schedule)), seeds_(std::move(seeds)) {
  params_.mode = MatrixMode::Seeded;
  index_blocks();
  if (seeds_.size() != block_count()) throw std::invalid_argument("one hash seed per (pass, trial) required");
  for (std::size_t k = 0; k < schedule_.pass_count(); ++k) {
    for (std::size_t t = 0; t < schedule_.passes[k].trials; ++t) {
      const auto& seed = seeds_[block_index(k, t)];
      if (seed.field.r != schedule_.passes[k].buckets || seed.field.p < schedule_.d) {
        throw std::invalid_argument("hash seed does not match the schedule");
      }
    }
  }
}

void IsolationMatrix::index_blocks() {
  block_offsets_.assign(1, 0);
  for (const auto& pass : schedule_.passes) block_offsets_.push_back(block_offsets_.back() + pass.trials);
}

void IsolationMatrix::check_indices(std::size_t pass, std::size_t trial) const {
  if (pass >= schedule_.pass_count() || trial >= schedule_.passes[pass].trials) {
    throw std::out_of_range("(pass, trial) outside the schedule");
  }
}

std::size_t IsolationMatrix::block_index(std::size_t pass, std::size_t trial) const {
  check_indices(pass, trial);
  return block_offsets_[pass] + trial;
}

Index IsolationMatrix::bucket_of(std::size_t pass, std::size_t trial, Index position) const {
  const std::size_t block = block_index(pass, trial);
  if (position >= schedule_.d) throw std::out_of_range("position outside [0, d)");
  if (mode() == MatrixMode::Explicit) return tables_[block][position];
  const Index single[1] = {position};
  auto out = prf::hash_batch(seeds_[block], single);
  if (!out) throw HashFailure(pass, trial);
  return out->front();
}

std::vector<Index> IsolationMatrix::buckets_batch(std::size_t pass, std::size_t trial,
                                                  std::span<const Index> positions) const {
  const std::size_t block = block_index(pass, trial);
  for (Index position : positions) {
    if (position >= schedule_.d) throw std::out_of_range("position outside [0, d)");
  }
  if (mode() == MatrixMode::Explicit) {
    std::vector<Index> out(positions.size());
    const auto& table = tables_[block];
    for (std::size_t i = 0; i < positions.size(); ++i) out[i] = table[positions[i]];
    return out;
  }
  if (positions.empty()) return {};
  auto out = prf::hash_batch(seeds_[block], positions);
  if (!out) throw HashFailure(pass, trial);
  return std::move(*out);
}

std::uint32_t explicit_bucket(std::uint64_t seed, std::size_t pass, std::size_t trial, Index position, Index buckets) {
  const std::uint64_t key = mix64(seed, (static_cast<std::uint64_t>(pass) << 32) | trial);
  const std::uint64_t h = mix64(key, position);
  return static_cast<std::uint32_t>((static_cast<unsigned __int128>(h) * buckets) >> 64);
}

IsolationMatrix build_isolation(const SketchParams& params, const Schedule& schedule) {
  params.validate();
  if (schedule.d != params.d) throw std::invalid_argument("schedule does not match params");

  if (params.mode == MatrixMode::Explicit) {
    std::vector<std::vector<std::uint32_t>> tables;
    tables.reserve(schedule.total_trials());
    for (std::size_t k = 0; k < schedule.pass_count(); ++k) {
      const Index buckets = schedule.passes[k].buckets;
      if (buckets > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("too many buckets");
      for (std::size_t t = 0; t < schedule.passes[k].trials; ++t) {
        std::vector<std::uint32_t> table(params.d);
        for (Index i = 0; i < params.d; ++i) table[i] = explicit_bucket(params.seed, k, t, i, buckets);
        tables.push_back(std::move(table));
      }
    }
    return IsolationMatrix(params, schedule, std::move(tables));
  }

  std::vector<prf::HashSeed> seeds;
  seeds.reserve(schedule.total_trials());
  std::size_t block = 0;
  for (std::size_t k = 0; k < schedule.pass_count(); ++k) {
    const auto& pass = schedule.passes[k];
    const auto field = prf::find_prime(std::max(params.d, pass.buckets), pass.buckets);
    const auto degree = seeded_hash_degree(pass.spike_budget);
    for (std::size_t t = 0; t < pass.trials; ++t, ++block) {
      Rng rng(mix64(params.seed, 0x5eed0000ull + block));
      seeds.push_back(prf::draw_hash_seed(field, degree, params.rejection_rounds(), rng));
    }
  }
  return IsolationMatrix(params, schedule, std::move(seeds));
}

std::vector<std::uint8_t> serialize_matrix_header(const IsolationMatrix& matrix) {
  const auto& p = matrix.params();
  ByteWriter w;
  w.tag("CPMX");
  w.u32(kMatrixVersion);
  w.u64(p.d);
  w.u64(p.m);
  w.f64(p.a);
  w.f64(p.c_trials);
  w.f64(p.c_buckets);
  w.f64(p.retention_fraction);
  w.u8(static_cast<std::uint8_t>(p.mode));
  w.u64(p.seed);
  w.u64(p.rejection_rounds());
  write_schedule(w, matrix.schedule());
  return w.take();
}

std::uint64_t matrix_fingerprint(const IsolationMatrix& matrix) { return fnv1a64(serialize_matrix_header(matrix)); }

void write_matrix(std::ostream& out, const IsolationMatrix& matrix) {
  ByteWriter w;
  for (const auto& seed : matrix.seeds()) {
    w.u64(seed.field.p);
    w.u64(seed.field.r);
    w.u64(seed.rounds());
    w.u64(seed.degree);
    for (const auto& poly : seed.polys) {
      for (auto c : poly) w.u64(c);
    }
  }
  write_bytes(out, serialize_matrix_header(matrix));
  write_bytes(out, w.bytes());
}

IsolationMatrix read_matrix(std::istream& in) {
  ByteReader r(in);
  r.expect_tag("CPMX");
  if (r.u32() != kMatrixVersion) throw FormatError("unsupported matrix version");
  SketchParams params;
  params.d = r.u64();
  params.m = r.u64();
  params.a = r.f64();
  params.c_trials = r.f64();
  params.c_buckets = r.f64();
  params.retention_fraction = r.f64();
  const auto mode = r.u8();
  if (mode > 1) throw FormatError("unknown matrix mode");
  params.mode = static_cast<MatrixMode>(mode);
  params.seed = r.u64();
  params.k_rep = r.u64();
  if (params.k_rep == SketchParams{params.d}.rejection_rounds()) params.k_rep = 0;
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid matrix parameters: ") + e.what());
  }
  Schedule schedule = detail::read_schedule(r, params.d);
  if (schedule != derive_schedule(params)) throw FormatError("stored schedule disagrees with parameters");

  if (params.mode == MatrixMode::Explicit) {
    r.expect_end();
    return build_isolation(params, schedule);
  }

  std::vector<prf::HashSeed> seeds;
  for (std::size_t k = 0; k < schedule.pass_count(); ++k) {
    for (std::size_t t = 0; t < schedule.passes[k].trials; ++t) {
      prf::HashSeed seed;
      const auto p = r.u64();
      const auto range = r.u64();
      const auto rounds = r.u64();
      seed.degree = r.u64();
      if (!prf::is_prime(p) || range != schedule.passes[k].buckets || rounds != params.rejection_rounds() || seed.degree == 0 ||
          seed.degree > (1u << 24)) {
        throw FormatError("malformed hash seed record");
      }
      seed.field = prf::make_field(p, range);
      seed.polys.assign(rounds, std::vector<prf::Residue>(seed.degree));
      for (auto& poly : seed.polys) {
        for (auto& c : poly) {
          c = r.u64();
          if (c >= p) throw FormatError("hash coefficient outside the field");
        }
      }
      seeds.push_back(std::move(seed));
    }
  }
  r.expect_end();
  return IsolationMatrix(params, schedule, std::move(seeds));
}

}  // namespace chaining
