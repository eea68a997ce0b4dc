#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "chaining/isolation.hpp"
#include "oracles.hpp"

using namespace chaining;

namespace {

SketchParams params_for(Index d, Index m, MatrixMode mode, std::uint64_t seed = 1) {
  SketchParams p;
  p.d = d;
  p.m = m;
  p.mode = mode;
  p.seed = seed;
  return p;
}

std::vector<Index> all_positions(Index d) {
  std::vector<Index> v(d);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::string serialize(const IsolationMatrix& m) {
  std::ostringstream out;
  write_matrix(out, m);
  return out.str();
}

IsolationMatrix deserialize(const std::string& bytes) {
  std::istringstream in(bytes);
  return read_matrix(in);
}

// Upper chi-square quantile by the Wilson-Hilferty approximation.
double chi_square_critical(double dof, double z) {
  const double c = 2.0 / (9.0 * dof);
  return dof * std::pow(1.0 - c + z * std::sqrt(c), 3.0);
}

}  // namespace

TEST_CASE("single bucket: everything maps to 0") {
  const auto p = params_for(4, 1, MatrixMode::Explicit);
  const Schedule s{4, 2, {{1, 1, 1}}};
  for (auto mode : {MatrixMode::Explicit, MatrixMode::Seeded}) {
    auto q = p;
    q.mode = mode;
    const auto m = build_isolation(q, s);
    for (Index i = 0; i < 4; ++i) CHECK(m.bucket_of(0, 0, i) == 0);
  }
}

TEST_CASE("builds are deterministic in the seed") {
  for (auto mode : {MatrixMode::Explicit, MatrixMode::Seeded}) {
    const auto a = build_isolation(params_for(512, 8, mode, 5));
    const auto b = build_isolation(params_for(512, 8, mode, 5));
    const auto c = build_isolation(params_for(512, 8, mode, 6));
    CHECK(a == b);
    CHECK_FALSE(a == c);
  }
}

TEST_CASE("explicit buckets come from the counter-keyed generator") {
  const auto p = params_for(1024, 16, MatrixMode::Explicit, 77);
  const auto m = build_isolation(p);
  const auto& s = m.schedule();
  for (std::size_t k = 0; k < s.pass_count(); ++k) {
    for (std::size_t t = 0; t < s.passes[k].trials; t += 3) {
      for (Index i = 0; i < 1024; i += 7) CHECK(m.bucket_of(k, t, i) == explicit_bucket(77, k, t, i, s.passes[k].buckets));
    }
  }
}

TEST_CASE("seeded bucket_of matches a Horner oracle at d=16, r=4, degree 2") {
  const auto p = params_for(16, 1, MatrixMode::Seeded);
  const Schedule s{16, 4, {{1, 1, 4}}};
  const auto field = prf::find_prime(16, 4);
  REQUIRE(field.p == 17);
  const prf::HashSeed seed{field, 2, {{5, 11}, {3, 7}, {16, 2}}};
  const IsolationMatrix m(p, s, std::vector<prf::HashSeed>{seed});
  std::vector<oracle::u64> want;
  const auto positions = all_positions(16);
  REQUIRE(oracle::hash_all(seed.polys, 17, 4, positions, want));
  for (Index i = 0; i < 16; ++i) CHECK(m.bucket_of(0, 0, i) == want[i]);
  CHECK(m.buckets_batch(0, 0, positions) == std::vector<Index>(want.begin(), want.end()));
}

TEST_CASE("seeded bucket_of equals hash_batch on the singleton") {
  const auto m = build_isolation(params_for(700, 9, MatrixMode::Seeded, 3));
  const auto& s = m.schedule();
  for (std::size_t k = 0; k < s.pass_count(); ++k) {
    const auto& seed = m.seeds()[m.block_index(k, 0)];
    CHECK(seed.field.r == s.passes[k].buckets);
    CHECK(seed.degree == seeded_hash_degree(s.passes[k].spike_budget));
    CHECK(seed.rounds() == m.params().rejection_rounds());
    for (Index i = 0; i < 700; i += 13) {
      const Index one[1] = {i};
      CHECK(m.bucket_of(k, 0, i) == prf::hash_batch(seed, one)->front());
    }
  }
}

TEST_CASE("batch lookups agree with single lookups") {
  for (auto mode : {MatrixMode::Explicit, MatrixMode::Seeded}) {
    for (Index d : {64u, 1000u, 4096u}) {
      const auto m = build_isolation(params_for(d, 4, mode, d));
      const auto positions = all_positions(d);
      const auto& s = m.schedule();
      for (std::size_t k = 0; k < s.pass_count(); ++k) {
        const auto batch = m.buckets_batch(k, 1, positions);
        REQUIRE(batch.size() == d);
        for (Index i = 0; i < d; ++i) REQUIRE(batch[i] == m.bucket_of(k, 1, i));
        const Index one[1] = {d / 2};
        CHECK(m.buckets_batch(k, 0, one).front() == m.bucket_of(k, 0, d / 2));
        CHECK(m.buckets_batch(k, 0, std::span<const Index>{}).empty());
      }
    }
  }
}

TEST_CASE("partition: every position lands in exactly one in-range bucket") {
  for (auto mode : {MatrixMode::Explicit, MatrixMode::Seeded}) {
    const auto m = build_isolation(params_for(1024, 16, mode, 9));
    const auto& s = m.schedule();
    const auto positions = all_positions(1024);
    for (std::size_t k = 0; k < s.pass_count(); ++k) {
      for (std::size_t t = 0; t < s.passes[k].trials; ++t) {
        std::vector<Index> hist(s.passes[k].buckets, 0);
        for (Index b : m.buckets_batch(k, t, positions)) {
          REQUIRE(b < s.passes[k].buckets);
          ++hist[b];
        }
        CHECK(std::accumulate(hist.begin(), hist.end(), Index{0}) == 1024);
      }
    }
  }
}

TEST_CASE("explicit occupancy passes a chi-square test at significance 1e-6") {
  const double z = 4.753424;  // upper 1e-6 normal quantile
  for (Index buckets : {16u, 64u, 320u}) {
    const Index d = buckets * 256;
    for (std::size_t trial = 0; trial < 4; ++trial) {
      std::vector<double> hist(buckets, 0.0);
      for (Index i = 0; i < d; ++i) hist[explicit_bucket(123, 0, trial, i, buckets)] += 1.0;
      const double expected = static_cast<double>(d) / static_cast<double>(buckets);
      double stat = 0.0;
      for (double h : hist) stat += (h - expected) * (h - expected) / expected;
      CHECK(stat < chi_square_critical(static_cast<double>(buckets - 1), z));
    }
  }
}

TEST_CASE("lookup errors") {
  const auto m = build_isolation(params_for(128, 4, MatrixMode::Explicit));
  CHECK_THROWS_AS(m.bucket_of(0, 0, 128), std::out_of_range);
  CHECK_THROWS_AS(m.bucket_of(9, 0, 1), std::out_of_range);
  CHECK_THROWS_AS(m.bucket_of(0, 10000, 1), std::out_of_range);
  const std::vector<Index> bad{1, 500};
  CHECK_THROWS_AS(m.buckets_batch(0, 0, bad), std::out_of_range);
}

TEST_CASE("seeded FAIL names the failing partition") {
  const auto p = params_for(16, 1, MatrixMode::Seeded);
  const Schedule s{16, 4, {{1, 2, 4}}};
  const auto field = prf::find_prime(16, 4);
  // cutoff is 16 over p = 17: the constant 16 rejects every position.
  const prf::HashSeed good{field, 1, {{3}}};
  const prf::HashSeed bad{field, 1, {{16}, {16}}};
  const IsolationMatrix m(p, s, std::vector<prf::HashSeed>{good, bad});
  CHECK(m.bucket_of(0, 0, 5) == field.fold(3));
  try {
    m.bucket_of(0, 1, 5);
    FAIL("expected HashFailure");
  } catch (const HashFailure& e) {
    CHECK(e.pass() == 0);
    CHECK(e.trial() == 1);
  }
  const std::vector<Index> batch{1, 2};
  CHECK_THROWS_AS(m.buckets_batch(0, 1, batch), HashFailure);
}

TEST_CASE("constructor rejects inconsistent tables and seeds") {
  const auto p = params_for(4, 1, MatrixMode::Explicit);
  const Schedule s{4, 2, {{1, 1, 2}}};
  CHECK_THROWS_AS(IsolationMatrix(p, s, std::vector<std::vector<std::uint32_t>>{{0, 1, 2, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(IsolationMatrix(p, s, std::vector<std::vector<std::uint32_t>>{{0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(IsolationMatrix(p, s, std::vector<std::vector<std::uint32_t>>{}), std::invalid_argument);
  const prf::HashSeed wrong_range{prf::find_prime(4, 1), 1, {{0}}};
  CHECK_THROWS_AS(IsolationMatrix(p, s, std::vector<prf::HashSeed>{wrong_range}), std::invalid_argument);
}

TEST_CASE("serialization round trip") {
  for (auto mode : {MatrixMode::Explicit, MatrixMode::Seeded}) {
    auto p = params_for(2000, 12, mode, 42);
    const auto m = build_isolation(p);
    const auto bytes = serialize(m);
    const auto back = deserialize(bytes);
    CHECK(back == m);
    CHECK(serialize(back) == bytes);
    CHECK(matrix_fingerprint(back) == matrix_fingerprint(m));
    if (mode == MatrixMode::Explicit) CHECK(bytes.size() == serialize_matrix_header(m).size());
  }
  auto p = params_for(300, 3, MatrixMode::Seeded, 1);
  p.k_rep = 5;
  const auto m = build_isolation(p);
  CHECK(deserialize(serialize(m)) == m);
}

TEST_CASE("serialization header layout") {
  const auto m = build_isolation(params_for(256, 2, MatrixMode::Explicit, 7));
  const auto header = serialize_matrix_header(m);
  REQUIRE(header.size() > 8);
  CHECK(std::string(header.begin(), header.begin() + 4) == "CPMX");
  CHECK(header[4] == 1);  // version, little-endian
  CHECK(header[8] == 0);  // d = 256 = 0x100
  CHECK(header[9] == 1);
}

TEST_CASE("fingerprint separates parameters") {
  const auto a = build_isolation(params_for(256, 2, MatrixMode::Explicit, 7));
  const auto b = build_isolation(params_for(256, 2, MatrixMode::Explicit, 8));
  const auto c = build_isolation(params_for(256, 2, MatrixMode::Seeded, 7));
  CHECK(matrix_fingerprint(a) != matrix_fingerprint(b));
  CHECK(matrix_fingerprint(a) != matrix_fingerprint(c));
}

TEST_CASE("malformed matrix files are rejected") {
  const auto m = build_isolation(params_for(200, 3, MatrixMode::Seeded, 4));
  const auto bytes = serialize(m);
  CHECK_THROWS_AS(deserialize(""), FormatError);
  CHECK_THROWS_AS(deserialize("XXXX" + bytes.substr(4)), FormatError);
  CHECK_THROWS_AS(deserialize(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(deserialize(bytes + "x"), FormatError);
  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(deserialize(version), FormatError);
  auto schedule = bytes;
  // First pass spike budget lives after the fixed header fields and two schedule words.
  const std::size_t offset = 4 + 4 + 8 + 8 + 4 * 8 + 1 + 8 + 8 + 8 + 8;
  schedule[offset] ^= 1;
  CHECK_THROWS_AS(deserialize(schedule), FormatError);
}
