// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chaining/commands.hpp"
#include "chaining/decoder.hpp"
#include "chaining/metrics.hpp"
#include "chaining/prf.hpp"
#include "oracles.hpp"

using namespace chaining;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

SketchParams base_params(Index d, Index m, MatrixMode mode, std::uint64_t seed) {
  SketchParams p;
  p.d = d;
  p.m = m;
  p.mode = mode;
  p.seed = seed;
  return p;
}

std::vector<cli::ExperimentRow> sweep(Index d, Index m, MatrixMode mode, std::size_t runs, const std::string& noise,
                                      const std::string& meas, std::uint64_t seed) {
  cli::ExperimentOptions options;
  options.ds = {d};
  options.ms = {m};
  options.noises = {noise};
  options.meas_noises = {meas};
  options.runs = runs;
  options.base = base_params(d, m, mode, seed);
  options.integer_values = true;
  return cli::run_experiment(options);
}

Outcome exact_recovery(MatrixMode mode, int required) {
  Outcome out{true, ""};
  for (Index m : {4u, 16u, 64u}) {
    const auto start = Clock::now();
    const auto rows = sweep(4096, m, mode, 200, "none", "0", 1000 + m);
    const double secs = seconds_since(start);
    const auto exact = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.exact; });
    const auto fails = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.hash_failed; });
    const bool ok = exact >= required && secs < 120.0;
    out.pass = out.pass && ok;
    out.detail += " m=" + std::to_string(m) + ":" + std::to_string(exact) + "/200";
    if (mode == MatrixMode::Seeded) out.detail += "(hashFAIL " + std::to_string(fails) + ")";
    out.detail += fmt(",%.1fs", secs);
  }
  out.detail += " (need >=" + std::to_string(required) + "/200, <120s per cell)";
  return out;
}

struct NoiseSweep {
  std::vector<std::vector<cli::ExperimentRow>> cells;
  std::vector<double> fractions{0.01, 0.1, 1.0};
};

const NoiseSweep& noise_sweep() {
  static NoiseSweep s = [] {
    NoiseSweep n;
    for (double eps : n.fractions) {
      std::ostringstream model;
      model << "l1rel:" << eps;
      n.cells.push_back(sweep(4096, 16, MatrixMode::Explicit, 100, model.str(), "0", 3000));
    }
    return n;
  }();
  return s;
}

const double kLogBound = 100.0 * (1.0 + std::log(16.0));
// Regression pins on the recorded medians: measured about 1.02 (noise, worst
// cell) and 0 (sketch perturbation) at the default constants.
const double kNoisePin = 2.0;
const double kPerturbationPin = 1.0;

Outcome noise_stability() {
  Outcome out{true, ""};
  const auto& s = noise_sweep();
  for (std::size_t c = 0; c < s.cells.size(); ++c) {
    std::vector<double> ratios;
    for (const auto& r : s.cells[c]) ratios.push_back(r.report.ratio);
    const double med = median(ratios);
    out.pass = out.pass && med <= kLogBound && med <= kNoisePin;
    out.detail += fmt(" eps=%g", s.fractions[c]) + fmt(":median %.3f", med) +
                  fmt(" (C_emp %.3f)", med / (1.0 + std::log(16.0)));
  }
  out.detail += fmt(" bound %.1f,", kLogBound) + fmt(" pin %.1f", kNoisePin);
  return out;
}

Outcome measurement_robustness() {
  const auto rows = sweep(4096, 16, MatrixMode::Explicit, 100, "none", "rel:0.1", 4000);
  std::vector<double> ratios;
  for (const auto& r : rows) ratios.push_back(r.report.l1_error / r.meas_noise_l1);
  const double med = median(ratios);
  const double worst = *std::max_element(ratios.begin(), ratios.end());
  const auto exact = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.exact; });
  return {med <= kLogBound && med <= kPerturbationPin,
          fmt(" median ||f-fhat||_1/||y||_1 %.3f", med) + fmt(" (C_emp %.3f),", med / (1.0 + std::log(16.0))) +
              fmt(" max %.3f,", worst) + " exact " + std::to_string(exact) + "/100," + fmt(" bound %.1f,", kLogBound) +
              fmt(" pin %.1f", kPerturbationPin)};
}

Outcome weak1_bound() {
  Outcome out{true, ""};
  const auto& s = noise_sweep();
  std::size_t violations = 0;
  for (std::size_t c = 0; c < s.cells.size(); ++c) {
    std::vector<double> weak, strong;
    for (const auto& r : s.cells[c]) {
      if (r.report.weak1_error > r.report.l1_error) ++violations;
      weak.push_back(r.report.weak1_error / r.report.opt_error);
      strong.push_back(r.report.ratio);
    }
    const double mw = median(weak), ml = median(strong);
    out.pass = out.pass && mw <= ml;
    out.detail += fmt(" eps=%g", s.fractions[c]) + fmt(":weak1 %.3f", mw) + fmt(" <= l1 %.3f", ml);
  }
  out.pass = out.pass && violations == 0;
  out.detail += " weak1>l1 reports: " + std::to_string(violations);
  return out;
}

Outcome operator_norm_identity() {
  std::size_t mismatches = 0, checked = 0;
  for (auto mode : {MatrixMode::Explicit, MatrixMode::Seeded}) {
    const auto matrix = build_isolation(base_params(4096, 16, mode, 6));
    const double trials = static_cast<double>(matrix.schedule().total_trials());
    for (Index i = 0; i < 4096; ++i) {
      SparseSignal e(4096);
      e.set(i, 1.0);
      const double norm = sketch_signal(e, matrix).payload().lpNorm<1>();
      mismatches += norm != (1.0 + std::popcount(i)) * trials;
      ++checked;
    }
  }
  return {mismatches == 0, " " + std::to_string(checked - mismatches) + "/" + std::to_string(checked) +
                               " basis vectors exact (explicit and seeded)"};
}

Outcome linearity() {
  Rng rng(7);
  std::size_t exact = 0;
  const auto explicit_m = build_isolation(base_params(4096, 16, MatrixMode::Explicit, 7));
  const auto seeded_m = build_isolation(base_params(4096, 16, MatrixMode::Seeded, 7));
  auto random_signal = [&] {
    SparseSignal f(4096);
    const std::size_t n = 1 + uniform_below(rng, 64);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = static_cast<double>(static_cast<std::int64_t>(uniform_below(rng, std::uint64_t{1} << 31)) -
                                           (std::int64_t{1} << 30));
      f.set(uniform_below(rng, 4096), v);
    }
    return f;
  };
  for (int i = 0; i < 1000; ++i) {
    const auto& matrix = i % 2 ? seeded_m : explicit_m;
    const auto f = random_signal();
    const auto g = random_signal();
    exact += sketch_signal(f + g, matrix) == sketch_signal(f, matrix) + sketch_signal(g, matrix);
  }
  return {exact == 1000, " " + std::to_string(exact) + "/1000 pairs bit-exact"};
}

Outcome hash_correctness() {
  using namespace chaining::prf;
  Rng rng(8);
  auto coeffs = [&](std::size_t n, Residue p, bool monic) {
    std::vector<Residue> c(n);
    for (auto& x : c) x = uniform_below(rng, p);
    if (monic && n) c.back() = 1;
    return c;
  };

  std::size_t mpe_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const Residue p = oracle::next_prime(2 + uniform_below(rng, Residue{1} << 31));
    const std::size_t n = 1 + uniform_below(rng, 256);
    const auto pts = coeffs(n, p, false);
    const auto g = coeffs(1 + uniform_below(rng, n), p, false);
    const auto got = mpe(Polynomial(g), pts, p);
    bool same = true;
    for (std::size_t j = 0; j < n; ++j) same = same && got[j] == oracle::horner(g, pts[j], p);
    mpe_ok += same;
  }

  const auto field = make_field(5, 2);
  const std::vector<Index> pos{0, 1};
  std::map<std::pair<Index, Index>, long> counts;
  long successes = 0;
  std::array<Residue, 6> c{};
  for (long code = 0; code < 15625; ++code) {
    long rest = code;
    for (auto& x : c) {
      x = static_cast<Residue>(rest % 5);
      rest /= 5;
    }
    const HashSeed seed{field, 2, {{c[0], c[1]}, {c[2], c[3]}, {c[4], c[5]}}};
    if (const auto out = hash_batch(seed, pos)) {
      ++successes;
      ++counts[{(*out)[0], (*out)[1]}];
    }
  }
  bool uniform = counts.size() == 4;
  for (const auto& [pair, n] : counts) uniform = uniform && 4 * n == successes;

  std::size_t arith_ok = 0;
  for (int i = 0; i < 10000; ++i) {
    const Residue p = i % 2 ? (Residue{1} << 61) - 1 : oracle::next_prime(2 + uniform_below(rng, 1u << 30));
    const auto u = coeffs(uniform_below(rng, 100), p, false);
    const auto v = coeffs(uniform_below(rng, 100), p, false);
    const auto q = coeffs(2 + uniform_below(rng, 60), p, true);
    const bool mul_ok = poly_mul(Polynomial(u), Polynomial(v), p).coefficients() == oracle::mul(u, v, p);
    const bool mod_ok = poly_mod(poly_mul(Polynomial(u), Polynomial(v), p), Polynomial(q), p).coefficients() ==
                        oracle::mod(oracle::mul(u, v, p), q, p);
    arith_ok += mul_ok && mod_ok;
  }

  std::ostringstream detail;
  detail << " (a) mpe=Horner " << mpe_ok << "/1000; (b) " << successes << " successful seeds, pair counts";
  for (const auto& [pair, n] : counts) detail << ' ' << n;
  detail << (uniform ? " uniform" : " NOT uniform") << "; (c) mul/mod=schoolbook " << arith_ok << "/10000";
  return {mpe_ok == 1000 && uniform && arith_ok == 10000, detail.str()};
}

Outcome sketch_size() {
  double worst = 0.0;
  std::size_t cells = 0;
  bool ok = true;
  for (Index log_d = 8; log_d <= 20; ++log_d) {
    const Index d = Index{1} << log_d;
    for (Index m = 1; m <= 64 && m <= d / 4; m *= 2) {
      const auto s = derive_schedule(base_params(d, m, MatrixMode::Explicit, 0));
      const double bound = 64.0 * static_cast<double>(m) * static_cast<double>(log_d * log_d);
      const double ratio = static_cast<double>(s.scalar_count()) / bound;
      worst = std::max(worst, ratio);
      ok = ok && static_cast<double>(s.scalar_count()) <= bound;
      ++cells;
    }
  }
  return {ok, " " + std::to_string(cells) + " cells d=2^8..2^20 x m=1..64, max scalars/(64 m log2(d)^2) = " +
                  fmt("%.3f", worst)};
}

Outcome sublinear_decode() {
  auto median_decode_ms = [](Index d) {
    std::vector<double> times;
    for (int run = 0; run < 20; ++run) {
      const auto params = base_params(d, 16, MatrixMode::Seeded, 9000 + run);
      const auto matrix = build_isolation(params);
      Rng rng(mix64(run, d));
      const auto f = generate_spikes(d, 16, rng, true);
      const auto sketch = sketch_signal(f, matrix);
      const auto start = Clock::now();
      const auto estimate = recover(sketch, matrix, 16);
      times.push_back(seconds_since(start) * 1e3);
      if (estimate.support_size() > 16) return -1.0;
    }
    return median(times);
  };
  // Warm up caches and the allocator before timing.
  median_decode_ms(Index{1} << 12);
  const double small = median_decode_ms(Index{1} << 14);
  const double large = median_decode_ms(Index{1} << 20);
  const double ratio = large / small;
  return {small > 0 && large > 0 && ratio < 4.0,
          fmt(" seeded m=16: median decode %.2f ms at d=2^14,", small) + fmt(" %.2f ms at d=2^20,", large) +
              fmt(" ratio %.2f (need < 4)", ratio)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact recovery, explicit", [] { return exact_recovery(MatrixMode::Explicit, 198); }},
      {"exact recovery, seeded", [] { return exact_recovery(MatrixMode::Seeded, 196); }},
      {"noise stability", noise_stability},
      {"measurement robustness", measurement_robustness},
      {"weak-1 bound", weak1_bound},
      {"operator-norm identity", operator_norm_identity},
      {"linearity", linearity},
      {"hash correctness", hash_correctness},
      {"sketch size", sketch_size},
      {"sublinear decode", sublinear_decode},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string(" exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %2zu %s:%s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
