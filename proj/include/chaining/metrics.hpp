#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chaining/core.hpp"
#include "chaining/isolation.hpp"
#include "chaining/sketcher.hpp"

namespace chaining {

namespace detail {

/// Shewchuk's exact summation: partials hold the running sum without error;
/// the result is the correctly rounded total.
template <typename Scalar>
class ExactSum {
 public:
  void add(Scalar x) {
    using std::abs;
    std::size_t kept = 0;
    for (Scalar y : partials_) {
      if (abs(x) < abs(y)) std::swap(x, y);
      const Scalar hi = x + y;
      const Scalar lo = y - (hi - x);
      if (lo != Scalar(0)) partials_[kept++] = lo;
      x = hi;
    }
    partials_.resize(kept);
    partials_.push_back(x);
  }

  Scalar value() const {
    if (partials_.empty()) return Scalar(0);
    std::size_t n = partials_.size() - 1;
    Scalar hi = partials_[n];
    Scalar lo(0);
    while (n > 0) {
      const Scalar x = hi;
      const Scalar y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != Scalar(0)) break;
    }
    // Round half to even across the remaining partials.
    if (n > 0 && ((lo < 0 && partials_[n - 1] < 0) || (lo > 0 && partials_[n - 1] > 0))) {
      const Scalar y = lo * Scalar(2);
      const Scalar x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<Scalar> partials_;
};

}  // namespace detail

/// Sum of magnitudes, correctly rounded (hence independent of order). Being
/// correctly rounded also makes weak1_norm(f) <= l1_norm(f) hold exactly.
template <typename Scalar>
Scalar l1_norm(const BasicSparseSignal<Scalar>& f) {
  using std::abs;
  detail::ExactSum<Scalar> total;
  for (const auto& [i, v] : f) total.add(abs(v));
  return total.value();
}

/// max_i i * |f|_(i) over magnitudes sorted descending, 1-indexed.
template <typename Scalar>
Scalar weak1_norm(const BasicSparseSignal<Scalar>& f) {
  using std::abs;
  std::vector<Scalar> magnitudes;
  magnitudes.reserve(f.support_size());
  for (const auto& [i, v] : f) magnitudes.push_back(abs(v));
  std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
  Scalar best(0);
  for (std::size_t i = 0; i < magnitudes.size(); ++i) best = std::max(best, static_cast<Scalar>(i + 1) * magnitudes[i]);
  return best;
}

struct RecoveryReport {
  double l1_error = 0.0;
  double opt_error = 0.0;
  double ratio = 1.0;
  double weak1_error = 0.0;
  std::size_t support_out = 0;
  double encode_ms = 0.0;
  double decode_ms = 0.0;
};

struct Timings {
  double encode_ms = 0.0;
  double decode_ms = 0.0;
};

/// ratio is infinite when opt_error = 0 < l1_error, and 1 when both vanish.
inline double error_ratio(double l1_error, double opt_error) {
  if (opt_error > 0.0) return l1_error / opt_error;
  return l1_error > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

inline RecoveryReport recovery_report(const SparseSignal& f, const SparseSignal& estimate, Index m,
                                      Timings timings = {}) {
  const SparseSignal error = f - estimate;
  RecoveryReport report;
  report.l1_error = l1_norm(error);
  report.opt_error = l1_norm(f - best_m_approx(f, m));
  report.ratio = error_ratio(report.l1_error, report.opt_error);
  report.weak1_error = weak1_norm(error);
  report.support_out = estimate.support_size();
  report.encode_ms = timings.encode_ms;
  report.decode_ms = timings.decode_ms;
  return report;
}

/// l1 norm of the sketch payload.
template <typename Scalar>
Scalar sketch_l1(const BasicSketch<Scalar>& sketch) {
  return sketch.payload().template lpNorm<1>();
}

struct DistortionSample {
  double lower = 0.0;  // min ||Phi(f-g)||_1 / ||f-g||_1
  double upper = 0.0;  // max of the same ratio
  // max_i ||Phi e_i||_1 = (1 + L) * sum_k T_k.
  double analytic_upper = 0.0;
};

/// Empirical bi-Lipschitz constants of the sketch restricted to the given pairs.
inline DistortionSample distortion_sample(const IsolationMatrix& matrix,
                                          const std::vector<std::pair<SparseSignal, SparseSignal>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("distortion needs at least one pair");
  DistortionSample out;
  out.lower = std::numeric_limits<double>::infinity();
  out.upper = 0.0;
  for (const auto& [f, g] : pairs) {
    const SparseSignal diff = f - g;
    const double denom = l1_norm(diff);
    if (denom == 0.0) throw std::invalid_argument("distortion pair with f = g");
    const double ratio = sketch_l1(sketch_signal(diff, matrix)) / denom;
    out.lower = std::min(out.lower, ratio);
    out.upper = std::max(out.upper, ratio);
  }
  const auto& schedule = matrix.schedule();
  out.analytic_upper = static_cast<double>((1 + schedule.bit_rows) * schedule.total_trials());
  return out;
}

}  // namespace chaining
