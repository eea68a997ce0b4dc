#include "chaining/core.hpp"

#include <bit>
#include <cmath>
#include <numeric>

namespace chaining {

Index bit_rows_for(Index d) { return static_cast<Index>(std::bit_width(d - 1)); }

std::uint64_t SketchParams::rejection_rounds() const {
  if (k_rep != 0) return k_rep;
  return static_cast<std::uint64_t>(std::ceil(4.0 * std::log2(static_cast<double>(d))));
}

void SketchParams::validate() const {
  if (d < 2) throw std::invalid_argument("d must be at least 2");
  if (m < 1 || m > d) throw std::invalid_argument("m must lie in [1, d]");
  // Bucket counts shrink like 2^-k; spike budgets must shrink faster.
  if (!(a > 2.0)) throw std::invalid_argument("pass base a must exceed 2");
  if (!(c_trials > 0.0)) throw std::invalid_argument("c_trials must be positive");
  if (!(c_buckets > 0.0)) throw std::invalid_argument("c_buckets must be positive");
  if (!(retention_fraction > 0.0 && retention_fraction <= 1.0)) {
    throw std::invalid_argument("retention fraction must lie in (0, 1]");
  }
  if (d > (Index{1} << 60)) throw std::invalid_argument("d above 2^60 is not supported");
}

Index Schedule::total_trials() const {
  return std::accumulate(passes.begin(), passes.end(), Index{0},
                         [](Index acc, const PassLayout& p) { return acc + p.trials; });
}

Index Schedule::total_measurements() const {
  return std::accumulate(passes.begin(), passes.end(), Index{0},
                         [](Index acc, const PassLayout& p) { return acc + p.trials * p.buckets; });
}

Schedule derive_schedule(const SketchParams& params) {
  params.validate();

  // ceil(log_a m) as the least e with a^e >= m.
  Index exponent = 0;
  for (double power = 1.0; power < static_cast<double>(params.m); power *= params.a) ++exponent;

  Schedule s;
  s.d = params.d;
  s.bit_rows = bit_rows_for(params.d);
  const double log_d = std::log2(static_cast<double>(params.d));
  const double m = static_cast<double>(params.m);

  double spike_scale = 1.0;
  double bucket_scale = 1.0;
  for (Index k = 0; k <= exponent; ++k) {
    PassLayout pass;
    pass.spike_budget = static_cast<Index>(std::ceil(m / spike_scale));
    pass.trials = static_cast<Index>(std::ceil(params.c_trials * static_cast<double>(k + 1) * log_d));
    pass.buckets = static_cast<Index>(std::ceil(params.c_buckets * m / bucket_scale));
    pass.spike_budget = std::max<Index>(pass.spike_budget, 1);
    pass.trials = std::max<Index>(pass.trials, 1);
    pass.buckets = std::max<Index>(pass.buckets, 1);
    s.passes.push_back(pass);
    spike_scale *= params.a;
    bucket_scale *= 2.0;
  }
  return s;
}

}  // namespace chaining
