#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <vector>

#include "chaining/bittest.hpp"
#include "chaining/core.hpp"
#include "chaining/isolation.hpp"
#include "chaining/sketcher.hpp"

namespace chaining {

namespace detail {

template <typename Scalar>
void rank_by_magnitude(BasicSpikeList<Scalar>& spikes) {
  std::sort(spikes.begin(), spikes.end(), [](const auto& x, const auto& y) {
    return larger_magnitude_first(x.position, x.value, y.position, y.value);
  });
}

template <typename Scalar>
Scalar median(std::vector<Scalar> values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const Scalar upper = values[mid];
  if (n % 2 == 1) return upper;
  const Scalar lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / Scalar(2);
}

}  // namespace detail

/// Decodes every measurement of one trial and keeps the m_k largest spikes.
///
/// Zero-total buckets and positions >= d are discarded; a position decoded from
/// several buckets keeps its largest-magnitude estimate.
template <typename Scalar>
BasicSpikeList<Scalar> run_trial(const BasicSketch<Scalar>& sketch, std::size_t pass, std::size_t trial) {
  using std::abs;
  const auto& schedule = sketch.schedule();
  const auto block = sketch.block(pass, trial);
  std::unordered_map<Index, Scalar> best;
  for (Eigen::Index n = 0; n < block.rows(); ++n) {
    const auto row = block.row(n);
    if (row(0) == Scalar(0)) continue;
    const auto spike = decode_measurement(row, schedule.d);
    if (!spike.valid) continue;
    auto [it, inserted] = best.try_emplace(spike.position, spike.value);
    if (!inserted && abs(spike.value) > abs(it->second)) it->second = spike.value;
  }
  BasicSpikeList<Scalar> spikes;
  spikes.reserve(best.size());
  for (const auto& [position, value] : best) spikes.push_back({position, value});
  detail::rank_by_magnitude(spikes);
  const auto budget = static_cast<std::size_t>(schedule.passes[pass].spike_budget);
  if (spikes.size() > budget) spikes.resize(budget);
  return spikes;
}

/// Keeps positions found in strictly more than retention_fraction * T trials,
/// valued by the median of their per-trial estimates. Output is ordered by
/// position.
template <typename Scalar>
BasicSpikeList<Scalar> combine_trials(const std::vector<BasicSpikeList<Scalar>>& trial_lists,
                                      double retention_fraction) {
  std::map<Index, std::vector<Scalar>> estimates;
  for (const auto& list : trial_lists) {
    for (const auto& spike : list) estimates[spike.position].push_back(spike.value);
  }
  const double threshold = retention_fraction * static_cast<double>(trial_lists.size());
  BasicSpikeList<Scalar> out;
  for (auto& [position, values] : estimates) {
    if (static_cast<double>(values.size()) > threshold) out.push_back({position, detail::median(std::move(values))});
  }
  return out;
}

/// Chaining Pursuit without the final pruning step. Each pass decodes its
/// trials against the residual sketch, combines them, and subtracts the
/// encoded spikes from the remaining passes. Values found in several passes
/// are summed; exact zeros are dropped.
template <typename Scalar>
BasicSpikeList<Scalar> chaining_pursuit_proper(const BasicSketch<Scalar>& sketch, const IsolationMatrix& matrix) {
  detail::require_matching(sketch.schedule(), matrix);
  const auto& schedule = matrix.schedule();
  const double retention = matrix.params().retention_fraction;

  BasicSketch<Scalar> residual = sketch;
  std::map<Index, Scalar> estimate;
  for (std::size_t k = 0; k < schedule.pass_count(); ++k) {
    std::vector<BasicSpikeList<Scalar>> trial_lists;
    trial_lists.reserve(schedule.passes[k].trials);
    for (std::size_t t = 0; t < schedule.passes[k].trials; ++t) trial_lists.push_back(run_trial(residual, k, t));
    const auto found = combine_trials(trial_lists, retention);
    for (const auto& spike : found) estimate[spike.position] += spike.value;
    // Blocks of passes <= k are never read again.
    if (k + 1 < schedule.pass_count() && !found.empty()) {
      residual -= encode_spikes(found, matrix, k + 1);
    }
  }

  BasicSpikeList<Scalar> out;
  for (const auto& [position, value] : estimate) {
    if (value != Scalar(0)) out.push_back({position, value});
  }
  return out;
}

/// The m largest-magnitude spikes, ties to the smaller position.
template <typename Scalar>
BasicSpikeList<Scalar> prune(BasicSpikeList<Scalar> spikes, Index m) {
  detail::rank_by_magnitude(spikes);
  if (spikes.size() > m) spikes.resize(static_cast<std::size_t>(m));
  return spikes;
}

template <typename Scalar>
BasicSparseSignal<Scalar> to_signal(const BasicSpikeList<Scalar>& spikes, Index d) {
  BasicSparseSignal<Scalar> f(d);
  for (const auto& s : spikes) f.set(s.position, s.value);
  return f;
}

template <typename Scalar>
BasicSpikeList<Scalar> to_spikes(const BasicSparseSignal<Scalar>& f) {
  BasicSpikeList<Scalar> spikes;
  for (const auto& [i, v] : f) spikes.push_back({i, v});
  return spikes;
}

/// Best m-term approximation recovered from a sketch.
template <typename Scalar>
BasicSparseSignal<Scalar> recover(const BasicSketch<Scalar>& sketch, const IsolationMatrix& matrix, Index m) {
  return to_signal(prune(chaining_pursuit_proper(sketch, matrix), m), matrix.dimension());
}

/// Upper bound on chaining_pursuit_proper's output size, in units of m.
inline double support_constant(const Schedule& schedule, double retention_fraction, Index m) {
  double total = 0.0;
  for (const auto& pass : schedule.passes) {
    total += std::ceil(static_cast<double>(pass.spike_budget) / retention_fraction);
  }
  return total / static_cast<double>(m);
}

}  // namespace chaining
