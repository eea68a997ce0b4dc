#include "chaining/generate.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "chaining/core.hpp"
#include "chaining/metrics.hpp"

namespace chaining {

NoiseModel NoiseModel::parse(const std::string& text) {
  if (text == "none") return {};
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("noise model must be none, l1:x, l1rel:x or weak1:r");
  const std::string kind = text.substr(0, colon);
  std::size_t used = 0;
  double amount = 0.0;
  try {
    amount = std::stod(text.substr(colon + 1), &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad noise amount in '" + text + "'");
  }
  if (used != text.size() - colon - 1 || !(amount >= 0.0)) throw std::invalid_argument("bad noise amount in '" + text + "'");
  if (kind == "l1") return {NoiseKind::L1Budget, amount};
  if (kind == "l1rel") return {NoiseKind::L1Relative, amount};
  if (kind == "weak1") return {NoiseKind::Weak1, amount};
  throw std::invalid_argument("unknown noise model '" + kind + "'");
}

std::string NoiseModel::to_string() const {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::L1Budget: return "l1:" + std::to_string(amount);
    case NoiseKind::L1Relative: return "l1rel:" + std::to_string(amount);
    case NoiseKind::Weak1: return "weak1:" + std::to_string(amount);
  }
  return "none";
}

std::vector<Index> sample_positions(Index d, std::size_t count, Rng& rng, const SparseSignal* excluded) {
  const Index taken = excluded ? excluded->support_size() : 0;
  if (count > d - taken) throw std::invalid_argument("not enough free positions to sample");
  std::vector<Index> out;
  out.reserve(count);
  // Rejection sampling while sparse, a shuffled complement otherwise.
  if (count * 4 <= d - taken) {
    std::unordered_set<Index> chosen;
    while (out.size() < count) {
      const Index i = uniform_below(rng, d);
      if (excluded && (*excluded)[i] != 0.0) continue;
      if (chosen.insert(i).second) out.push_back(i);
    }
    return out;
  }
  std::vector<Index> pool;
  pool.reserve(d - taken);
  for (Index i = 0; i < d; ++i) {
    if (!excluded || (*excluded)[i] == 0.0) pool.push_back(i);
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_below(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

namespace {

double random_sign(Rng& rng) { return (rng() & 1u) ? 1.0 : -1.0; }

}  // namespace

SparseSignal generate_spikes(Index d, Index m, Rng& rng, bool integer_values) {
  if (m > d) throw std::invalid_argument("m must not exceed d");
  SparseSignal f(d);
  for (Index i : sample_positions(d, m, rng)) {
    const double magnitude =
        integer_values ? static_cast<double>(1 + uniform_below(rng, 10)) : uniform_real(rng, 1.0, 10.0);
    f.set(i, random_sign(rng) * magnitude);
  }
  return f;
}

void add_l1_noise(SparseSignal& f, double budget, Index m, Rng& rng) {
  if (budget <= 0.0) return;
  const std::size_t slots = static_cast<std::size_t>(std::min<Index>(10 * m, f.dimension() - f.support_size()));
  if (slots == 0) return;
  const double share = budget / static_cast<double>(slots);
  for (Index i : sample_positions(f.dimension(), slots, rng, &f)) f.set(i, random_sign(rng) * share);
}

void add_weak1_tail(SparseSignal& f, double r, Rng& rng) {
  if (r <= 0.0) return;
  const std::size_t free = static_cast<std::size_t>(f.dimension() - f.support_size());
  const auto order = sample_positions(f.dimension(), free, rng, &f);
  for (std::size_t j = 0; j < order.size(); ++j) f.set(order[j], random_sign(rng) * r / static_cast<double>(j + 1));
}

SparseSignal generate_signal(Index d, Index m, const NoiseModel& noise, Rng& rng, bool integer_values) {
  SparseSignal f = generate_spikes(d, m, rng, integer_values);
  switch (noise.kind) {
    case NoiseKind::None: break;
    case NoiseKind::L1Budget: add_l1_noise(f, noise.amount, m, rng); break;
    case NoiseKind::L1Relative: add_l1_noise(f, noise.amount * l1_norm(f), m, rng); break;
    case NoiseKind::Weak1: add_weak1_tail(f, noise.amount, rng); break;
  }
  return f;
}

double perturb_sketch(Sketch& sketch, double budget, Index m, Rng& rng) {
  if (budget <= 0.0) return 0.0;
  const Index scalars = sketch.scalar_count();
  const std::size_t slots = static_cast<std::size_t>(std::min<Index>(std::max<Index>(m, 1), scalars));
  std::vector<Index> chosen;
  std::unordered_set<Index> seen;
  while (chosen.size() < slots) {
    const Index s = uniform_below(rng, scalars);
    if (seen.insert(s).second) chosen.push_back(s);
  }
  const double share = budget / static_cast<double>(slots);
  for (Index s : chosen) sketch.payload()(static_cast<Eigen::Index>(s)) += random_sign(rng) * share;
  return budget;
}

}  // namespace chaining
