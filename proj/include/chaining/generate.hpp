#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chaining/core.hpp"
#include "chaining/random.hpp"
#include "chaining/sketcher.hpp"

namespace chaining {

enum class NoiseKind { None, L1Budget, L1Relative, Weak1 };

/// "none", "l1:<eps>", "l1rel:<fraction of ||f_m||_1>", or "weak1:<r>".
struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  double amount = 0.0;

  static NoiseModel parse(const std::string& text);
  std::string to_string() const;
};

/// count distinct positions of [0, d) not in `excluded`, uniformly at random.
std::vector<Index> sample_positions(Index d, std::size_t count, Rng& rng, const SparseSignal* excluded = nullptr);

/// m spikes at distinct uniform positions, magnitudes uniform in [1, 10] with
/// random signs; integer_values draws magnitudes from {1, ..., 10}.
SparseSignal generate_spikes(Index d, Index m, Rng& rng, bool integer_values);

/// Spreads an l1 budget evenly over min(10m, d - |supp f|) fresh positions.
void add_l1_noise(SparseSignal& f, double budget, Index m, Rng& rng);

/// Fills every off-support position with a weak-l1 tail |f|_(i) = r / i.
void add_weak1_tail(SparseSignal& f, double r, Rng& rng);

SparseSignal generate_signal(Index d, Index m, const NoiseModel& noise, Rng& rng, bool integer_values);

/// Adds a perturbation y with ||y||_1 = budget to ceil(m) random sketch
/// scalars, split evenly with random signs. Returns the realized ||y||_1.
double perturb_sketch(Sketch& sketch, double budget, Index m, Rng& rng);

}  // namespace chaining
