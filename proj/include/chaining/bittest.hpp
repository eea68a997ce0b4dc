#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "chaining/core.hpp"

namespace chaining {

/// One bucket's bit-test result in canonical layout: entry 0 is the total c,
/// entries 1..L are the bit masses b, most significant bit first.
template <typename Scalar>
using Measurement = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
Measurement<Scalar> empty_measurement(Index bit_rows) {
  return Measurement<Scalar>::Zero(static_cast<Eigen::Index>(bit_rows + 1));
}

template <typename Derived>
auto measurement_total(const Eigen::DenseBase<Derived>& meas) {
  return meas(0);
}

template <typename Derived>
auto measurement_bits(const Eigen::DenseBase<Derived>& meas) {
  return meas.tail(meas.size() - 1);
}

/// Row j of the binary block tests bit (L - 1 - j) of the position.
inline bool position_bit(Index position, Index bit_rows, Index row) {
  return ((position >> (bit_rows - 1 - row)) & 1u) != 0;
}

/// Adds value at position to a measurement in place.
template <typename Derived>
void accumulate(Eigen::DenseBase<Derived>& meas, Index position, typename Derived::Scalar value) {
  const auto bit_rows = static_cast<Index>(meas.size() - 1);
  if (bit_rows < 64 && (position >> bit_rows) != 0) {
    throw std::out_of_range("position does not fit the bit-test layout");
  }
  meas(0) += value;
  for (Index row = 0; row < bit_rows; ++row) {
    if (position_bit(position, bit_rows, row)) meas(static_cast<Eigen::Index>(row + 1)) += value;
  }
}

template <typename Derived>
void accumulate(Eigen::DenseBase<Derived>&& meas, Index position, typename Derived::Scalar value) {
  accumulate(meas, position, value);
}

template <typename Scalar>
struct DecodedSpike {
  Index position = 0;
  Scalar value = 0;
  bool valid = true;
};

/// Reads a (position, value) estimate off a measurement.
///
/// Bit j is one iff the bit-one mass strictly dominates the bit-zero mass;
/// ties resolve to zero. Positions at or beyond d are flagged invalid.
template <typename Derived>
DecodedSpike<typename Derived::Scalar> decode_measurement(const Eigen::DenseBase<Derived>& meas, Index d) {
  using std::abs;
  const auto bit_rows = static_cast<Index>(meas.size() - 1);
  const auto total = meas(0);
  Index position = 0;
  for (Index row = 0; row < bit_rows; ++row) {
    const auto one_mass = meas(static_cast<Eigen::Index>(row + 1));
    position <<= 1;
    if (abs(one_mass) > abs(total - one_mass)) position |= 1u;
  }
  return {position, total, position < d};
}

}  // namespace chaining
