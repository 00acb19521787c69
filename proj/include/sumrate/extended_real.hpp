#pragma once

#include <cassert>
#include <compare>
#include <limits>
#include <type_traits>

namespace sumrate {

/// A rate value in bits, or BOTTOM (negative infinity) for an infeasible pmf.
///
/// BOTTOM is stored as -inf so that fields can live in plain Eigen arrays,
/// but no arithmetic is ever done on it: code that needs a number asks for
/// value(), which asserts finiteness.
template <typename Scalar>
class ExtendedReal {
  static_assert(std::is_floating_point_v<Scalar>);

 public:
  constexpr ExtendedReal() : v_(bottom_raw()) {}
  constexpr ExtendedReal(Scalar v) : v_(v) {}  // NOLINT: implicit from a finite value

  static constexpr ExtendedReal bottom() { return ExtendedReal(bottom_raw()); }
  static constexpr Scalar bottom_raw() { return -std::numeric_limits<Scalar>::infinity(); }

  constexpr bool is_bottom() const { return v_ == bottom_raw(); }
  constexpr bool is_finite() const { return !is_bottom(); }

  constexpr Scalar value() const {
    assert(is_finite());
    return v_;
  }
  /// Storage representation (-inf for BOTTOM).
  constexpr Scalar raw() const { return v_; }

  friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) { return a.v_ == b.v_; }
  friend constexpr auto operator<=>(const ExtendedReal& a, const ExtendedReal& b) {
    // -inf orders below every finite value, which is exactly the BOTTOM rule.
    return a.v_ <=> b.v_;
  }

 private:
  Scalar v_;
};

using ExtendedRealD = ExtendedReal<double>;

template <typename Scalar>
constexpr bool is_bottom(Scalar raw) {
  return raw == -std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar = double>
constexpr Scalar bottom() {
  return -std::numeric_limits<Scalar>::infinity();
}

}  // namespace sumrate
