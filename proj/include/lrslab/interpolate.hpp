// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace lrs {

struct Knot {
  double x;
  double y;
};

/// Piecewise interpolant through knots with non-decreasing abscissas.
///
/// Cubic mode uses Hermite segments with Fritsch-Carlson limited tangents, so
/// every segment is monotone between its two knots and the curve never leaves
/// the range of its knot ordinates. Linear mode joins knots with straight
/// lines. Repeated abscissas split the knots into independent runs and the
/// curve is right-continuous at the jump. Outside the knot range the curve is
/// held at the first/last ordinate.
class Interpolant {
 public:
  enum class Kind { kLinear, kMonotoneCubic };

  Interpolant() = default;
  Interpolant(std::vector<Knot> knots, Kind kind);

  double operator()(double x) const;

  const std::vector<Knot>& knots() const noexcept { return knots_; }
  bool empty() const noexcept { return knots_.empty(); }

 private:
  std::vector<Knot> knots_;
  std::vector<double> tangents_;
  Kind kind_ = Kind::kLinear;
};

}  // namespace lrs
