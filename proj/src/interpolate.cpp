// SPDX-License-Identifier: Apache-2.0
#include "lrslab/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrs {
namespace {

// Fritsch-Carlson tangents for knots[first, last] (a run with strictly
// increasing abscissas).
void fill_tangents(const std::vector<Knot>& k, std::size_t first,
                   std::size_t last, std::vector<double>& m) {
  if (first == last) {
    m[first] = 0.0;
    return;
  }
  std::vector<double> delta(last - first);
  for (std::size_t i = first; i < last; ++i) {
    delta[i - first] = (k[i + 1].y - k[i].y) / (k[i + 1].x - k[i].x);
  }
  m[first] = delta.front();
  m[last] = delta.back();
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d0 = delta[i - first - 1];
    const double d1 = delta[i - first];
    m[i] = (d0 * d1 <= 0.0) ? 0.0 : 0.5 * (d0 + d1);
  }
  for (std::size_t i = first; i < last; ++i) {
    const double d = delta[i - first];
    if (d == 0.0) {
      m[i] = 0.0;
      m[i + 1] = 0.0;
      continue;
    }
    const double a = m[i] / d;
    const double b = m[i + 1] / d;
    if (a < 0.0) m[i] = 0.0;
    if (b < 0.0) m[i + 1] = 0.0;
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m[i] = tau * a * d;
      m[i + 1] = tau * b * d;
    }
  }
}

}  // namespace

Interpolant::Interpolant(std::vector<Knot> knots, Kind kind)
    : knots_(std::move(knots)), kind_(kind) {
  if (knots_.empty()) throw std::invalid_argument("interpolant needs knots");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].x >= knots_[i - 1].x)) {
      throw std::invalid_argument("interpolant knots must be sorted");
    }
  }
  if (kind_ == Kind::kMonotoneCubic) {
    tangents_.assign(knots_.size(), 0.0);
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= knots_.size(); ++i) {
      if (i == knots_.size() || knots_[i].x <= knots_[i - 1].x) {
        fill_tangents(knots_, run_start, i - 1, tangents_);
        run_start = i;
      }
    }
  }
}

double Interpolant::operator()(double x) const {
  if (x <= knots_.front().x) {
    // Right-continuity at a repeated first abscissa.
    if (x == knots_.front().x) {
      auto it = std::upper_bound(
          knots_.begin(), knots_.end(), x,
          [](double v, const Knot& k) { return v < k.x; });
      return std::prev(it)->y;
    }
    return knots_.front().y;
  }
  if (x >= knots_.back().x) return knots_.back().y;

  auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](double v, const Knot& k) { return v < k.x; });
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const Knot& a = knots_[i];
  const Knot& b = knots_[i + 1];
  const double h = b.x - a.x;
  const double t = (x - a.x) / h;
  double y;
  if (kind_ == Kind::kLinear) {
    y = a.y + t * (b.y - a.y);
  } else {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    y = h00 * a.y + h10 * h * tangents_[i] + h01 * b.y +
        h11 * h * tangents_[i + 1];
  }
  return std::clamp(y, std::min(a.y, b.y), std::max(a.y, b.y));
}

}  // namespace lrs
