#pragma once

#include <span>

namespace cdt {

/// Smooth hinge: 0 for f >= 1, (1 - f)^2 / 2 on (0, 1), 1/2 - f otherwise.
inline double smooth_hinge(double f) {
  if (f >= 1.0) return 0.0;
  if (f > 0.0) return 0.5 * (1.0 - f) * (1.0 - f);
  return 0.5 - f;
}

inline double smooth_hinge_grad(double f) {
  if (f >= 1.0) return 0.0;
  if (f > 0.0) return f - 1.0;
  return -1.0;
}

/// Threshold label for threshold index q in 1..r-1: +1 when q >= rating.
inline double ordinal_sign(int q, int rating) { return q >= rating ? 1.0 : -1.0; }

/// 1 + number of thresholds strictly below `score`. Thresholds are taken in
/// stored order; no sorting is assumed.
inline int decode_rating(double score, std::span<const double> thresholds) {
  int rating = 1;
  for (double t : thresholds) {
    if (score > t) ++rating;
  }
  return rating;
}

/// |d - 1|: pulls membership row sums toward one.
inline double row_sum_penalty(double d) {
  if (d < 1.0) return 1.0 - d;
  if (d > 1.0) return d - 1.0;
  return 0.0;
}

inline double row_sum_penalty_grad(double d) {
  if (d < 1.0) return -1.0;
  if (d > 1.0) return 1.0;
  return 0.0;
}

/// d for d < 0, else 0.
inline double negativity_penalty(double d) { return d < 0.0 ? d : 0.0; }

inline double negativity_penalty_grad(double d) { return d < 0.0 ? 1.0 : 0.0; }

}  // namespace cdt
