#pragma once

#include <Eigen/Dense>

namespace massive {

// Dimensions stay small (boxes n <= 6, phase space <= 1 + 2 + 3), so every
// vector and matrix lives on the stack with a dynamic size below the cap.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Largest singular value.
double operator_norm(const Mat& m);

/// Smallest singular value.
double min_singular_value(const Mat& m);

inline Vec unit_vector(int n, int axis) {
  Vec v = Vec::Zero(n);
  v(axis) = 1.0;
  return v;
}

}  // namespace massive
