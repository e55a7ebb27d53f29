#pragma once
// Independent reference computations. Nothing here calls into the library's
// containment, flow or nearest-neighbour code.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Box {
  MatrixXd linear;  // half-axis vectors as columns
  VectorXd center;
};

inline bool inside(const Box& b, const VectorXd& x, double slack = 1e-12) {
  const VectorXd u = b.linear.colPivHouseholderQr().solve(x - b.center);
  return u.cwiseAbs().maxCoeff() <= 1.0 + slack;
}

/// Points of a regular grid over the target box (boundary included) that no
/// piece contains.
inline long uncovered_samples(const Box& target, const std::vector<Box>& pieces, int per_axis) {
  const int n = static_cast<int>(target.center.size());
  long total = 1;
  for (int i = 0; i < n; ++i) total *= per_axis;
  long bad = 0;
  VectorXd u(n);
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    for (int i = 0; i < n; ++i) {
      u(i) = -1.0 + 2.0 * static_cast<double>(rest % per_axis) / (per_axis - 1);
      rest /= per_axis;
    }
    const VectorXd x = target.center + target.linear * u;
    bool hit = false;
    for (const auto& p : pieces) hit = hit || inside(p, x);
    if (!hit) ++bad;
  }
  return bad;
}

inline double covering_radius(const std::vector<VectorXd>& queries,
                              const std::vector<VectorXd>& points) {
  double worst = 0.0;
  for (const auto& q : queries) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) best = std::min(best, (p - q).norm());
    worst = std::max(worst, best);
  }
  return worst;
}

/// y' = -sin(2 pi y) / (2 pi): tan(pi y) decays like e^{-t}.
inline double morse_closed_form(double tau, double y0) {
  return std::atan(std::tan(M_PI * y0) * std::exp(-tau)) / M_PI;
}

/// Same ODE by classical RK4 with a very fine step.
inline double morse_fine_rk4(double tau, double y0, int steps = 200000) {
  auto f = [](double y) { return -std::sin(2.0 * M_PI * y) / (2.0 * M_PI); };
  const double h = tau / steps;
  double y = y0;
  for (int i = 0; i < steps; ++i) {
    const double k1 = f(y), k2 = f(y + 0.5 * h * k1), k3 = f(y + 0.5 * h * k2),
                 k4 = f(y + h * k3);
    y += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  return y;
}

/// m * num / den mod 1 in exact integer arithmetic.
inline long long times_mod(int m, long long num, long long den) { return (m * num) % den; }

}  // namespace oracle
