#pragma once

#include <vector>

#include "massive/linalg.hpp"

namespace massive {

/// x -> linear * x + translation on R^n.
struct AffineMap {
  Mat linear;
  Vec translation;

  int dim() const { return static_cast<int>(translation.size()); }

  static AffineMap identity(int n);
  static AffineMap from_linear(const Mat& linear);
  static AffineMap scaling(int n, double factor);
  static AffineMap translation_by(const Vec& v);
};

/// Box radii, contraction rate and the +-s shift of the two-translate covering.
struct BoxSpec {
  int n = 0;
  double lambda = 0.0;
  Vec radii;
  double shift = 0.0;
};

// Fixed tolerances; callers may pass their own where an argument exists.
inline constexpr double kRootResidualTol = 1e-9;
inline constexpr double kBoxMarginTol = 1e-3;
inline constexpr double kSimilarityTol = 1e-10;

Vec apply(const AffineMap& map, const Vec& x);
AffineMap compose(const AffineMap& a, const AffineMap& b);
AffineMap inverse(const AffineMap& map);
/// map composed with itself k times (k >= 0; k = 0 gives the identity).
AffineMap power(const AffineMap& map, int k);

/// The point p with map(p) = p. Throws std::domain_error for non-contracting maps.
Vec fixed_point(const AffineMap& map);

/// (x_1, ..., x_n) -> ((-1)^(n+1) x_n, x_1, ..., x_(n-1)).
AffineMap cyclic_rotation(int n);

/// Smallest margin among the box inequalities; negative when one fails.
double box_spec_margin(const BoxSpec& spec);

/// Validates user-provided radii and shift. Throws std::domain_error naming the
/// first violated inequality.
BoxSpec make_box_spec(double lambda, const Vec& radii, double shift,
                      double min_margin = kBoxMarginTol);

/// Geometric radii r_i = rho^(i-1) with rho the geometric mean of the feasible
/// interval, shift at the midpoint of its admissible interval.
BoxSpec build_box_spec(int n, double lambda, double min_margin = kBoxMarginTol);

/// G_t = Lambda o T_t o R with T_t = t T_0 + (1 - t) T_1, T_0 the +s shift.
AffineMap build_G(const BoxSpec& spec, double t);

/// Root e with e^k = g for g = lambda * U + b, U in SO(n), lambda < 1.
/// The root shares g's fixed point and uses the principal logarithm of U.
AffineMap affine_kth_root(const AffineMap& g, int k, double tol = kRootResidualTol);

/// Principal logarithm of a rotation matrix (skew-symmetric result).
Mat rotation_log(const Mat& u);
/// exp of a skew-symmetric matrix.
Mat skew_exp(const Mat& k);

/// Splits a similarity-rotation into (lambda, U). Throws std::domain_error otherwise.
std::pair<double, Mat> similarity_split(const Mat& linear, double tol = kSimilarityTol);

/// sup_{|x| <= radius} |map(x) - x| + ||linear - I||, with the sup bounded by
/// ||linear - I|| * radius + |translation|.
double closeness_to_identity(const AffineMap& map, double domain_radius);

/// max(||linear diff||, |translation diff|).
double affine_distance(const AffineMap& a, const AffineMap& b);

}  // namespace massive
