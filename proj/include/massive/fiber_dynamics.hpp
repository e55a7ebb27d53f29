#pragma once

#include <optional>

#include "massive/affine_core.hpp"
#include "massive/execution.hpp"
#include "massive/region_geometry.hpp"

namespace massive {

// Fiber manifold: the flat torus T^d, d in {1, 2}, coordinates in [0, 1).
// p = (1/2, ..., 1/2) is the minimum of the Morse function
//   H(x) = sum_i (1 - cos 2 pi (x_i - 1/2)) / (2 pi)^2.
// "Chart" coordinates are y = x - p wrapped into [-1/2, 1/2)^d.

Vec wrap_torus(const Vec& x);
Vec torus_delta(const Vec& a, const Vec& b);  // a - b wrapped into [-1/2, 1/2)
double torus_distance(const Vec& a, const Vec& b);

/// Time-tau map of the descending gradient flow of H, RK4 with step
/// tau / ceil(tau / 0.01). Optionally returns the Jacobian.
Vec morse_flow_map(double tau, const Vec& x, Mat* jacobian = nullptr);

/// Closed-form d = 1 solution of y' = -sin(2 pi y) / (2 pi) in chart coordinates.
double morse_flow_exact_1d(double tau, double y0);

/// sup |S^tau(x) - x| + sup ||DS^tau - I|| over T^d, from the closed form.
double morse_closeness(int d, double tau);

struct FiberParams {
  int d = 1;
  double lambda = 0.9;
  int k = 1;             // <= 0: smallest k in 1..64 with E_t eps/2-close to Id
  double epsilon = 0.25;
  double tau = 0.3;      // <= 0: largest tau with S^tau eps/2-close to Id
  double r_hat = 0.249;
  double r_check = 0.1;  // <= 0: exp(-3.5) * r_field
  double shrink = 0.0;   // <= 0: covering slack / (2k)
  double cover_margin = 1e-3;
  int max_retries = 5;
};

/// The arc t -> f_t. Inside the ball of radius r_check about p it equals E_t
/// (in chart coordinates, scaled by `scale`); outside radius r_hat it equals
/// S^tau. In between it is the time-tau map of the blended vector field
///   Z = beta * W_t / tau + (1 - beta) * V,
/// with W_t(y) = M (y - q_t) the generator of E_t, V = -grad H, and beta a
/// quintic step in log-radius between r_check and exp(-tau) r_hat.
struct FiberArc {
  int d = 1;
  double tau = 0.0;
  double r_hat = 0.0;
  double r_check = 0.0;
  double r_field = 0.0;  // beta vanishes beyond this radius
  double scale = 1.0;    // box units -> chart units
  int k = 1;
  double lambda = 0.9;
  BoxSpec box;
  Mat linear;            // linear part of every E_t
  Mat generator;         // M with exp(M) = linear
  Vec q_plus;            // chart fixed point of E_1; q_t = (2t - 1) q_plus
  RegionA region;        // box units
  bool identity_arc = false;

  /// E_t in chart coordinates.
  AffineMap e_at(double t) const;
  /// E_t in box coordinates.
  AffineMap e_box(double t) const;
  /// A in chart coordinates (relative to p).
  RegionUnion region_chart() const;

  /// tau = 0, E_t = Id on the same balls: the degenerate arc.
  static FiberArc identity(int d);
};

/// Throws std::invalid_argument on bad ranges and std::domain_error when
/// E_t cannot be made to keep the inner ball invariant.
FiberArc build_fiber_arc(const FiberParams& params);

Vec eval_fiber(const FiberArc& arc, double t, const Vec& x);
Mat fiber_jacobian(const FiberArc& arc, double t, const Vec& x);
/// Value and Jacobian together (one flow integration).
Vec eval_fiber(const FiberArc& arc, double t, const Vec& x, Mat* jacobian);

/// Newton solve of f_t(x) = y. Throws std::runtime_error without convergence.
Vec fiber_inverse(const FiberArc& arc, double t, const Vec& y);

struct FiberReport {
  bool trapping = false;
  double trapping_margin = 0.0;
  bool contraction = false;
  double max_norm = 0.0;           // sup ||Df_t|| over the ball sample
  double max_norm_inner = 0.0;     // sup over the inner ball only
  bool c1_closeness = false;
  double c1_distance = 0.0;
  bool covering = false;
  CoverCertificate cover;
  bool diffeo = false;
  double min_det = 0.0;
  long samples = 0;
};

/// Sample of the closed ball of radius r_hat in chart coordinates:
/// `density` radii on [0, r_check], `density` log-spaced radii on
/// [r_check, r_hat], and 4 * density directions (two in d = 1).
std::vector<Vec> ball_samples(const FiberArc& arc, int density);

FiberReport verify_fiber_arc(const FiberArc& arc, double epsilon, int grid_density,
                             Exec exec = Exec::parallel);

}  // namespace massive
