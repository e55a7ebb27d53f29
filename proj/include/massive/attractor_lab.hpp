#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <vector>

#include "massive/system_builder.hpp"

namespace massive {

/// Reproducible stream for (master seed, counter).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t counter);

/// Uniform point of the chart ball of radius r (rejection from the cube).
Vec sample_ball(std::mt19937_64& rng, int d, double r);

/// Visit counts over S^1 x [lower, upper] (torus coordinates of the fiber).
struct OccupancyGrid {
  std::vector<int> dims;  // phi first, then fiber axes
  Vec lower;              // fiber window
  Vec upper;
  std::vector<std::uint64_t> counts;
  std::uint64_t burn_in = 0;
  std::uint64_t total_steps = 0;  // recorded steps: sum(counts) + outside
  std::uint64_t outside = 0;      // recorded steps that left the window

  static OccupancyGrid make(std::vector<int> dims, Vec lower, Vec upper, std::uint64_t burn_in);

  long cell_count() const { return static_cast<long>(counts.size()); }
  /// Row-major cell index of (phi, x), or -1 outside the window.
  long index(double phi, const Vec& x) const;
  void record(double phi, const Vec& x);
  /// Cell-wise sum; grids must share dims, window and burn-in.
  void merge(const OccupancyGrid& other);

  void write(std::ostream& os) const;
  /// Reads the OGRID1 format; the window is not stored and stays empty.
  static OccupancyGrid read(std::istream& is);
};

struct OccupancyParams {
  long n_starts = 100;
  long steps = 100000;
  long burn_in = 1000;
  std::vector<int> dims{256, 128};
  std::uint64_t seed = 1;
};

/// Orbits from uniform starts in S^1 x A_hat (z uniform in the disk for the
/// solenoid, projected away). Deterministic given the seed.
OccupancyGrid occupancy_run(const DynamicalSystem& sys, const OccupancyParams& params,
                            Exec exec = Exec::parallel);

struct InteriorReport {
  long interior_cells = 0;
  long empty_cells = 0;
  std::uint64_t min_count = 0;
  bool pass = false;
};

/// Every cell whose fiber box, grown by its own diameter, lies in `region`
/// (chart coordinates) must have a positive count, for every phi row.
InteriorReport interior_occupancy(const OccupancyGrid& grid, const RegionUnion& region);

struct TrappingReport {
  bool pass = false;
  double margin = 0.0;  // r_hat minus the largest image radius
};

/// Images of S^1 x (boundary sphere of A_hat) over an n_phi grid.
TrappingReport trapping_check(const DynamicalSystem& sys, int n_phi, int n_dirs);

struct DensityReport {
  double phi = 0.0;
  int depth = 0;
  std::vector<Vec> points;  // chart coordinates
  double covering_radius = 0.0;
  double lambda_eff = 0.0;
  double diam_a = 0.0;
  double diam_a_hat = 0.0;
  double bound = 0.0;
  bool monte_carlo = false;
  bool pass = false;
};

inline constexpr int kMaxFullDepth = 22;

/// Backward words of length n through the L0/L1 preimages of phi, composed
/// on `seed` (chart coordinates, inside A). Full enumeration up to depth 22,
/// 10^6 random words beyond.
DensityReport density_certificate(const SkewSystem& sys, double phi, int n, const Vec& seed,
                                  int grid_per_axis = 256, std::uint64_t rng_seed = 1,
                                  Exec exec = Exec::parallel);

/// sup ||Df_t|| on the inner ball, where f_t = E_t.
double inner_contraction(const FiberArc& arc);

struct GraphReport {
  double max_ratio = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::vector<double> ratios;
};

/// Pairs of seeds in the inner ball pushed through the same random
/// backward fiber composition of length n.
GraphReport graph_contraction_test(const DynamicalSystem& sys, int n, int trials,
                                   std::uint64_t seed, Exec exec = Exec::parallel);

using TestFn = std::function<double(const State&)>;

double birkhoff_average(const DynamicalSystem& sys, const TestFn& psi, const State& start,
                        long steps, long burn_in);

struct SrbReport {
  std::vector<std::vector<double>> averages;  // [start][test function]
  double max_deviation = 0.0;
  double max_abs_cos = 0.0;
  bool pass = false;
};

/// The three test functions: cos 2 pi phi, first fiber chart coordinate,
/// and its square.
std::vector<TestFn> standard_test_functions();

SrbReport srb_consistency(const DynamicalSystem& sys, int n_starts, long steps, long burn_in,
                          std::uint64_t seed, Exec exec = Exec::parallel);

struct LyapunovReport {
  std::vector<double> spectrum;  // per coordinate slot, see lyapunov_spectrum
  double base = 0.0;
  std::vector<double> fiber;
  double mean_log_det = 0.0;
};

/// QR iteration of the Jacobian cocycle, coordinates ordered (x, z, phi) so
/// that triangular skew Jacobians keep their exact diagonal blocks.
LyapunovReport lyapunov_spectrum(const DynamicalSystem& sys, const State& start, long steps,
                                 long burn_in = 1000);

/// Random start in S^1 x (disk) x A_hat.
State random_state(const DynamicalSystem& sys, std::mt19937_64& rng);

struct MassiveParams {
  OccupancyParams occupancy;
  double region_factor = 1.0;  // A is scaled about p before the interior test
  int srb_starts = 10;
  long srb_steps = 1000000;
  long srb_burn_in = 1000;
  std::vector<double> density_phis{0.0, 0.37, 0.71};
  int density_depth = 16;
  int graph_length = 50;
  int graph_trials = 1000;
  int trap_phi = 256;
  int trap_dirs = 64;
  std::uint64_t seed = 1;
};

struct MassiveVerdict {
  TrappingReport trapping;
  InteriorReport interior;
  SrbReport srb;
  std::vector<DensityReport> density;  // empty for non-skew systems
  GraphReport graph;                   // skipped (pass) for non-skew systems
  bool density_pass = true;
  bool degree_pass = true;             // perturbed systems only
  bool massive = false;
};

MassiveVerdict massive_attractor_report(const DynamicalSystem& sys, const MassiveParams& params,
                                        Exec exec = Exec::parallel);

}  // namespace massive
