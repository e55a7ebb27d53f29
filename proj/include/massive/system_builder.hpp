#pragma once

#include <complex>
#include <variant>

#include "massive/execution.hpp"
#include "massive/fiber_dynamics.hpp"

namespace massive {

/// Two disjoint arcs [a0, a0 + 1/m) and [a1, a1 + 1/m) on R/Z.
struct CircleArcPair {
  int m = 3;
  double a0 = 0.0;
  double a1 = 0.5;

  double length() const { return 1.0 / m; }
  /// 0 for L0, 1 for L1, -1 outside both (half-open arcs).
  int arc_of(double phi) const;
};

/// Throws std::invalid_argument for m < 3 or overlapping / touching arcs.
CircleArcPair make_arc_pair(int m, double a0 = 0.0, double a1 = 0.5);

struct SkewSystem {
  CircleArcPair arcs;
  FiberArc arc;
  int m() const { return arcs.m; }
};

/// Fiber and base perturbed by eps1 * g1 and eps2 * g2 with
///   g1(phi, x) = sin 2 pi (phi + x_1),  g2_i(phi, x) = cos 2 pi (2 phi - x_i).
struct EndoSystem {
  SkewSystem skew;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

/// (phi, z, x) -> (base(phi, x), e^{2 pi i phi} + alpha z, fiber(phi, x)).
struct SolenoidSystem {
  std::variant<SkewSystem, EndoSystem> base;
  double disk_radius = 2.0;
  double alpha = 0.25;
};

using DynamicalSystem = std::variant<SkewSystem, SolenoidSystem, EndoSystem>;

struct State {
  double phi = 0.0;
  std::complex<double> z{0.0, 0.0};
  Vec x;
};

/// Throws std::domain_error unless alpha * R + 1 <= R and the m images of
/// the disk over one base fiber are pairwise disjoint (2 alpha R < 2 sin(pi/m)).
SolenoidSystem make_solenoid(std::variant<SkewSystem, EndoSystem> base, double disk_radius = 2.0,
                             double alpha = 0.25);

enum class Preset { fast, paper };
Preset parse_preset(const std::string& name);
std::string preset_name(Preset p);
/// Fiber parameters of a preset: fast is d = 1, k = 1, tau = 0.3; paper is
/// d = 2 with k, tau and r_check chosen from epsilon.
FiberParams preset_fiber_params(Preset p);

/// m phi mod 1, exact whenever the true result is representable.
double base_map(int m, double phi);
double wrap_circle(double phi);

/// Quintic step across the two gaps: 0 on L0, 1 on L1.
double transition_profile(const CircleArcPair& arcs, double phi);
/// The unique preimage of phi under the base map inside arc `branch`.
double preimage_branch(const CircleArcPair& arcs, double phi, int branch);

int base_degree(const DynamicalSystem& sys);
const SkewSystem& skew_core(const DynamicalSystem& sys);
int fiber_dim(const DynamicalSystem& sys);
/// Dimension of the phase space: 1 + d, or 3 + d with the disk.
int phase_dim(const DynamicalSystem& sys);
bool has_disk(const DynamicalSystem& sys);

State step(const DynamicalSystem& sys, const State& s);
/// Full Jacobian in the coordinate order (phi, Re z, Im z, x). The phi
/// derivative of the fiber map is a central difference with step 1e-6.
Mat jacobian(const DynamicalSystem& sys, const State& s);

/// Fiber map of a skew system at base point phi, with d/dphi when asked.
Vec skew_fiber(const SkewSystem& sys, double phi, const Vec& x, Mat* dx = nullptr,
               Vec* dphi = nullptr);

struct MdscReport {
  double L = 0.0;
  double margin = 0.0;  // m - L
  bool pass = false;
  double forward_phi = 0.0;   // sup ||d f / d phi||
  double forward_x = 0.0;     // sup ||d f / d x||
  double inverse_phi = 0.0;   // sup ||d f^-1 / d phi||
  double inverse_x = 0.0;     // sup ||d f^-1 / d x||
  long samples = 0;
};

/// L = max(1/m + ||d f^{+-1}/d phi||, ||d f^{+-1}/d x||) over n_phi base
/// points times a uniform torus grid with n_x points per axis.
MdscReport mdsc_check(const SkewSystem& sys, int n_phi, int n_x, Exec exec = Exec::parallel);

struct DegreeReport {
  double min_derivative = 0.0;  // min of d(base)/d phi on the grid
  double bound = 0.0;           // m - eps1 * sup |d g1 / d phi|
  bool pass = false;
};

DegreeReport covering_degree_check(const EndoSystem& sys, int n_phi, int n_x);

}  // namespace massive
