#include "massive/system_builder.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

#include "massive/kernels.hpp"

namespace massive {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kPhiStep = 1e-6;

double smoothstep5(double s) { return s * s * s * (s * (6.0 * s - 15.0) + 10.0); }

double g1(double phi, const Vec& x) { return std::sin(kTwoPi * (phi + x(0))); }

Vec g2(double phi, const Vec& x) {
  Vec out(x.size());
  for (int i = 0; i < x.size(); ++i) out(i) = std::cos(kTwoPi * (2.0 * phi - x(i)));
  return out;
}

}  // namespace

int CircleArcPair::arc_of(double phi) const {
  const double len = length();
  if (wrap_circle(phi - a0) < len) return 0;
  if (wrap_circle(phi - a1) < len) return 1;
  return -1;
}

CircleArcPair make_arc_pair(int m, double a0, double a1) {
  if (m < 3) throw std::invalid_argument("arcs: m >= 3 required");
  CircleArcPair arcs{m, wrap_circle(a0), wrap_circle(a1)};
  const double gap = wrap_circle(arcs.a1 - arcs.a0);
  const double len = arcs.length();
  // Closed arcs must be disjoint, so both complementary gaps are positive.
  if (!(gap > len && gap + len < 1.0)) {
    throw std::invalid_argument("arcs: L0 and L1 overlap or touch");
  }
  return arcs;
}

SolenoidSystem make_solenoid(std::variant<SkewSystem, EndoSystem> base, double disk_radius,
                             double alpha) {
  SolenoidSystem sol{std::move(base), disk_radius, alpha};
  const int m = std::visit([](const auto& b) {
    using T = std::decay_t<decltype(b)>;
    if constexpr (std::is_same_v<T, SkewSystem>) return b.m();
    else return b.skew.m();
  }, sol.base);
  if (!(alpha > 0.0) || !(disk_radius > 0.0)) {
    throw std::invalid_argument("solenoid: alpha and R must be positive");
  }
  if (alpha * disk_radius + 1.0 > disk_radius) {
    throw std::domain_error("solenoid: alpha * R + 1 <= R fails, disk not mapped into itself");
  }
  if (2.0 * alpha * disk_radius >= 2.0 * std::sin(M_PI / m)) {
    throw std::domain_error("solenoid: image disks over one fiber intersect");
  }
  return sol;
}

Preset parse_preset(const std::string& name) {
  if (name == "fast") return Preset::fast;
  if (name == "paper") return Preset::paper;
  throw std::invalid_argument("unknown preset '" + name + "' (expected fast or paper)");
}

std::string preset_name(Preset p) { return p == Preset::fast ? "fast" : "paper"; }

FiberParams preset_fiber_params(Preset p) {
  FiberParams f;
  if (p == Preset::fast) {
    f.d = 1;
    f.k = 1;
    f.tau = 0.3;
    f.r_hat = 0.249;
    f.r_check = 0.1;
  } else {
    f.d = 2;
    f.k = 0;
    f.tau = 0.0;
    f.r_hat = 0.15;
    f.r_check = 0.0;
  }
  return f;
}

double wrap_circle(double phi) {
  double r = phi - std::floor(phi);
  return r >= 1.0 ? 0.0 : r;
}

double base_map(int m, double phi) {
  const double y = m * phi;
  const double err = std::fma(static_cast<double>(m), phi, -y);  // exact rounding error
  return wrap_circle((y - std::floor(y)) + err);
}

double transition_profile(const CircleArcPair& arcs, double phi) {
  const double len = arcs.length();
  const double u = wrap_circle(phi - arcs.a0);
  const double b = wrap_circle(arcs.a1 - arcs.a0);
  if (u < len) return 0.0;
  if (u < b) return smoothstep5((u - len) / (b - len));
  if (u < b + len) return 1.0;
  return 1.0 - smoothstep5((u - b - len) / (1.0 - b - len));
}

double preimage_branch(const CircleArcPair& arcs, double phi, int branch) {
  if (branch != 0 && branch != 1) throw std::invalid_argument("preimage_branch: branch is 0 or 1");
  const double a = branch == 0 ? arcs.a0 : arcs.a1;
  return a + wrap_circle(phi - arcs.m * a) / arcs.m;
}

const SkewSystem& skew_core(const DynamicalSystem& sys) {
  struct V {
    const SkewSystem& operator()(const SkewSystem& s) const { return s; }
    const SkewSystem& operator()(const EndoSystem& s) const { return s.skew; }
    const SkewSystem& operator()(const SolenoidSystem& s) const {
      return std::visit(V{}, s.base);
    }
  };
  return std::visit(V{}, sys);
}

int base_degree(const DynamicalSystem& sys) { return skew_core(sys).m(); }
int fiber_dim(const DynamicalSystem& sys) { return skew_core(sys).arc.d; }
bool has_disk(const DynamicalSystem& sys) { return std::holds_alternative<SolenoidSystem>(sys); }
int phase_dim(const DynamicalSystem& sys) { return 1 + (has_disk(sys) ? 2 : 0) + fiber_dim(sys); }

Vec skew_fiber(const SkewSystem& sys, double phi, const Vec& x, Mat* dx, Vec* dphi) {
  const double t = transition_profile(sys.arcs, phi);
  const Vec fx = eval_fiber(sys.arc, t, x, dx);
  if (dphi) {
    const double tp = transition_profile(sys.arcs, phi + kPhiStep);
    const double tm = transition_profile(sys.arcs, phi - kPhiStep);
    if (tp == tm) {
      *dphi = Vec::Zero(x.size());
    } else {
      *dphi = torus_delta(eval_fiber(sys.arc, tp, x), eval_fiber(sys.arc, tm, x)) /
              (2.0 * kPhiStep);
    }
  }
  return fx;
}

namespace {

// Base and fiber parts of a skew or perturbed system.
struct BaseFiber {
  double phi;
  Vec x;
};

BaseFiber apply_base(const SkewSystem& s, double phi, const Vec& x) {
  return {base_map(s.m(), phi), skew_fiber(s, phi, x)};
}

BaseFiber apply_base(const EndoSystem& s, double phi, const Vec& x) {
  const double nphi = wrap_circle(base_map(s.skew.m(), phi) + s.eps1 * g1(phi, x));
  const Vec fx = wrap_torus(skew_fiber(s.skew, phi, x) + s.eps2 * g2(phi, x));
  return {nphi, fx};
}

// Jacobian block of (phi, x) -> base/fiber, order (phi, x).
Mat base_jacobian(const SkewSystem& s, double phi, const Vec& x) {
  const int d = static_cast<int>(x.size());
  Mat dx;
  Vec dphi;
  skew_fiber(s, phi, x, &dx, &dphi);
  Mat j = Mat::Zero(d + 1, d + 1);
  j(0, 0) = s.m();
  j.block(1, 0, d, 1) = dphi;
  j.block(1, 1, d, d) = dx;
  return j;
}

Mat base_jacobian(const EndoSystem& s, double phi, const Vec& x) {
  const int d = static_cast<int>(x.size());
  Mat j = base_jacobian(s.skew, phi, x);
  const double c1 = kTwoPi * std::cos(kTwoPi * (phi + x(0)));
  j(0, 0) += s.eps1 * c1;
  j(0, 1) += s.eps1 * c1;
  for (int i = 0; i < d; ++i) {
    const double sn = std::sin(kTwoPi * (2.0 * phi - x(i)));
    j(1 + i, 0) += s.eps2 * (-2.0 * kTwoPi * sn);
    j(1 + i, 1 + i) += s.eps2 * (kTwoPi * sn);
  }
  return j;
}

}  // namespace

State step(const DynamicalSystem& sys, const State& s) {
  return std::visit([&](const auto& sy) -> State {
    using T = std::decay_t<decltype(sy)>;
    if constexpr (std::is_same_v<T, SolenoidSystem>) {
      const BaseFiber bf = std::visit([&](const auto& b) { return apply_base(b, s.phi, s.x); },
                                      sy.base);
      const std::complex<double> z =
          std::polar(1.0, kTwoPi * s.phi) + sy.alpha * s.z;
      return {bf.phi, z, bf.x};
    } else {
      const BaseFiber bf = apply_base(sy, s.phi, s.x);
      return {bf.phi, s.z, bf.x};
    }
  }, sys);
}

Mat jacobian(const DynamicalSystem& sys, const State& s) {
  return std::visit([&](const auto& sy) -> Mat {
    using T = std::decay_t<decltype(sy)>;
    if constexpr (std::is_same_v<T, SolenoidSystem>) {
      const Mat b = std::visit([&](const auto& bs) { return base_jacobian(bs, s.phi, s.x); },
                               sy.base);
      const int d = static_cast<int>(s.x.size());
      Mat j = Mat::Zero(d + 3, d + 3);
      // Scatter (phi, x) rows and columns around the two disk coordinates.
      auto idx = [](int i) { return i == 0 ? 0 : i + 2; };
      for (int r = 0; r <= d; ++r) {
        for (int c = 0; c <= d; ++c) j(idx(r), idx(c)) = b(r, c);
      }
      j(1, 0) = -kTwoPi * std::sin(kTwoPi * s.phi);
      j(2, 0) = kTwoPi * std::cos(kTwoPi * s.phi);
      j(1, 1) = sy.alpha;
      j(2, 2) = sy.alpha;
      return j;
    } else {
      return base_jacobian(sy, s.phi, s.x);
    }
  }, sys);
}

MdscReport mdsc_check(const SkewSystem& sys, int n_phi, int n_x, Exec exec) {
  if (n_phi < 1 || n_x < 1) throw std::invalid_argument("mdsc_check: grid must be non-empty");
  const FiberArc& arc = sys.arc;
  const int d = arc.d;
  const Vec p = Vec::Constant(d, 0.5);
  const double h = kPhiStep;

  long nx_total = 1;
  for (int i = 0; i < d; ++i) nx_total *= n_x;
  std::vector<Vec> inner, outer;
  for (long idx = 0; idx < nx_total; ++idx) {
    Vec x(d);
    long rem = idx;
    for (int i = 0; i < d; ++i) {
      x(i) = (static_cast<double>(rem % n_x) + 0.5) / n_x;
      rem /= n_x;
    }
    (torus_delta(x, p).norm() > arc.r_hat ? outer : inner).push_back(x);
  }

  // Distinct (t(phi - h), t(phi), t(phi + h)) triples; on the arcs they repeat.
  std::map<std::tuple<double, double, double>, int> classes;
  for (int i = 0; i < n_phi; ++i) {
    const double phi = (i + 0.5) / n_phi;
    classes.emplace(std::make_tuple(transition_profile(sys.arcs, phi - h),
                                    transition_profile(sys.arcs, phi),
                                    transition_profile(sys.arcs, phi + h)),
                    i);
  }

  struct D4 {
    double fphi, fx, iphi, ix;
  };
  auto derivs = [&](double tm, double t, double tp, const Vec& x) {
    D4 out{};
    Mat j;
    eval_fiber(arc, t, x, &j);
    out.fx = operator_norm(j);
    const Vec xi = fiber_inverse(arc, t, x);
    Mat ji;
    eval_fiber(arc, t, xi, &ji);
    const Mat jinv = ji.inverse();
    out.ix = operator_norm(jinv);
    if (tp != tm) {
      const double s = 1.0 / (2.0 * h);
      out.fphi = (s * torus_delta(eval_fiber(arc, tp, x), eval_fiber(arc, tm, x))).norm();
      out.iphi =
          (jinv * (s * torus_delta(eval_fiber(arc, tp, xi), eval_fiber(arc, tm, xi)))).norm();
    }
    return out;
  };

  MdscReport rep;
  auto fold = [&](const std::vector<D4>& v) {
    for (const auto& r : v) {
      rep.forward_phi = std::max(rep.forward_phi, r.fphi);
      rep.forward_x = std::max(rep.forward_x, r.fx);
      rep.inverse_phi = std::max(rep.inverse_phi, r.iphi);
      rep.inverse_x = std::max(rep.inverse_x, r.ix);
    }
  };
  auto run = [&](const std::vector<Vec>& xs, double tm, double t, double tp) {
    std::vector<D4> out(xs.size());
    max_over(static_cast<long>(xs.size()),
             [&](long i) {
               out[i] = derivs(tm, t, tp, xs[i]);
               return 0.0;
             },
             exec);
    fold(out);
  };

  // Outside the ball f_t = S^tau for every t; trapping keeps preimages there too.
  run(outer, 0.0, 0.0, 0.0);
  for (const auto& [key, first] : classes) {
    auto [tm, t, tp] = key;
    run(inner, tm, t, tp);
  }
  rep.samples = static_cast<long>(n_phi) * nx_total;
  const double inv_m = 1.0 / sys.m();
  rep.L = std::max({inv_m + rep.forward_phi, inv_m + rep.inverse_phi, rep.forward_x,
                    rep.inverse_x});
  rep.margin = sys.m() - rep.L;
  rep.pass = rep.L < sys.m();
  return rep;
}

DegreeReport covering_degree_check(const EndoSystem& sys, int n_phi, int n_x) {
  const int m = sys.skew.m();
  const int d = sys.skew.arc.d;
  DegreeReport rep;
  rep.bound = m - std::abs(sys.eps1) * kTwoPi;
  rep.min_derivative = std::numeric_limits<double>::infinity();
  long nx_total = 1;
  for (int i = 0; i < d; ++i) nx_total *= n_x;
  for (int i = 0; i < n_phi; ++i) {
    const double phi = (i + 0.5) / n_phi;
    for (long idx = 0; idx < nx_total; ++idx) {
      Vec x(d);
      long rem = idx;
      for (int a = 0; a < d; ++a) {
        x(a) = (static_cast<double>(rem % n_x) + 0.5) / n_x;
        rem /= n_x;
      }
      const double dphi = m + sys.eps1 * kTwoPi * std::cos(kTwoPi * (phi + x(0)));
      rep.min_derivative = std::min(rep.min_derivative, dphi);
    }
  }
  // The base component has degree m on every slice (g1 is periodic in phi),
  // so a positive derivative bound makes it an m-to-1 covering.
  rep.pass = rep.bound > 0.0 && rep.min_derivative > 0.0;
  return rep;
}

}  // namespace massive
