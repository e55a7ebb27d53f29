#include "massive/fiber_dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "massive/kernels.hpp"

namespace massive {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kMorseStep = 0.01;
constexpr double kGlueStep = 0.005;
constexpr double kInnerLogGap = 3.5;

Vec torus_center(int d) { return Vec::Constant(d, 0.5); }

// Quintic step on [0, 1] and its derivative.
double smoothstep5(double s) { return s * s * s * (s * (6.0 * s - 15.0) + 10.0); }
double smoothstep5_d(double s) { return 30.0 * s * s * (s - 1.0) * (s - 1.0); }

// One classical RK4 run of y' = field(y) for total time tau, carrying the
// tangent matrix p alongside so p ends as the Jacobian of the discrete map.
template <class Field>
Vec rk4_flow(Vec y, double tau, double max_step, const Field& field, Mat* p) {
  const int d = static_cast<int>(y.size());
  if (tau <= 0.0) {
    if (p) *p = Mat::Identity(d, d);
    return y;
  }
  const int steps = static_cast<int>(std::ceil(tau / max_step));
  const double h = tau / steps;
  Mat tangent = Mat::Identity(d, d);
  Mat j1(d, d), j2(d, d), j3(d, d), j4(d, d);
  Vec k1(d), k2(d), k3(d), k4(d);
  for (int s = 0; s < steps; ++s) {
    field(y, k1, j1);
    field(Vec(y + 0.5 * h * k1), k2, j2);
    field(Vec(y + 0.5 * h * k2), k3, j3);
    field(Vec(y + h * k3), k4, j4);
    if (p) {
      const Mat t1 = j1 * tangent;
      const Mat t2 = j2 * (tangent + 0.5 * h * t1);
      const Mat t3 = j3 * (tangent + 0.5 * h * t2);
      const Mat t4 = j4 * (tangent + h * t3);
      tangent += (h / 6.0) * (t1 + 2.0 * t2 + 2.0 * t3 + t4);
    }
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (p) *p = tangent;
  return y;
}

// V = -grad H in chart coordinates.
void morse_field(const Vec& y, Vec& v, Mat& dv) {
  const int d = static_cast<int>(y.size());
  dv.setZero(d, d);
  for (int i = 0; i < d; ++i) {
    v(i) = -std::sin(kTwoPi * y(i)) / kTwoPi;
    dv(i, i) = -std::cos(kTwoPi * y(i));
  }
}

std::pair<double, double> morse_closeness_parts(int d, double tau) {
  // The flow acts coordinate-wise; the worst displacement is found on a fine
  // grid, the worst derivative (e^tau at y = 1/2) is exact.
  double disp = 0.0;
  constexpr int kGrid = 20000;
  for (int i = 1; i < kGrid; ++i) {
    const double y0 = -0.5 + static_cast<double>(i) / kGrid;
    disp = std::max(disp, std::abs(morse_flow_exact_1d(tau, y0) - y0));
  }
  return {std::sqrt(static_cast<double>(d)) * disp, std::expm1(tau)};
}

}  // namespace

Vec wrap_torus(const Vec& x) {
  Vec out = x;
  for (int i = 0; i < out.size(); ++i) {
    out(i) -= std::floor(out(i));
    if (out(i) >= 1.0) out(i) = 0.0;
  }
  return out;
}

Vec torus_delta(const Vec& a, const Vec& b) {
  Vec d = a - b;
  for (int i = 0; i < d.size(); ++i) d(i) -= std::floor(d(i) + 0.5);
  return d;
}

double torus_distance(const Vec& a, const Vec& b) { return torus_delta(a, b).norm(); }

Vec morse_flow_map(double tau, const Vec& x, Mat* jacobian) {
  if (tau < 0.0) throw std::invalid_argument("morse_flow_map: tau must be >= 0");
  const int d = static_cast<int>(x.size());
  const Vec p = torus_center(d);
  const Vec y = rk4_flow(torus_delta(x, p), tau, kMorseStep, morse_field, jacobian);
  return wrap_torus(p + y);
}

double morse_flow_exact_1d(double tau, double y0) {
  return std::atan(std::tan(M_PI * y0) * std::exp(-tau)) / M_PI;
}

double morse_closeness(int d, double tau) {
  auto [disp, deriv] = morse_closeness_parts(d, tau);
  return disp + deriv;
}

AffineMap FiberArc::e_at(double t) const {
  const Vec q = (2.0 * t - 1.0) * q_plus;
  return {linear, q - linear * q};
}

AffineMap FiberArc::e_box(double t) const {
  const Vec q = (2.0 * t - 1.0) * q_plus / scale;
  return {linear, q - linear * q};
}

RegionUnion FiberArc::region_chart() const {
  return region.region.mapped(AffineMap::scaling(d, scale));
}

FiberArc FiberArc::identity(int d) {
  if (d < 1 || d > 2) throw std::invalid_argument("fiber arc: d must be 1 or 2");
  FiberArc arc;
  arc.d = d;
  arc.tau = 0.0;
  arc.r_hat = 0.249;
  arc.r_check = 0.15;
  arc.r_field = arc.r_hat;
  arc.k = 1;
  arc.lambda = 1.0;
  arc.box = build_box_spec(d, 0.9);
  arc.linear = Mat::Identity(d, d);
  arc.generator = Mat::Zero(d, d);
  arc.q_plus = Vec::Zero(d);
  const Parallelotope b = Parallelotope::box(Vec::Zero(d), arc.box.radii);
  arc.region.region = RegionUnion({b, b});
  arc.scale = 0.9 * arc.r_check / arc.box.radii.norm();
  arc.identity_arc = true;
  return arc;
}

namespace {

// Blended generator field in chart coordinates.
struct GlueField {
  const FiberArc& arc;
  Vec q;
  double log_span;

  void operator()(const Vec& y, Vec& z, Mat& dz) const {
    const int d = arc.d;
    const double tau = arc.tau;
    const Vec w = arc.generator * (y - q);
    Vec v(d);
    Mat dv(d, d);
    morse_field(y, v, dv);
    const double r = y.norm();
    double beta = 1.0;
    Vec grad = Vec::Zero(d);
    if (r >= arc.r_field) {
      beta = 0.0;
    } else if (r > arc.r_check) {
      const double s = std::log(r / arc.r_check) / log_span;
      beta = 1.0 - smoothstep5(s);
      grad = (-smoothstep5_d(s) / (log_span * r * r)) * y;
    }
    z = beta * w / tau + (1.0 - beta) * v;
    dz = (w / tau - v) * grad.transpose() + (beta / tau) * arc.generator + (1.0 - beta) * dv;
  }
};

}  // namespace

Vec eval_fiber(const FiberArc& arc, double t, const Vec& x, Mat* jacobian) {
  const int d = arc.d;
  if (x.size() != d) throw std::invalid_argument("eval_fiber: dimension mismatch");
  if (arc.identity_arc) {
    if (jacobian) *jacobian = Mat::Identity(d, d);
    return wrap_torus(x);
  }
  const Vec p = torus_center(d);
  const Vec y = torus_delta(x, p);
  const double r = y.norm();
  if (r <= arc.r_check) {
    const AffineMap e = arc.e_at(t);
    if (jacobian) *jacobian = e.linear;
    return wrap_torus(p + apply(e, y));
  }
  if (r >= arc.r_hat) return morse_flow_map(arc.tau, x, jacobian);
  GlueField field{arc, (2.0 * t - 1.0) * arc.q_plus, std::log(arc.r_field / arc.r_check)};
  return wrap_torus(p + rk4_flow(y, arc.tau, kGlueStep, field, jacobian));
}

Vec eval_fiber(const FiberArc& arc, double t, const Vec& x) {
  return eval_fiber(arc, t, x, nullptr);
}

Mat fiber_jacobian(const FiberArc& arc, double t, const Vec& x) {
  Mat j;
  eval_fiber(arc, t, x, &j);
  return j;
}

Vec fiber_inverse(const FiberArc& arc, double t, const Vec& y) {
  Vec x = wrap_torus(y);
  Mat j;
  for (int it = 0; it <= 50; ++it) {
    const Vec res = torus_delta(eval_fiber(arc, t, x, &j), y);
    if (res.norm() <= 1e-10) return x;
    x = wrap_torus(x - j.fullPivLu().solve(res));
  }
  throw std::runtime_error("fiber_inverse: Newton iteration did not converge");
}

namespace {

struct ArcCandidate {
  Mat linear;
  Mat generator;
  Vec q_plus_box;
  double invariance_scale;  // largest scale keeping the inner ball invariant
};

ArcCandidate make_candidate(const BoxSpec& box, int k, double r_check) {
  const AffineMap g1 = build_G(box, 1.0);
  const AffineMap e1 = affine_kth_root(g1, k);
  auto [lam_root, u] = similarity_split(e1.linear);
  ArcCandidate c;
  c.linear = e1.linear;
  c.generator = std::log(lam_root) * Mat::Identity(box.n, box.n) + rotation_log(u);
  c.q_plus_box = fixed_point(g1);
  // The inner ball is forward-invariant under y' = M (y - q) iff
  // |M q| < -log(lambda^(1/k)) * r_check.
  const double mq = (c.generator * c.q_plus_box).norm();
  c.invariance_scale = mq > 0.0 ? -std::log(lam_root) * r_check / mq
                                : std::numeric_limits<double>::infinity();
  return c;
}

double e_closeness(const ArcCandidate& c, double scale, double radius) {
  const Vec q = scale * c.q_plus_box;
  return closeness_to_identity(AffineMap{c.linear, q - c.linear * q}, radius);
}

// Coarse contraction and orientation check of the glue annulus.
bool glue_ok(const FiberArc& arc) {
  for (double t : {0.0, 0.5, 1.0}) {
    for (const Vec& y : ball_samples(arc, 12)) {
      if (y.norm() <= arc.r_check) continue;
      Mat j;
      eval_fiber(arc, t, wrap_torus(torus_center(arc.d) + y), &j);
      if (operator_norm(j) >= 1.0 || j.determinant() <= 0.0) return false;
    }
  }
  return true;
}

}  // namespace

FiberArc build_fiber_arc(const FiberParams& params) {
  const int d = params.d;
  if (d < 1 || d > 2) throw std::invalid_argument("fiber arc: d must be 1 or 2");
  if (!(params.r_hat > 0.0 && params.r_hat < 0.25)) {
    throw std::invalid_argument("fiber arc: r_hat must lie in (0, 1/4)");
  }
  if (params.r_check > 0.0 && params.r_check >= params.r_hat) {
    throw std::invalid_argument("fiber arc: r_check must be smaller than r_hat");
  }
  if (params.k > 64) throw std::invalid_argument("fiber arc: k must be <= 64");
  if (!(params.epsilon > 0.0)) throw std::invalid_argument("fiber arc: epsilon must be > 0");

  FiberArc arc;
  arc.d = d;
  arc.lambda = params.lambda;
  arc.box = build_box_spec(d, params.lambda);
  arc.r_hat = params.r_hat;

  arc.tau = params.tau;
  if (arc.tau <= 0.0) {
    double lo = 0.0, hi = 2.0;
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (morse_closeness(d, mid) < 0.5 * params.epsilon ? lo : hi) = mid;
    }
    arc.tau = lo;
  }
  if (arc.tau <= 0.0) throw std::domain_error("fiber arc: no positive tau meets epsilon/2");
  arc.r_field = std::exp(-arc.tau) * arc.r_hat;

  double r_check = params.r_check > 0.0 ? params.r_check : arc.r_field * std::exp(-kInnerLogGap);
  if (r_check >= arc.r_field) {
    throw std::domain_error("fiber arc: r_check must be below exp(-tau) * r_hat");
  }

  const Parallelotope b = Parallelotope::box(Vec::Zero(d), arc.box.radii);
  const RegionUnion tls({b.mapped(build_G(arc.box, 0.0)), b.mapped(build_G(arc.box, 1.0))});
  const double slack = covering_slack(b, tls, 24);

  for (int attempt = 0; attempt <= params.max_retries; ++attempt, r_check *= 0.5) {
    int k = params.k;
    ArcCandidate cand;
    if (k > 0) {
      cand = make_candidate(arc.box, k, r_check);
    } else {
      for (k = 1; k <= 64; ++k) {
        cand = make_candidate(arc.box, k, r_check);
        if (e_closeness(cand, cand.invariance_scale, r_check) < 0.5 * params.epsilon) break;
      }
      if (k > 64) {
        throw std::domain_error("fiber arc: no k <= 64 makes E_t epsilon/2-close to Id");
      }
    }
    const double shrink = params.shrink > 0.0 ? params.shrink : slack / (2.0 * k);
    arc.k = k;
    arc.r_check = r_check;
    arc.linear = cand.linear;
    arc.generator = cand.generator;
    arc.region = build_region_A(affine_kth_root(build_G(arc.box, 0.0), k),
                                affine_kth_root(build_G(arc.box, 1.0), k), b, k, shrink,
                                params.cover_margin);

    double reach = 0.0;
    for (const auto& piece : arc.region.region.pieces()) {
      for (const Vec& v : piece.vertices()) reach = std::max(reach, v.norm());
    }
    arc.scale = 0.9 * std::min(cand.invariance_scale, r_check / reach);
    arc.q_plus = arc.scale * cand.q_plus_box;
    if (glue_ok(arc)) return arc;
  }
  throw std::domain_error(
      "fiber arc: glued map not contracting after shrinking r_check; "
      "use a larger k or a smaller r_check");
}

std::vector<Vec> ball_samples(const FiberArc& arc, int density) {
  std::vector<double> radii;
  for (int j = 0; j < density; ++j) radii.push_back(arc.r_check * j / density);
  const double ratio = arc.r_hat / arc.r_check;
  for (int j = 0; j <= density; ++j) {
    radii.push_back(arc.r_check * std::pow(ratio, static_cast<double>(j) / density));
  }
  radii.back() = arc.r_hat;
  std::vector<Vec> dirs;
  if (arc.d == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else {
    const int na = 4 * density;
    for (int a = 0; a < na; ++a) {
      const double ang = kTwoPi * (a + 0.5) / na;
      Vec v(2);
      v << std::cos(ang), std::sin(ang);
      dirs.push_back(v);
    }
  }
  std::vector<Vec> out;
  out.reserve(radii.size() * dirs.size());
  for (double r : radii) {
    for (const Vec& u : dirs) out.push_back(r * u);
  }
  return out;
}

FiberReport verify_fiber_arc(const FiberArc& arc, double epsilon, int grid_density, Exec exec) {
  FiberReport rep;
  const int d = arc.d;
  const Vec p = torus_center(d);
  const std::vector<Vec> pts = ball_samples(arc, grid_density);
  constexpr int kTimes = 11;
  const long np = static_cast<long>(pts.size());
  const long total = np * kTimes;
  rep.samples = total;

  struct Sample {
    double norm, det, disp, dev, radius;
    bool inner;
  };
  std::vector<Sample> s(total);
  auto one = [&](long idx) {
    const double t = static_cast<double>(idx / np) / (kTimes - 1);
    const Vec& y = pts[idx % np];
    const Vec x = wrap_torus(p + y);
    Mat j;
    const Vec fx = eval_fiber(arc, t, x, &j);
    s[idx] = {operator_norm(j), j.determinant(), torus_delta(fx, x).norm(),
              operator_norm(j - Mat::Identity(d, d)), torus_delta(fx, p).norm(),
              y.norm() <= arc.r_check};
    return 0.0;
  };
  max_over(total, one, exec);

  const long boundary_from = np - (d == 1 ? 2 : 4 * grid_density);
  double disp = 0.0, dev = 0.0, image_reach = 0.0;
  rep.min_det = std::numeric_limits<double>::infinity();
  for (long i = 0; i < total; ++i) {
    rep.max_norm = std::max(rep.max_norm, s[i].norm);
    if (s[i].inner) rep.max_norm_inner = std::max(rep.max_norm_inner, s[i].norm);
    rep.min_det = std::min(rep.min_det, s[i].det);
    disp = std::max(disp, s[i].disp);
    dev = std::max(dev, s[i].dev);
    // The last block of samples is the boundary sphere.
    if (i % np >= boundary_from) image_reach = std::max(image_reach, s[i].radius);
  }
  // Outside the ball f_t = S^tau; its closeness comes from the closed form.
  auto [m_disp, m_dev] = morse_closeness_parts(d, arc.tau);
  rep.c1_distance = std::max(disp, m_disp) + std::max(dev, m_dev);
  rep.c1_closeness = rep.c1_distance < epsilon;
  rep.trapping_margin = arc.r_hat - image_reach;
  rep.trapping = rep.trapping_margin > 0.0;
  rep.contraction = rep.max_norm < 1.0;
  rep.diffeo = rep.min_det > 0.0;

  // On the inner ball f_i = E_i exactly, and scaling is a similarity, so the
  // covering is certified in box units.
  double reach = 0.0;
  for (const auto& piece : arc.region_chart().pieces()) {
    for (const Vec& v : piece.vertices()) reach = std::max(reach, v.norm());
  }
  const RegionUnion& a = arc.region.region;
  rep.cover = certify_region_covered(a, a.mapped(arc.e_box(0.0)).merged(a.mapped(arc.e_box(1.0))),
                                     kBoxMarginTol, 24, exec);
  rep.covering = rep.cover.covered && reach < arc.r_check;
  return rep;
}

}  // namespace massive
