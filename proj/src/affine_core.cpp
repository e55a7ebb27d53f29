#include "massive/affine_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace massive {

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double min_singular_value(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

AffineMap AffineMap::identity(int n) { return {Mat::Identity(n, n), Vec::Zero(n)}; }

AffineMap AffineMap::from_linear(const Mat& linear) {
  return {linear, Vec::Zero(linear.rows())};
}

AffineMap AffineMap::scaling(int n, double factor) {
  return {factor * Mat::Identity(n, n), Vec::Zero(n)};
}

AffineMap AffineMap::translation_by(const Vec& v) {
  const int n = static_cast<int>(v.size());
  return {Mat::Identity(n, n), v};
}

namespace {

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

double spectral_radius(const Mat& m) {
  Eigen::MatrixXd dense = m;
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Rotation by `angle` in the (i, j) plane, written into `out`.
void set_plane_rotation(Eigen::MatrixXd& out, int i, int j, double angle) {
  out(i, i) = std::cos(angle);
  out(j, j) = std::cos(angle);
  out(i, j) = -std::sin(angle);
  out(j, i) = std::sin(angle);
}

struct RotationAngles {
  Eigen::MatrixXd q;
  // (i, j, angle): rotation by angle in the plane of Schur vectors i, j.
  std::vector<std::tuple<int, int, double>> planes;
};

RotationAngles rotation_planes(const Mat& u) {
  const int n = static_cast<int>(u.rows());
  Eigen::MatrixXd dense = u;
  Eigen::RealSchur<Eigen::MatrixXd> schur(dense);
  const Eigen::MatrixXd& t = schur.matrixT();
  RotationAngles out{schur.matrixU(), {}};
  std::vector<int> minus_one;
  int i = 0;
  while (i < n) {
    if (i + 1 < n && std::abs(t(i + 1, i)) > 1e-14) {
      // Normal 2x2 block [[a, -c], [c, a]].
      const double c = 0.5 * (t(i + 1, i) - t(i, i + 1));
      const double a = 0.5 * (t(i, i) + t(i + 1, i + 1));
      out.planes.emplace_back(i, i + 1, std::atan2(c, a));
      i += 2;
    } else {
      if (t(i, i) < 0.0) minus_one.push_back(i);
      ++i;
    }
  }
  if (minus_one.size() % 2 != 0) {
    throw std::domain_error("rotation_log: odd number of -1 eigenvalues (det < 0)");
  }
  // Paired -1 eigenvalues form a half turn, angle pi (principal branch).
  for (std::size_t j = 0; j < minus_one.size(); j += 2) {
    out.planes.emplace_back(minus_one[j], minus_one[j + 1], M_PI);
  }
  return out;
}

}  // namespace

Vec apply(const AffineMap& map, const Vec& x) {
  require_same_dim(map.dim(), static_cast<int>(x.size()), "apply");
  return map.linear * x + map.translation;
}

AffineMap compose(const AffineMap& a, const AffineMap& b) {
  require_same_dim(a.dim(), b.dim(), "compose");
  return {a.linear * b.linear, a.linear * b.translation + a.translation};
}

AffineMap inverse(const AffineMap& map) {
  Eigen::FullPivLU<Mat> lu(map.linear);
  if (!lu.isInvertible()) throw std::domain_error("inverse: singular linear part");
  Mat inv = lu.inverse();
  return {inv, -inv * map.translation};
}

AffineMap power(const AffineMap& map, int k) {
  if (k < 0) throw std::invalid_argument("power: negative exponent");
  AffineMap out = AffineMap::identity(map.dim());
  for (int i = 0; i < k; ++i) out = compose(map, out);
  return out;
}

Vec fixed_point(const AffineMap& map) {
  const int n = map.dim();
  if (operator_norm(map.linear) > 1.0 - 1e-9 && spectral_radius(map.linear) >= 1.0 - 1e-9) {
    throw std::domain_error("fixed_point: linear part is not contracting");
  }
  Mat a = Mat::Identity(n, n) - map.linear;
  Vec p = a.fullPivLu().solve(map.translation);
  // One refinement step keeps the residual at round-off level.
  p += a.fullPivLu().solve(map.translation - a * p);
  if ((apply(map, p) - p).norm() > 1e-10) {
    throw std::runtime_error("fixed_point: residual above 1e-10");
  }
  return p;
}

AffineMap cyclic_rotation(int n) {
  if (n < 1) throw std::invalid_argument("cyclic_rotation: n must be >= 1");
  Mat r = Mat::Zero(n, n);
  r(0, n - 1) = (n % 2 == 1) ? 1.0 : -1.0;  // (-1)^(n+1)
  for (int i = 1; i < n; ++i) r(i, i - 1) = 1.0;
  return AffineMap::from_linear(r);
}

double box_spec_margin(const BoxSpec& spec) {
  const int n = spec.n;
  const double lam = spec.lambda;
  const auto& r = spec.radii;
  double m = r.minCoeff();
  for (int i = 0; i + 1 < n; ++i) m = std::min(m, lam * r(i) - r(i + 1));
  m = std::min(m, lam * r(n - 1) - 0.5 * r(0));
  m = std::min(m, lam * (spec.shift + r(n - 1)) - r(0));
  m = std::min(m, lam * (r(n - 1) - spec.shift));
  return m;
}

BoxSpec make_box_spec(double lambda, const Vec& radii, double shift, double min_margin) {
  const int n = static_cast<int>(radii.size());
  if (n < 1 || n > 6) throw std::invalid_argument("box spec: dimension must be in [1, 6]");
  if (!(lambda > 0.5 && lambda < 1.0)) {
    throw std::domain_error("box spec: lambda must lie in (1/2, 1)");
  }
  auto fail = [](const std::string& what) {
    throw std::domain_error("box spec: inequality violated: " + what);
  };
  for (int i = 0; i < n; ++i) {
    if (!(radii(i) > 0.0)) fail("r_" + std::to_string(i + 1) + " > 0");
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (lambda * radii(i) - radii(i + 1) < min_margin) {
      fail("lambda*r_" + std::to_string(i + 1) + " > r_" + std::to_string(i + 2));
    }
  }
  if (lambda * radii(n - 1) - 0.5 * radii(0) < min_margin) fail("lambda*r_n > r_1/2");
  if (lambda * (shift + radii(n - 1)) - radii(0) < min_margin) fail("lambda*(s + r_n) > r_1");
  if (lambda * (radii(n - 1) - shift) < min_margin) fail("s < r_n");
  return {n, lambda, radii, shift};
}

BoxSpec build_box_spec(int n, double lambda, double min_margin) {
  if (n < 1 || n > 6) throw std::invalid_argument("box spec: dimension must be in [1, 6]");
  if (!(lambda > 0.5 && lambda < 1.0)) {
    throw std::domain_error("box spec: lambda must lie in (1/2, 1)");
  }
  if (std::pow(lambda, n) <= 0.5) {
    throw std::domain_error(
        "box spec: infeasible, lambda^n <= 1/2 so lambda*r_i > r_{i+1} and "
        "lambda*r_n > r_1/2 cannot hold together");
  }
  Vec radii(n);
  radii(0) = 1.0;
  if (n > 1) {
    const double rho_lo = std::pow(0.5 / lambda, 1.0 / (n - 1));
    const double rho = std::sqrt(rho_lo * lambda);
    for (int i = 1; i < n; ++i) radii(i) = radii(i - 1) * rho;
  }
  const double s_lo = radii(0) / lambda - radii(n - 1);
  const double s_hi = radii(n - 1);
  return make_box_spec(lambda, radii, 0.5 * (s_lo + s_hi), min_margin);
}

AffineMap build_G(const BoxSpec& spec, double t) {
  const int n = spec.n;
  const AffineMap r = cyclic_rotation(n);
  // T_t shifts x_1 by t*s + (1 - t)*(-s).
  const double shift = (2.0 * t - 1.0) * spec.shift;
  AffineMap g;
  g.linear = spec.lambda * r.linear;
  g.translation = spec.lambda * shift * unit_vector(n, 0);
  return g;
}

std::pair<double, Mat> similarity_split(const Mat& linear, double tol) {
  const int n = static_cast<int>(linear.rows());
  const double det = linear.determinant();
  if (!(det > 0.0)) throw std::domain_error("similarity split: det <= 0");
  const double lam = std::pow(det, 1.0 / n);
  Mat gram = linear.transpose() * linear - lam * lam * Mat::Identity(n, n);
  if (gram.norm() > tol) {
    throw std::domain_error("similarity split: linear part is not lambda times a rotation");
  }
  return {lam, linear / lam};
}

Mat rotation_log(const Mat& u) {
  const int n = static_cast<int>(u.rows());
  RotationAngles rot = rotation_planes(u);
  Eigen::MatrixXd log_t = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j, angle] : rot.planes) {
    log_t(i, j) = -angle;
    log_t(j, i) = angle;
  }
  Eigen::MatrixXd out = rot.q * log_t * rot.q.transpose();
  // Exact skew symmetry.
  return Mat(0.5 * (out - out.transpose()));
}

Mat skew_exp(const Mat& k) {
  const int n = static_cast<int>(k.rows());
  Eigen::MatrixXd dense = k;
  Eigen::RealSchur<Eigen::MatrixXd> schur(dense);
  const Eigen::MatrixXd& t = schur.matrixT();
  Eigen::MatrixXd exp_t = Eigen::MatrixXd::Identity(n, n);
  int i = 0;
  while (i < n) {
    if (i + 1 < n && std::abs(t(i + 1, i)) > 1e-14) {
      set_plane_rotation(exp_t, i, i + 1, 0.5 * (t(i + 1, i) - t(i, i + 1)));
      i += 2;
    } else {
      exp_t(i, i) = std::exp(t(i, i));
      ++i;
    }
  }
  return Mat(schur.matrixU() * exp_t * schur.matrixU().transpose());
}

AffineMap affine_kth_root(const AffineMap& g, int k, double tol) {
  if (k < 1) throw std::invalid_argument("affine_kth_root: k must be >= 1");
  auto [lam, u] = similarity_split(g.linear);
  if (!(lam < 1.0)) throw std::domain_error("affine_kth_root: lambda must be < 1");
  if (k == 1) return g;

  const int n = g.dim();
  RotationAngles rot = rotation_planes(u);
  Eigen::MatrixXd root_t = Eigen::MatrixXd::Identity(n, n);
  for (auto [i, j, angle] : rot.planes) set_plane_rotation(root_t, i, j, angle / k);
  Mat linear = std::pow(lam, 1.0 / k) * Mat(rot.q * root_t * rot.q.transpose());

  const Vec q = fixed_point(g);
  AffineMap e{linear, q - linear * q};
  if (affine_distance(power(e, k), g) > tol) {
    throw std::runtime_error("affine_kth_root: e^k differs from g beyond tolerance");
  }
  return e;
}

double closeness_to_identity(const AffineMap& map, double domain_radius) {
  const int n = map.dim();
  const double lin = operator_norm(map.linear - Mat::Identity(n, n));
  return lin * domain_radius + map.translation.norm() + lin;
}

double affine_distance(const AffineMap& a, const AffineMap& b) {
  return std::max((a.linear - b.linear).norm(), (a.translation - b.translation).norm());
}

}  // namespace massive
