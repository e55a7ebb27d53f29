#include <cmath>

#include <doctest.h>

#include "massive/affine_core.hpp"

using namespace massive;

namespace {

Mat rot2(double a) {
  Mat r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

AffineMap line(double a, double b) {
  return {Mat::Constant(1, 1, a), Vec::Constant(1, b)};
}

}  // namespace

TEST_CASE("apply and compose") {
  CHECK(apply(AffineMap::identity(2), v2(0.3, -0.2)).isApprox(v2(0.3, -0.2)));
  CHECK(apply(line(0.5, 0.5), Vec::Constant(1, 1.0))(0) == 1.0);

  const AffineMap lr{0.9 * rot2(M_PI / 2), Vec::Zero(2)};
  const Vec y = apply(lr, v2(1.0, 0.0));
  CHECK(y(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(y(1) == doctest::Approx(0.9));

  const AffineMap a2 = compose(line(0.5, 0.5), line(0.5, 0.5));
  CHECK(a2.linear(0, 0) == 0.25);
  CHECK(a2.translation(0) == 0.75);

  const AffineMap g{0.9 * rot2(0.3), v2(0.2, -0.4)};
  CHECK(affine_distance(compose(g, inverse(g)), AffineMap::identity(2)) < 1e-12);
  CHECK(affine_distance(compose(AffineMap::identity(2), g), g) == 0.0);
  CHECK_THROWS_AS(apply(g, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("fixed points") {
  CHECK(fixed_point(line(0.5, 0.5))(0) == doctest::Approx(1.0));
  CHECK(fixed_point(AffineMap{0.7 * rot2(1.0), Vec::Zero(2)}).norm() == 0.0);

  // (I - 0.9 R) p = b with R the quarter turn, inverted by hand.
  const Vec p = fixed_point({0.9 * rot2(M_PI / 2), v2(0.495, 0.0)});
  CHECK(p(0) == doctest::Approx(0.495 / 1.81));
  CHECK(p(1) == doctest::Approx(0.9 * 0.495 / 1.81));

  CHECK_THROWS_AS(fixed_point(line(1.0, 0.5)), std::domain_error);
  CHECK_THROWS_AS(fixed_point(line(-1.2, 0.0)), std::domain_error);
}

TEST_CASE("cyclic rotation") {
  CHECK(cyclic_rotation(1).linear(0, 0) == 1.0);

  const Vec y = apply(cyclic_rotation(2), v2(1.0, 2.0));
  CHECK(y.isApprox(v2(-2.0, 1.0)));

  Vec x(3);
  x << 1.0, 2.0, 3.0;
  Vec want(3);
  want << 3.0, 1.0, 2.0;
  CHECK(apply(cyclic_rotation(3), x).isApprox(want));
  // 3x3 determinant by cofactors of the permutation matrix.
  const Mat r = cyclic_rotation(3).linear;
  const double det = r(0, 0) * (r(1, 1) * r(2, 2) - r(1, 2) * r(2, 1)) -
                     r(0, 1) * (r(1, 0) * r(2, 2) - r(1, 2) * r(2, 0)) +
                     r(0, 2) * (r(1, 0) * r(2, 1) - r(1, 1) * r(2, 0));
  CHECK(det == 1.0);
  for (int n = 1; n <= 6; ++n) CHECK(cyclic_rotation(n).linear.determinant() == doctest::Approx(1.0));
}

TEST_CASE("box specs") {
  const BoxSpec s = make_box_spec(0.9, v2(1.0, 0.7), 0.55);
  CHECK(0.9 * 1.0 > 0.7);
  CHECK(0.9 * 0.7 > 0.5);
  CHECK(box_spec_margin(s) > 1e-3);
  CHECK_THROWS_AS(make_box_spec(0.9, v2(1.0, 0.95), 0.55), std::domain_error);
  CHECK_THROWS_AS(make_box_spec(0.9, v2(1.0, 0.7), 0.75), std::domain_error);

  // rho is the geometric mean of the feasible ratios (1 / (2 lambda), lambda),
  // so rho^2 = 1/2 for n = 2.
  const BoxSpec g = build_box_spec(2, 0.9);
  CHECK(g.radii(0) == 1.0);
  CHECK(g.radii(1) == doctest::Approx(std::sqrt(0.5)));
  CHECK(g.shift == doctest::Approx(0.5 / 0.9));
  CHECK(box_spec_margin(g) >= 1e-3);

  const BoxSpec one = build_box_spec(1, 0.9);
  CHECK(one.shift == doctest::Approx(0.5 / 0.9));

  const BoxSpec three = build_box_spec(3, 0.95);
  CHECK(0.95 * three.radii(1) > three.radii(2));
  CHECK(0.95 * three.radii(2) > 0.5);
  CHECK_THROWS_AS(build_box_spec(6, 0.88), std::domain_error);  // 0.88^6 < 1/2
  CHECK_THROWS_AS(build_box_spec(8, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(build_box_spec(2, 0.4), std::domain_error);
}

TEST_CASE("G_t images of the box") {
  const BoxSpec s = make_box_spec(0.9, v2(1.0, 0.7), 0.55);
  const AffineMap g0 = build_G(s, 0.0);
  const AffineMap g1 = build_G(s, 1.0);
  CHECK(std::abs(g0.translation(0)) == doctest::Approx(0.495));
  CHECK(g0.translation(0) == doctest::Approx(-g1.translation(0)));
  CHECK(g0.translation(1) == doctest::Approx(0.0));
  CHECK(build_G(s, 0.5).translation.norm() < 1e-15);

  // Half-sides from the columns of the linear part applied to the radii.
  const Mat half = g0.linear * s.radii.asDiagonal();
  CHECK(half.col(0).cwiseAbs().maxCoeff() == doctest::Approx(0.9));
  CHECK(half.col(1).cwiseAbs().maxCoeff() == doctest::Approx(0.63));
}

TEST_CASE("kth roots") {
  const AffineMap e = affine_kth_root(line(0.5, 0.5), 2);
  CHECK(e.linear(0, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
  CHECK(e.translation(0) == doctest::Approx(1.0 - std::sqrt(0.5)).epsilon(1e-14));
  CHECK(affine_distance(compose(e, e), line(0.5, 0.5)) < 1e-14);

  const AffineMap g{0.9 * rot2(M_PI / 2), Vec::Zero(2)};
  const AffineMap r9 = affine_kth_root(g, 9);
  CHECK(affine_distance(r9, {std::pow(0.9, 1.0 / 9) * rot2(M_PI / 18), Vec::Zero(2)}) < 1e-14);
  AffineMap acc = AffineMap::identity(2);
  for (int i = 0; i < 9; ++i) acc = compose(r9, acc);
  CHECK(affine_distance(acc, g) <= 1e-12);

  CHECK(affine_distance(affine_kth_root(g, 1), g) < 1e-15);
  CHECK_THROWS_AS(affine_kth_root({Mat::Identity(2, 2) * 0.9 + Mat::Constant(2, 2, 0.05),
                                   Vec::Zero(2)},
                                  3),
                  std::domain_error);
}

TEST_CASE("rotation logarithm") {
  for (double a : {0.0, 0.3, -1.2, 3.0}) {
    const Mat k = rotation_log(rot2(a));
    CHECK(k(1, 0) == doctest::Approx(a).epsilon(1e-13));
    CHECK((skew_exp(k) - rot2(a)).norm() < 1e-13);
  }
  // A half turn has the paired eigenvalue -1; the principal angle is pi.
  CHECK(std::abs(rotation_log(rot2(M_PI))(1, 0)) == doctest::Approx(M_PI));

  Mat q = cyclic_rotation(3).linear;
  CHECK((skew_exp(rotation_log(q)) - q).norm() < 1e-12);
  Mat q4 = cyclic_rotation(4).linear;
  CHECK((skew_exp(rotation_log(q4)) - q4).norm() < 1e-12);
}

TEST_CASE("similarity split") {
  auto [lam, u] = similarity_split(0.9 * rot2(0.7));
  CHECK(lam == doctest::Approx(0.9));
  CHECK((u - rot2(0.7)).norm() < 1e-13);
  Mat shear = Mat::Identity(2, 2);
  shear(0, 1) = 0.2;
  CHECK_THROWS_AS(similarity_split(shear), std::domain_error);
  Mat flip = Mat::Identity(2, 2);
  flip(1, 1) = -1.0;
  CHECK_THROWS_AS(similarity_split(flip), std::domain_error);
}

TEST_CASE("closeness to the identity") {
  CHECK(closeness_to_identity(AffineMap::identity(2), 1.0) == 0.0);
  CHECK(closeness_to_identity(AffineMap::translation_by(v2(0.3, 0.4)), 1.0) ==
        doctest::Approx(0.5));
  // ||0.9 R - I|| for the quarter turn, from the 2x2 singular values.
  CHECK(closeness_to_identity({0.9 * rot2(M_PI / 2), Vec::Zero(2)}, 1.0) >=
        std::sqrt(1.81) - 1e-12);

  // Roots of a fixed G_t approach the identity as k grows.
  const AffineMap g = build_G(build_box_spec(2, 0.9), 0.3);
  double prev = 1e9;
  for (int k : {1, 2, 4, 8, 16, 32}) {
    const double c = closeness_to_identity(affine_kth_root(g, k), 1.0);
    CHECK(c < prev);
    prev = c;
  }
}
