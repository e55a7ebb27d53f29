#include <cmath>
#include <random>

#include <doctest.h>

#include "massive/system_builder.hpp"
#include "oracles.hpp"

using namespace massive;

namespace {

const SkewSystem& fast_skew() {
  static const SkewSystem s{make_arc_pair(3), build_fiber_arc(preset_fiber_params(Preset::fast))};
  return s;
}

Vec flat(const DynamicalSystem& sys, const State& s) {
  Vec v(phase_dim(sys));
  int i = 0;
  v(i++) = s.phi;
  if (has_disk(sys)) {
    v(i++) = s.z.real();
    v(i++) = s.z.imag();
  }
  for (int a = 0; a < s.x.size(); ++a) v(i++) = s.x(a);
  return v;
}

}  // namespace

TEST_CASE("arc pairs") {
  CHECK_THROWS_AS(make_arc_pair(2), std::invalid_argument);
  CHECK_THROWS_AS(make_arc_pair(3, 0.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(make_arc_pair(3, 0.0, 1.0 / 3.0), std::invalid_argument);
  const CircleArcPair a = make_arc_pair(3);
  CHECK(a.arc_of(0.1) == 0);
  CHECK(a.arc_of(0.6) == 1);
  CHECK(a.arc_of(0.4) == -1);
  CHECK(a.arc_of(0.9) == -1);
}

TEST_CASE("transition profile") {
  const CircleArcPair a = make_arc_pair(3);
  CHECK(transition_profile(a, 0.2) == 0.0);
  CHECK(transition_profile(a, 0.7) == 1.0);
  // Quintic step over a gap of length 1/6: peak slope 15 / (8 gap).
  double peak = 0.0;
  const double h = 1e-7;
  for (int i = 0; i <= 20000; ++i) {
    const double phi = i / 20000.0;
    peak = std::max(peak, std::abs(transition_profile(a, phi + h) - transition_profile(a, phi - h)) /
                              (2 * h));
  }
  CHECK(peak == doctest::Approx(15.0 / (8.0 / 6.0)).epsilon(1e-4));
}

TEST_CASE("preimage branches") {
  const CircleArcPair a = make_arc_pair(3);
  CHECK(preimage_branch(a, 0.6, 0) == doctest::Approx(0.2));
  CHECK(preimage_branch(a, 0.6, 1) == doctest::Approx(1.6 / 3.0));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double phi = u(rng);
    for (int b : {0, 1}) {
      const double pre = preimage_branch(a, phi, b);
      CHECK(a.arc_of(pre) == b);
      CHECK(std::abs(wrap_circle(base_map(3, pre) - phi + 0.5) - 0.5) < 1e-15);
    }
  }
}

TEST_CASE("base map against exact rational iteration") {
  // Dyadic starts: every iterate m * phi mod 1 is representable, so the
  // double iteration must follow the integer one bit for bit.
  const long long den = 1LL << 40;
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    long long num = static_cast<long long>(rng() % static_cast<unsigned long long>(den));
    double phi = static_cast<double>(num) / static_cast<double>(den);
    for (int k = 0; k < 200; ++k) {
      num = oracle::times_mod(3, num, den);
      phi = base_map(3, phi);
      REQUIRE(phi == static_cast<double>(num) / static_cast<double>(den));
    }
  }
  // Other rationals: the only error is the rounding of num / q itself.
  const long long q = 1000003;
  long long num = 12345;
  for (int k = 0; k < 20; ++k) {
    const long long next = oracle::times_mod(5, num, q);
    CHECK(std::abs(base_map(5, static_cast<double>(num) / q) - static_cast<double>(next) / q) <
          1e-15);
    num = next;
  }
}

TEST_CASE("skew step uses f_0 over L0 and f_1 over L1") {
  const SkewSystem& sk = fast_skew();
  const DynamicalSystem sys = sk;
  State s;
  s.x = Vec::Constant(1, 0.52);
  s.phi = 0.1;
  State n = step(sys, s);
  CHECK(n.phi == doctest::Approx(0.3));
  CHECK(n.x(0) == eval_fiber(sk.arc, 0.0, s.x)(0));
  s.phi = 0.6;
  n = step(sys, s);
  CHECK(n.x(0) == eval_fiber(sk.arc, 1.0, s.x)(0));
}

TEST_CASE("Jacobians match finite differences") {
  const SkewSystem& sk = fast_skew();
  const EndoSystem endo{sk, 0.01, 0.01};
  const std::vector<DynamicalSystem> systems{sk, endo, make_solenoid(sk), make_solenoid(endo)};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& sys : systems) {
    for (int trial = 0; trial < 20; ++trial) {
      State s;
      s.phi = u(rng);
      s.z = {0.5 * u(rng), -0.5 * u(rng)};
      s.x = Vec::Constant(1, 0.5 + 0.3 * (u(rng) - 0.5));
      const Mat j = jacobian(sys, s);
      const int n = phase_dim(sys);
      REQUIRE(j.rows() == n);
      const double h = 1e-6;
      for (int c = 0; c < n; ++c) {
        State sp = s, sm = s;
        auto nudge = [&](State& st, double e) {
          if (c == 0) st.phi += e;
          else if (has_disk(sys) && c == 1) st.z += std::complex<double>(e, 0.0);
          else if (has_disk(sys) && c == 2) st.z += std::complex<double>(0.0, e);
          else st.x(c - (has_disk(sys) ? 3 : 1)) += e;
        };
        nudge(sp, h);
        nudge(sm, -h);
        Vec diff = flat(sys, step(sys, sp)) - flat(sys, step(sys, sm));
        for (int r : {0, n - 1}) diff(r) -= std::round(diff(r));  // circle and torus wrap
        const Vec fd = diff / (2 * h);
        CHECK((j.col(c) - fd).cwiseAbs().maxCoeff() < 2e-4);
      }
    }
  }
}

TEST_CASE("solenoid admissibility") {
  const SolenoidSystem sol = make_solenoid(fast_skew());
  CHECK(phase_dim(sol) == 4);
  CHECK(base_degree(sol) == 3);
  CHECK_THROWS_AS(make_solenoid(fast_skew(), 2.0, 0.6), std::domain_error);
  CHECK_THROWS_AS(make_solenoid(fast_skew(), 1.0, 0.25), std::domain_error);
  CHECK_THROWS_AS(make_solenoid(fast_skew(), 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("covering degree of the perturbed base") {
  const DegreeReport zero = covering_degree_check({fast_skew(), 0.0, 0.01}, 64, 16);
  CHECK(zero.min_derivative == 3.0);
  CHECK(zero.pass);
  const DegreeReport small = covering_degree_check({fast_skew(), 0.01, 0.01}, 64, 16);
  CHECK(small.bound == doctest::Approx(3.0 - 0.02 * M_PI));
  CHECK(small.pass);
  CHECK_FALSE(covering_degree_check({fast_skew(), 1.0, 0.0}, 64, 16).pass);
}

TEST_CASE("dominated splitting number") {
  const MdscReport a = mdsc_check(fast_skew(), 32, 400, Exec::serial);
  const MdscReport b = mdsc_check(fast_skew(), 32, 400, Exec::parallel);
  CHECK(a.L == b.L);
  CHECK(a.samples == 32 * 400);
  CHECK(a.margin == doctest::Approx(3.0 - a.L));
  CHECK(a.L >= 1.0 / 3.0 + a.forward_phi);
  CHECK(a.pass);
}

TEST_CASE("presets") {
  CHECK(parse_preset("fast") == Preset::fast);
  CHECK(preset_name(parse_preset("paper")) == "paper");
  CHECK_THROWS_AS(parse_preset("slow"), std::invalid_argument);
  CHECK(preset_fiber_params(Preset::paper).d == 2);
}
