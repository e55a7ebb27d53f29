#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "massive/attractor_lab.hpp"
#include "massive/kernels.hpp"
#include "oracles.hpp"

using namespace massive;

namespace {

const SkewSystem& fast_skew() {
  static const SkewSystem s{make_arc_pair(3), build_fiber_arc(preset_fiber_params(Preset::fast))};
  return s;
}

SkewSystem identity_skew(int d) { return {make_arc_pair(3), FiberArc::identity(d)}; }

std::vector<Eigen::VectorXd> to_dyn(const std::vector<Vec>& v) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& x : v) out.emplace_back(x);
  return out;
}

}  // namespace

TEST_CASE("random streams") {
  auto a = make_rng(7, 3);
  auto b = make_rng(7, 3);
  auto c = make_rng(7, 4);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  for (int i = 0; i < 1000; ++i) CHECK(sample_ball(a, 2, 0.3).norm() <= 0.3);
}

TEST_CASE("occupancy grid bookkeeping") {
  OccupancyGrid g = OccupancyGrid::make({4, 2}, Vec::Constant(1, 0.25), Vec::Constant(1, 0.75), 10);
  CHECK(g.cell_count() == 8);
  CHECK(g.index(0.3, Vec::Constant(1, 0.7)) == 1 * 2 + 1);
  CHECK(g.index(0.3, Vec::Constant(1, 0.8)) == -1);
  g.record(0.3, Vec::Constant(1, 0.7));
  g.record(0.9, Vec::Constant(1, 0.3));
  g.record(0.9, Vec::Constant(1, 0.1));
  CHECK(g.total_steps == 3);
  CHECK(g.outside == 1);

  std::stringstream ss;
  g.write(ss);
  const std::string text = ss.str();
  CHECK(text.rfind("OGRID1 2 4 2\n10 3\n", 0) == 0);
  const OccupancyGrid back = OccupancyGrid::read(ss);
  CHECK(back.dims == g.dims);
  CHECK(back.counts == g.counts);
  CHECK(back.outside == 1);
  CHECK(back.burn_in == 10);

  std::stringstream bad("OGRID2 2 4 2\n0 0\n");
  CHECK_THROWS(OccupancyGrid::read(bad));
}

TEST_CASE("occupancy runs") {
  OccupancyParams p;
  p.n_starts = 4;
  p.steps = 500;
  p.burn_in = 500;
  const OccupancyGrid empty = occupancy_run(fast_skew(), p);
  std::uint64_t sum = 0;
  for (auto c : empty.counts) sum += c;
  CHECK(sum == 0);
  CHECK(empty.total_steps == 0);

  p.n_starts = 8;
  p.steps = 3000;
  p.burn_in = 100;
  const OccupancyGrid a = occupancy_run(fast_skew(), p, Exec::serial);
  const OccupancyGrid b = occupancy_run(fast_skew(), p, Exec::parallel);
  CHECK(a.counts == b.counts);
  CHECK(a.total_steps == 8u * 2900u);
}

TEST_CASE("interior occupancy on synthetic grids") {
  const RegionUnion a({Parallelotope::box(Vec::Zero(1), Vec::Constant(1, 0.1))});
  OccupancyGrid g = OccupancyGrid::make({8, 20}, Vec::Constant(1, 0.25), Vec::Constant(1, 0.75), 0);
  std::fill(g.counts.begin(), g.counts.end(), 5);
  g.total_steps = 5 * g.counts.size();
  InteriorReport r = interior_occupancy(g, a);
  CHECK(r.pass);
  // Cells of width 0.025 on [0.4, 0.6]; grown by one width, the inner 6 still fit.
  CHECK(r.interior_cells == 8 * 6);
  g.counts[3 * 20 + 10] = 0;
  r = interior_occupancy(g, a);
  CHECK_FALSE(r.pass);
  CHECK(r.empty_cells == 1);
}

TEST_CASE("covering radius kernel against brute force") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int d : {1, 2}) {
    std::vector<Vec> pts, qs;
    for (int i = 0; i < 3000; ++i) {
      Vec x(d);
      for (int a = 0; a < d; ++a) x(a) = u(rng);
      pts.push_back(x);
    }
    for (int i = 0; i < 400; ++i) {
      Vec x(d);
      for (int a = 0; a < d; ++a) x(a) = 1.3 * u(rng);
      qs.push_back(x);
    }
    const double want = oracle::covering_radius(to_dyn(qs), to_dyn(pts));
    CHECK(covering_radius(qs, pts, Exec::serial) == doctest::Approx(want).epsilon(1e-14));
    CHECK(covering_radius(qs, pts, Exec::parallel) == covering_radius(qs, pts, Exec::serial));
  }
  CHECK(std::isinf(covering_radius({Vec::Zero(1)}, {}, Exec::serial)));
  CHECK(covering_radius({}, {Vec::Zero(1)}, Exec::serial) == 0.0);
}

TEST_CASE("trapping") {
  const TrappingReport id = trapping_check(identity_skew(1), 64, 8);
  CHECK(id.margin == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_FALSE(id.pass);
  const TrappingReport fast = trapping_check(fast_skew(), 256, 8);
  CHECK(fast.pass);
  const double scale = (1.0 - 0.9) * fast_skew().arc.r_hat;
  CHECK(fast.margin > 0.1 * scale);
  CHECK(fast.margin < 10.0 * scale);
}

TEST_CASE("density induction at depth 16") {
  const SkewSystem& sk = fast_skew();
  const DensityReport r = density_certificate(sk, 0.37, 16, Vec::Zero(1), 256, 1, Exec::serial);
  CHECK(r.points.size() == 65536);
  CHECK(r.lambda_eff == doctest::Approx(0.9));
  CHECK(r.bound == doctest::Approx(std::pow(0.9, 15) * r.diam_a + std::pow(0.9, 16) * 2 * sk.arc.r_hat));
  CHECK(r.pass);

  // Reference grid rebuilt here, cell centers over the bounding interval of A.
  const RegionUnion a = sk.arc.region_chart();
  auto [lo, hi] = a.bounding_box();
  std::vector<Eigen::VectorXd> queries;
  for (int i = 0; i < 256; ++i) {
    Eigen::VectorXd y(1);
    y(0) = lo(0) + (hi(0) - lo(0)) * (i + 0.5) / 256;
    bool in = false;
    for (const auto& p : a.pieces()) {
      in = in || oracle::inside({Eigen::MatrixXd(p.frame().linear),
                                 Eigen::VectorXd(p.frame().translation)},
                                y);
    }
    if (in) queries.push_back(y);
  }
  CHECK(r.covering_radius == doctest::Approx(oracle::covering_radius(queries, to_dyn(r.points))).epsilon(1e-12));

  const DensityReport par = density_certificate(sk, 0.37, 16, Vec::Zero(1), 256, 1, Exec::parallel);
  CHECK(par.covering_radius == r.covering_radius);

  // A different seed moves every word endpoint by at most lambda^n diam(A_hat).
  const DensityReport other =
      density_certificate(sk, 0.37, 16, Vec::Constant(1, 0.5 * sk.arc.scale), 256, 1);
  CHECK(std::abs(other.covering_radius - r.covering_radius) <=
        2.0 * std::pow(0.9, 16) * 2 * sk.arc.r_hat);

  CHECK_THROWS_AS(density_certificate(sk, 0.0, 4, Vec::Constant(1, 0.2)), std::invalid_argument);
}

TEST_CASE("graph contraction") {
  const GraphReport zero = graph_contraction_test(fast_skew(), 0, 20, 1);
  CHECK(zero.max_ratio == doctest::Approx(1.0));
  const GraphReport g = graph_contraction_test(make_solenoid(fast_skew()), 50, 200, 1);
  CHECK(g.pass);
  CHECK(g.max_ratio <= std::pow(0.9, 50) * (1 + 1e-6));
  CHECK_THROWS_AS(graph_contraction_test(EndoSystem{fast_skew(), 0.01, 0.01}, 5, 5, 1),
                  std::invalid_argument);
}

TEST_CASE("Birkhoff averages") {
  auto rng = make_rng(3, 0);
  const State s = random_state(fast_skew(), rng);
  CHECK(birkhoff_average(fast_skew(), [](const State&) { return 1.0; }, s, 20000, 100) == 1.0);
  const double c = birkhoff_average(
      fast_skew(), [](const State& st) { return std::cos(2 * M_PI * st.phi); }, s, 100000, 1000);
  CHECK(std::abs(c) <= 3.0 / std::sqrt(99000.0));
  CHECK_THROWS_AS(birkhoff_average(fast_skew(), [](const State&) { return 0.0; }, s, 100, 10),
                  std::invalid_argument);
}

TEST_CASE("SRB runs are reproducible across execution paths") {
  const SrbReport a = srb_consistency(fast_skew(), 3, 20000, 100, 9, Exec::serial);
  const SrbReport b = srb_consistency(fast_skew(), 3, 20000, 100, 9, Exec::parallel);
  CHECK(a.averages == b.averages);
  CHECK(a.averages.size() == 3);
  CHECK(a.averages[0].size() == standard_test_functions().size());
}

TEST_CASE("Lyapunov spectra") {
  auto rng = make_rng(1, 0);
  const DynamicalSystem id = identity_skew(2);
  const LyapunovReport li = lyapunov_spectrum(id, random_state(id, rng), 100000);
  for (double e : li.fiber) CHECK(e == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(li.base == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  const DynamicalSystem fast = fast_skew();
  const LyapunovReport lf = lyapunov_spectrum(fast, random_state(fast, rng), 100000);
  CHECK(std::abs(lf.base - std::log(3.0)) <= 1e-6);
  for (double e : lf.fiber) CHECK(e <= std::log(0.9) + 0.02);

  const DynamicalSystem sol = make_solenoid(fast_skew());
  const LyapunovReport ls = lyapunov_spectrum(sol, random_state(sol, rng), 100000);
  CHECK(ls.spectrum.size() == 4);
  CHECK(std::abs(ls.base - std::log(3.0)) <= 1e-6);
}

TEST_CASE("massive verdicts") {
  MassiveParams p;
  p.occupancy.n_starts = 4;
  p.occupancy.steps = 20000;
  p.srb_starts = 3;
  p.srb_steps = 20000;
  p.graph_trials = 50;
  p.density_depth = 10;
  const MassiveVerdict id = massive_attractor_report(identity_skew(1), p);
  CHECK_FALSE(id.trapping.pass);
  CHECK_FALSE(id.massive);

  p.occupancy.n_starts = 40;
  p.occupancy.steps = 40000;
  p.srb_steps = 200000;
  const MassiveVerdict fast = massive_attractor_report(fast_skew(), p);
  CHECK(fast.trapping.pass);
  CHECK(fast.density_pass);
  CHECK(fast.graph.pass);
  CHECK(fast.interior.pass);
  CHECK(fast.massive);

  p.region_factor = 0.95;
  const MassiveVerdict endo = massive_attractor_report(EndoSystem{fast_skew(), 0.01, 0.01}, p);
  CHECK(endo.degree_pass);
  CHECK(endo.massive);
}
