#include "massive/attractor_lab.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/QR>

#include "massive/kernels.hpp"

namespace massive {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

Vec torus_center(int d) { return Vec::Constant(d, 0.5); }

// Neumaier compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      c += (sum - t) + v;
    } else {
      c += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

bool is_skew_like(const DynamicalSystem& sys) {
  if (std::holds_alternative<SkewSystem>(sys)) return true;
  if (const auto* sol = std::get_if<SolenoidSystem>(&sys)) {
    return std::holds_alternative<SkewSystem>(sol->base);
  }
  return false;
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t counter) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(counter),
                    static_cast<std::uint32_t>(counter >> 32)};
  return std::mt19937_64(seq);
}

Vec sample_ball(std::mt19937_64& rng, int d, double r) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(d);
  do {
    for (int i = 0; i < d; ++i) v(i) = u(rng);
  } while (v.squaredNorm() > 1.0);
  return r * v;
}

State random_state(const DynamicalSystem& sys, std::mt19937_64& rng) {
  const FiberArc& arc = skew_core(sys).arc;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  State s;
  s.phi = u(rng);
  if (const auto* sol = std::get_if<SolenoidSystem>(&sys)) {
    const Vec z = sample_ball(rng, 2, sol->disk_radius);
    s.z = {z(0), z(1)};
  }
  s.x = wrap_torus(torus_center(arc.d) + sample_ball(rng, arc.d, arc.r_hat));
  return s;
}

// ---------------------------------------------------------------------------
// Occupancy

OccupancyGrid OccupancyGrid::make(std::vector<int> dims, Vec lower, Vec upper,
                                  std::uint64_t burn_in) {
  if (dims.size() != static_cast<std::size_t>(lower.size()) + 1) {
    throw std::invalid_argument("occupancy grid: dims must be 1 + fiber dimension");
  }
  OccupancyGrid g;
  long cells = 1;
  for (int n : dims) {
    if (n < 1) throw std::invalid_argument("occupancy grid: dims must be positive");
    cells *= n;
  }
  g.dims = std::move(dims);
  g.lower = std::move(lower);
  g.upper = std::move(upper);
  g.counts.assign(cells, 0);
  g.burn_in = burn_in;
  return g;
}

long OccupancyGrid::index(double phi, const Vec& x) const {
  long idx = std::min(static_cast<long>(phi * dims[0]), static_cast<long>(dims[0] - 1));
  for (int i = 0; i < x.size(); ++i) {
    const double u = (x(i) - lower(i)) / (upper(i) - lower(i));
    if (!(u >= 0.0 && u < 1.0)) return -1;
    idx = idx * dims[i + 1] + static_cast<long>(u * dims[i + 1]);
  }
  return idx;
}

void OccupancyGrid::record(double phi, const Vec& x) {
  ++total_steps;
  const long idx = index(phi, x);
  if (idx < 0) {
    ++outside;
  } else {
    ++counts[idx];
  }
}

void OccupancyGrid::merge(const OccupancyGrid& other) {
  if (dims != other.dims || burn_in != other.burn_in) {
    throw std::invalid_argument("occupancy merge: grids differ in shape or burn-in");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total_steps += other.total_steps;
  outside += other.outside;
}

void OccupancyGrid::write(std::ostream& os) const {
  os << "OGRID1 " << dims.size();
  for (int n : dims) os << ' ' << n;
  os << '\n' << burn_in << ' ' << total_steps << '\n';
  for (auto c : counts) os << c << '\n';
}

OccupancyGrid OccupancyGrid::read(std::istream& is) {
  std::string magic;
  std::size_t rank = 0;
  if (!(is >> magic >> rank) || magic != "OGRID1" || rank < 2) {
    throw std::runtime_error("OGRID1: bad header");
  }
  OccupancyGrid g;
  g.dims.resize(rank);
  long cells = 1;
  for (auto& n : g.dims) {
    if (!(is >> n) || n < 1) throw std::runtime_error("OGRID1: bad dims");
    cells *= n;
  }
  if (!(is >> g.burn_in >> g.total_steps)) throw std::runtime_error("OGRID1: bad step line");
  g.counts.resize(cells);
  std::uint64_t sum = 0;
  for (auto& c : g.counts) {
    if (!(is >> c)) throw std::runtime_error("OGRID1: truncated counts");
    sum += c;
  }
  if (sum > g.total_steps) throw std::runtime_error("OGRID1: counts exceed total_steps");
  g.outside = g.total_steps - sum;
  return g;
}

OccupancyGrid occupancy_run(const DynamicalSystem& sys, const OccupancyParams& params,
                            Exec exec) {
  const FiberArc& arc = skew_core(sys).arc;
  const int d = arc.d;
  const Vec p = torus_center(d);
  const Vec lo = p - Vec::Constant(d, arc.r_hat);
  const Vec hi = p + Vec::Constant(d, arc.r_hat);
  OccupancyGrid total = OccupancyGrid::make(params.dims, lo, hi, params.burn_in);

  auto run_start = [&](long i, OccupancyGrid& g) {
    auto rng = make_rng(params.seed, static_cast<std::uint64_t>(i));
    State s = random_state(sys, rng);
    for (long t = 1; t <= params.steps; ++t) {
      s = step(sys, s);
      if (t > params.burn_in) g.record(s.phi, s.x);
    }
  };

  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      OccupancyGrid local = OccupancyGrid::make(params.dims, lo, hi, params.burn_in);
#pragma omp for schedule(dynamic, 1)
      for (long i = 0; i < params.n_starts; ++i) run_start(i, local);
#pragma omp critical
      total.merge(local);
    }
  } else {
    for (long i = 0; i < params.n_starts; ++i) run_start(i, total);
  }
  return total;
}

InteriorReport interior_occupancy(const OccupancyGrid& grid, const RegionUnion& region) {
  const int d = static_cast<int>(grid.dims.size()) - 1;
  const Vec p = torus_center(d);
  Vec width(d);
  long fiber_cells = 1;
  for (int i = 0; i < d; ++i) {
    width(i) = (grid.upper(i) - grid.lower(i)) / grid.dims[i + 1];
    fiber_cells *= grid.dims[i + 1];
  }
  const double grow = width.norm();

  InteriorReport rep;
  rep.min_count = std::numeric_limits<std::uint64_t>::max();
  for (long f = 0; f < fiber_cells; ++f) {
    Vec center(d);
    long rem = f;
    for (int i = d - 1; i >= 0; --i) {
      const long j = rem % grid.dims[i + 1];
      rem /= grid.dims[i + 1];
      center(i) = grid.lower(i) + (j + 0.5) * width(i) - p(i);
    }
    const Parallelotope grown =
        Parallelotope::box(center, 0.5 * width + Vec::Constant(d, grow));
    if (!certify_covered(grown, region, 0.0, 8, Exec::serial).covered) continue;
    for (int row = 0; row < grid.dims[0]; ++row) {
      const std::uint64_t c = grid.counts[static_cast<std::size_t>(row) * fiber_cells + f];
      ++rep.interior_cells;
      rep.min_count = std::min(rep.min_count, c);
      if (c == 0) ++rep.empty_cells;
    }
  }
  if (rep.interior_cells == 0) rep.min_count = 0;
  rep.pass = rep.interior_cells > 0 && rep.empty_cells == 0 && grid.outside == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Trapping

TrappingReport trapping_check(const DynamicalSystem& sys, int n_phi, int n_dirs) {
  const FiberArc& arc = skew_core(sys).arc;
  const int d = arc.d;
  const Vec p = torus_center(d);
  std::vector<Vec> dirs;
  if (d == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
  } else {
    for (int a = 0; a < n_dirs; ++a) {
      Vec v(2);
      v << std::cos(kTwoPi * a / n_dirs), std::sin(kTwoPi * a / n_dirs);
      dirs.push_back(v);
    }
  }
  double reach = 0.0;
  for (int i = 0; i < n_phi; ++i) {
    State s;
    s.phi = (i + 0.5) / n_phi;
    for (const Vec& u : dirs) {
      s.x = wrap_torus(p + arc.r_hat * u);
      reach = std::max(reach, torus_delta(step(sys, s).x, p).norm());
    }
  }
  TrappingReport rep;
  rep.margin = arc.r_hat - reach;
  rep.pass = rep.margin > 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Density induction

double inner_contraction(const FiberArc& arc) {
  return arc.identity_arc ? 1.0 : operator_norm(arc.linear);
}

DensityReport density_certificate(const SkewSystem& sys, double phi, int n, const Vec& seed,
                                  int grid_per_axis, std::uint64_t rng_seed, Exec exec) {
  const FiberArc& arc = sys.arc;
  const int d = arc.d;
  if (n < 1) throw std::invalid_argument("density: depth must be >= 1");
  const RegionUnion a = arc.region_chart();
  if (!contains_point(a, seed)) throw std::invalid_argument("density: seed must lie in A");
  const Vec p = torus_center(d);

  DensityReport rep;
  rep.phi = phi;
  rep.depth = n;
  rep.monte_carlo = n > kMaxFullDepth;
  const long words = rep.monte_carlo ? 1000000L : (1L << n);
  rep.points.resize(words);

  auto word_point = [&](long w) {
    std::uint64_t bits = static_cast<std::uint64_t>(w);
    std::mt19937_64 rng;
    if (rep.monte_carlo) rng = make_rng(rng_seed, static_cast<std::uint64_t>(w));
    std::vector<double> chain(n);
    double cur = phi;
    for (int j = 0; j < n; ++j) {
      int b;
      if (rep.monte_carlo) {
        b = static_cast<int>(rng() & 1u);
      } else {
        b = static_cast<int>(bits & 1u);
        bits >>= 1;
      }
      cur = preimage_branch(sys.arcs, cur, b);
      chain[j] = cur;
    }
    Vec x = wrap_torus(p + seed);
    for (int j = n - 1; j >= 0; --j) x = skew_fiber(sys, chain[j], x);
    rep.points[w] = torus_delta(x, p);
    return 0.0;
  };
  max_over(words, word_point, exec);

  // Reference grid on A.
  auto [lo, hi] = a.bounding_box();
  std::vector<Vec> queries;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= grid_per_axis;
  for (long q = 0; q < total; ++q) {
    Vec y(d);
    long rem = q;
    for (int i = 0; i < d; ++i) {
      y(i) = lo(i) + (hi(i) - lo(i)) * (static_cast<double>(rem % grid_per_axis) + 0.5) /
                         grid_per_axis;
      rem /= grid_per_axis;
    }
    if (contains_point(a, y)) queries.push_back(y);
  }
  rep.covering_radius = covering_radius(queries, rep.points, exec);
  rep.lambda_eff = inner_contraction(arc);
  rep.diam_a = diameter(a);
  rep.diam_a_hat = 2.0 * arc.r_hat;
  rep.bound = std::pow(rep.lambda_eff, n - 1) * rep.diam_a +
              std::pow(rep.lambda_eff, n) * rep.diam_a_hat;
  rep.pass = rep.covering_radius <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Graph property

GraphReport graph_contraction_test(const DynamicalSystem& sys, int n, int trials,
                                   std::uint64_t seed, Exec exec) {
  if (!is_skew_like(sys)) {
    throw std::invalid_argument("graph test: needs a skew product (or its solenoid extension)");
  }
  if (n < 0 || trials < 1) throw std::invalid_argument("graph test: bad length or trials");
  const SkewSystem& skew = skew_core(sys);
  const FiberArc& arc = skew.arc;
  const int d = arc.d;
  const int m = skew.m();
  const Vec p = torus_center(d);

  GraphReport rep;
  rep.ratios.resize(trials);
  auto trial = [&](long i) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> branch(0, m - 1);
    std::vector<double> chain(n);
    double cur = u(rng);
    for (int j = 0; j < n; ++j) {
      cur = (cur + branch(rng)) / m;
      chain[j] = cur;
    }
    Vec x = wrap_torus(p + sample_ball(rng, d, arc.r_check));
    Vec y = wrap_torus(p + sample_ball(rng, d, arc.r_check));
    const double before = torus_distance(x, y);
    for (int j = n - 1; j >= 0; --j) {
      x = skew_fiber(skew, chain[j], x);
      y = skew_fiber(skew, chain[j], y);
    }
    rep.ratios[i] = before > 0.0 ? torus_distance(x, y) / before : 0.0;
    return rep.ratios[i];
  };
  rep.max_ratio = max_over(trials, trial, exec);
  rep.bound = std::pow(inner_contraction(arc), n) * (1.0 + 1e-6);
  rep.pass = rep.max_ratio <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Birkhoff averages

namespace {

std::vector<double> orbit_averages(const DynamicalSystem& sys, const std::vector<TestFn>& fns,
                                   State s, long steps, long burn_in) {
  if (steps < 10000) throw std::invalid_argument("birkhoff: steps must be >= 10^4");
  if (burn_in < 0 || burn_in >= steps) {
    throw std::invalid_argument("birkhoff: burn_in must lie in [0, steps)");
  }
  std::vector<CompensatedSum> sums(fns.size());
  for (long t = 1; t <= steps; ++t) {
    s = step(sys, s);
    if (t > burn_in) {
      for (std::size_t f = 0; f < fns.size(); ++f) sums[f].add(fns[f](s));
    }
  }
  std::vector<double> out(fns.size());
  const double count = static_cast<double>(steps - burn_in);
  for (std::size_t f = 0; f < fns.size(); ++f) out[f] = sums[f].value() / count;
  return out;
}

}  // namespace

double birkhoff_average(const DynamicalSystem& sys, const TestFn& psi, const State& start,
                        long steps, long burn_in) {
  return orbit_averages(sys, {psi}, start, steps, burn_in)[0];
}

std::vector<TestFn> standard_test_functions() {
  return {
      [](const State& s) { return std::cos(kTwoPi * s.phi); },
      [](const State& s) { return s.x(0) - 0.5; },
      [](const State& s) { return (s.x(0) - 0.5) * (s.x(0) - 0.5); },
  };
}

SrbReport srb_consistency(const DynamicalSystem& sys, int n_starts, long steps, long burn_in,
                          std::uint64_t seed, Exec exec) {
  const auto fns = standard_test_functions();
  SrbReport rep;
  rep.averages.resize(n_starts);
  auto one = [&](long i) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(i));
    rep.averages[i] = orbit_averages(sys, fns, random_state(sys, rng), steps, burn_in);
    return 0.0;
  };
  max_over(n_starts, one, exec);
  for (int i = 0; i < n_starts; ++i) {
    rep.max_abs_cos = std::max(rep.max_abs_cos, std::abs(rep.averages[i][0]));
    for (int j = i + 1; j < n_starts; ++j) {
      for (std::size_t f = 0; f < fns.size(); ++f) {
        rep.max_deviation =
            std::max(rep.max_deviation, std::abs(rep.averages[i][f] - rep.averages[j][f]));
      }
    }
  }
  rep.pass = rep.max_deviation <= 1e-2 && rep.max_abs_cos <= 3e-3;
  return rep;
}

// ---------------------------------------------------------------------------
// Lyapunov spectrum

LyapunovReport lyapunov_spectrum(const DynamicalSystem& sys, const State& start, long steps,
                                 long burn_in) {
  if (steps < 100000) throw std::invalid_argument("lyapunov: steps must be >= 10^5");
  const int n = phase_dim(sys);
  const int d = fiber_dim(sys);
  // Natural order is (phi, z, x); slot i of the reordered frame reads
  // natural coordinate perm[i].
  std::vector<int> perm;
  for (int i = 0; i < d; ++i) perm.push_back(n - d + i);
  for (int i = 1; i < n - d; ++i) perm.push_back(i);
  perm.push_back(0);

  Mat q = Mat::Identity(n, n);
  std::vector<CompensatedSum> logs(n);
  CompensatedSum log_det;
  State s = start;
  for (long t = 0; t < burn_in + steps; ++t) {
    const Mat j = jacobian(sys, s);
    Mat jp(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) jp(r, c) = j(perm[r], perm[c]);
    }
    Eigen::HouseholderQR<Mat> qr(jp * q);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    q = qr.householderQ();
    if (t >= burn_in) {
      for (int i = 0; i < n; ++i) logs[i].add(std::log(std::abs(r(i, i))));
      log_det.add(std::log(std::abs(j.determinant())));
    }
    s = step(sys, s);
  }
  LyapunovReport rep;
  for (int i = 0; i < n; ++i) rep.spectrum.push_back(logs[i].value() / steps);
  rep.base = rep.spectrum.back();
  rep.fiber.assign(rep.spectrum.begin(), rep.spectrum.begin() + d);
  rep.mean_log_det = log_det.value() / steps;
  return rep;
}

// ---------------------------------------------------------------------------
// Aggregate verdict

MassiveVerdict massive_attractor_report(const DynamicalSystem& sys, const MassiveParams& params,
                                        Exec exec) {
  const FiberArc& arc = skew_core(sys).arc;
  MassiveVerdict v;
  v.trapping = trapping_check(sys, params.trap_phi, params.trap_dirs);

  OccupancyParams occ = params.occupancy;
  occ.seed = params.seed;
  const OccupancyGrid grid = occupancy_run(sys, occ, exec);
  const RegionUnion a =
      scaled_about(arc.region_chart(), Vec::Zero(arc.d), params.region_factor);
  v.interior = interior_occupancy(grid, a);

  v.srb = srb_consistency(sys, params.srb_starts, params.srb_steps, params.srb_burn_in,
                          params.seed + 1, exec);

  if (is_skew_like(sys)) {
    const SkewSystem& skew = skew_core(sys);
    for (double phi : params.density_phis) {
      v.density.push_back(density_certificate(skew, phi, params.density_depth,
                                              Vec::Zero(arc.d), 256, params.seed, exec));
      v.density.back().points.clear();
      v.density_pass = v.density_pass && v.density.back().pass;
    }
    v.graph = graph_contraction_test(sys, params.graph_length, params.graph_trials,
                                     params.seed + 2, exec);
    v.graph.ratios.clear();
  } else {
    v.graph.pass = true;
    const EndoSystem* endo = std::get_if<EndoSystem>(&sys);
    if (!endo) endo = &std::get<EndoSystem>(std::get<SolenoidSystem>(sys).base);
    v.degree_pass = covering_degree_check(*endo, 256, 64).pass;
  }
  v.massive = v.trapping.pass && v.interior.pass && v.srb.pass && v.density_pass &&
              v.graph.pass && v.degree_pass;
  return v;
}

}  // namespace massive
