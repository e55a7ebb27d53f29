#include <cmath>

#include "massive/kernels.hpp"
#include "massive/region_geometry.hpp"

namespace massive {

namespace {

CellStatus classify_one(const Cell& c, const Parallelotope& target,
                        const std::vector<Parallelotope>& pieces) {
  const int n = target.dim();
  std::vector<Vec> corners;
  corners.reserve(std::size_t{1} << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u(i) = (mask >> i) & 1u ? c.upper(i) : c.lower(i);
    corners.push_back(apply(target.frame(), u));
  }
  for (const auto& p : pieces) {
    bool all = true;
    for (const auto& x : corners) {
      if (!p.contains(x)) {
        all = false;
        break;
      }
    }
    if (all) return CellStatus::accepted;
  }
  const Vec mid = apply(target.frame(), Vec(0.5 * (c.lower + c.upper)));
  for (const auto& p : pieces) {
    if (p.contains(mid)) return CellStatus::split;
  }
  return CellStatus::uncovered;
}

}  // namespace

std::vector<CellStatus> classify_cells(const std::vector<Cell>& cells, const Parallelotope& target,
                                       const std::vector<Parallelotope>& shrunk_pieces, Exec exec) {
  const long n = static_cast<long>(cells.size());
  std::vector<CellStatus> out(cells.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) out[i] = classify_one(cells[i], target, shrunk_pieces);
  } else {
    for (long i = 0; i < n; ++i) out[i] = classify_one(cells[i], target, shrunk_pieces);
  }
  return out;
}

double covering_radius(const std::vector<Vec>& queries, const std::vector<Vec>& points, Exec exec) {
  if (queries.empty()) return 0.0;
  if (points.empty()) return std::numeric_limits<double>::infinity();
  // Sweep outward from each query along the first coordinate and stop once
  // that coordinate alone exceeds the best distance.
  std::vector<Vec> sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const Vec& a, const Vec& b) { return a(0) < b(0); });
  std::vector<double> key(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) key[i] = sorted[i](0);
  const long np = static_cast<long>(sorted.size());

  auto nearest = [&](long q) {
    const Vec& x = queries[q];
    const long start = std::lower_bound(key.begin(), key.end(), x(0)) - key.begin();
    double best = std::numeric_limits<double>::infinity();
    for (long i = start; i < np; ++i) {
      const double dx = key[i] - x(0);
      if (dx * dx > best) break;
      best = std::min(best, (sorted[i] - x).squaredNorm());
    }
    for (long i = start - 1; i >= 0; --i) {
      const double dx = x(0) - key[i];
      if (dx * dx > best) break;
      best = std::min(best, (sorted[i] - x).squaredNorm());
    }
    return std::sqrt(best);
  };
  return max_over(static_cast<long>(queries.size()), nearest, exec);
}

}  // namespace massive
