#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "massive/execution.hpp"
#include "massive/linalg.hpp"

namespace massive {

class Parallelotope;
struct Cell;

// Low-level data-parallel loops. Each has a serial and an OpenMP path with
// identical output; higher modules call these and pick the path via Exec.

enum class CellStatus : std::uint8_t { accepted, split, uncovered };

/// Classifies the cells of one subdivision level of `target`'s parameter box
/// against already-shrunk pieces.
std::vector<CellStatus> classify_cells(const std::vector<Cell>& cells, const Parallelotope& target,
                                       const std::vector<Parallelotope>& shrunk_pieces, Exec exec);

/// For each query point, distance to its nearest point in `points`.
/// Returns the max over queries (the covering radius of `points`).
double covering_radius(const std::vector<Vec>& queries, const std::vector<Vec>& points, Exec exec);

/// Max of f(i) over i in [0, n); f must be thread-safe. Returns -inf for n = 0.
template <class F>
double max_over(long n, F&& f, Exec exec) {
  double best = -std::numeric_limits<double>::infinity();
  if (exec == Exec::parallel) {
#pragma omp parallel for reduction(max : best) schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) best = std::max(best, f(i));
  } else {
    for (long i = 0; i < n; ++i) best = std::max(best, f(i));
  }
  return best;
}

}  // namespace massive
