#include "massive/region_geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "massive/kernels.hpp"

namespace massive {

Parallelotope::Parallelotope(AffineMap frame) : frame_(std::move(frame)) {
  Eigen::FullPivLU<Mat> lu(frame_.linear);
  degenerate_ = !lu.isInvertible();
  if (!degenerate_) inverse_ = lu.inverse();
}

Parallelotope Parallelotope::box(const Vec& center, const Vec& half_widths) {
  return Parallelotope(AffineMap{half_widths.asDiagonal(), center});
}

Vec Parallelotope::local_coords(const Vec& x) const {
  const Vec d = x - frame_.translation;
  if (!degenerate_) return inverse_ * d;
  Eigen::MatrixXd dense = frame_.linear;
  Eigen::VectorXd rhs = d;
  return Vec(dense.completeOrthogonalDecomposition().solve(rhs));
}

bool Parallelotope::contains(const Vec& x, double slack) const {
  const Vec u = local_coords(x);
  if (u.cwiseAbs().maxCoeff() > 1.0 + slack) return false;
  if (degenerate_) return (frame_.linear * u + frame_.translation - x).norm() <= slack;
  return true;
}

std::vector<Vec> Parallelotope::vertices() const {
  const int n = dim();
  std::vector<Vec> out;
  out.reserve(std::size_t{1} << n);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    Vec s(n);
    for (int i = 0; i < n; ++i) s(i) = (mask >> i) & 1u ? 1.0 : -1.0;
    out.push_back(apply(frame_, s));
  }
  return out;
}

std::optional<Parallelotope> Parallelotope::shrunk(double delta) const {
  if (delta == 0.0) return *this;
  AffineMap f = frame_;
  for (int i = 0; i < dim(); ++i) {
    const double len = f.linear.col(i).norm();
    if (len <= delta) return std::nullopt;
    f.linear.col(i) *= 1.0 - delta / len;
  }
  return Parallelotope(f);
}

Parallelotope Parallelotope::mapped(const AffineMap& map) const {
  return Parallelotope(compose(map, frame_));
}

RegionUnion RegionUnion::mapped(const AffineMap& map) const {
  std::vector<Parallelotope> out;
  out.reserve(pieces_.size());
  for (const auto& p : pieces_) out.push_back(p.mapped(map));
  return RegionUnion(std::move(out));
}

RegionUnion RegionUnion::merged(const RegionUnion& other) const {
  std::vector<Parallelotope> out = pieces_;
  out.insert(out.end(), other.pieces_.begin(), other.pieces_.end());
  return RegionUnion(std::move(out));
}

std::pair<Vec, Vec> RegionUnion::bounding_box() const {
  if (pieces_.empty()) throw std::invalid_argument("bounding_box: empty region");
  const int n = dim();
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  for (const auto& p : pieces_) {
    // Half-extent along axis i is the l1 norm of row i of the frame.
    const Vec ext = p.frame().linear.cwiseAbs().rowwise().sum();
    lo = lo.cwiseMin(p.center() - ext);
    hi = hi.cwiseMax(p.center() + ext);
  }
  return {lo, hi};
}

bool contains_point(const RegionUnion& region, const Vec& x, double slack) {
  for (const auto& p : region.pieces()) {
    if (p.contains(x, slack)) return true;
  }
  return false;
}

double diameter(const RegionUnion& region) {
  if (region.empty()) throw std::invalid_argument("diameter: empty region");
  std::vector<Vec> verts;
  for (const auto& p : region.pieces()) {
    auto v = p.vertices();
    verts.insert(verts.end(), v.begin(), v.end());
  }
  double best = 0.0;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    for (std::size_t j = i + 1; j < verts.size(); ++j) {
      best = std::max(best, (verts[i] - verts[j]).norm());
    }
  }
  return best;
}

namespace {

std::vector<Parallelotope> shrink_all(const RegionUnion& pieces, double margin) {
  std::vector<Parallelotope> out;
  for (const auto& p : pieces.pieces()) {
    if (auto s = p.shrunk(margin)) out.push_back(*s);
  }
  return out;
}

// Index of the axis with the largest physical extent.
int longest_axis(const Cell& c, const Parallelotope& target) {
  int best = 0;
  double best_len = -1.0;
  for (int i = 0; i < target.dim(); ++i) {
    const double len = (c.upper(i) - c.lower(i)) * target.frame().linear.col(i).norm();
    if (len > best_len) {
      best_len = len;
      best = i;
    }
  }
  return best;
}

}  // namespace

CoverCertificate certify_covered(const Parallelotope& target, const RegionUnion& pieces,
                                 double margin, int max_depth, Exec exec) {
  if (margin < 0.0) throw std::invalid_argument("certify_covered: margin must be >= 0");
  if (max_depth < 0 || max_depth > kMaxCertifyDepth) {
    throw std::invalid_argument("certify_covered: max_depth must be in [0, 40]");
  }
  const int n = target.dim();
  CoverCertificate cert;
  cert.margin = margin;
  const std::vector<Parallelotope> shrunk = shrink_all(pieces, margin);

  std::vector<Cell> level{Cell{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)}};
  for (int depth = 0; !level.empty(); ++depth) {
    cert.max_depth_used = depth;
    cert.cells_examined += static_cast<long>(level.size());
    const auto status = classify_cells(level, target, shrunk, exec);

    std::vector<Cell> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      if (status[i] == CellStatus::accepted) continue;
      if (status[i] == CellStatus::uncovered || depth == max_depth) {
        cert.witness_cell = level[i];
        return cert;
      }
      const int axis = longest_axis(level[i], target);
      const double mid = 0.5 * (level[i].lower(axis) + level[i].upper(axis));
      Cell a = level[i], b = level[i];
      a.upper(axis) = mid;
      b.lower(axis) = mid;
      next.push_back(std::move(a));
      next.push_back(std::move(b));
    }
    level = std::move(next);
  }
  cert.covered = true;
  return cert;
}

CoverCertificate certify_region_covered(const RegionUnion& target, const RegionUnion& pieces,
                                        double margin, int max_depth, Exec exec) {
  CoverCertificate total;
  total.margin = margin;
  total.covered = true;
  for (const auto& p : target.pieces()) {
    CoverCertificate c = certify_covered(p, pieces, margin, max_depth, exec);
    total.max_depth_used = std::max(total.max_depth_used, c.max_depth_used);
    total.cells_examined += c.cells_examined;
    if (!c.covered) {
      total.covered = false;
      total.witness_cell = c.witness_cell;
      return total;
    }
  }
  return total;
}

double covering_slack(const Parallelotope& target, const RegionUnion& pieces, int max_depth,
                      double rel_tol) {
  if (!certify_covered(target, pieces, 0.0, max_depth).covered) return 0.0;
  double hi = 0.0;
  for (const auto& p : pieces.pieces()) {
    for (int i = 0; i < p.dim(); ++i) hi = std::max(hi, p.frame().linear.col(i).norm());
  }
  double lo = 0.0;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (certify_covered(target, pieces, mid, max_depth).covered) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

RegionA build_region_A(const AffineMap& e0, const AffineMap& e1, const Parallelotope& b, int k,
                       double shrink, double margin, int max_depth) {
  if (k < 1) throw std::invalid_argument("build_region_A: k must be >= 1");
  if (shrink < 0.0) throw std::invalid_argument("build_region_A: shrink must be >= 0");
  RegionA out;
  out.shrink = shrink;
  const AffineMap* maps[2] = {&e0, &e1};
  Parallelotope last[2];
  for (int i = 0; i < 2; ++i) {
    Parallelotope cur = b;
    for (int j = 0; j < k; ++j) {
      out.region.add(cur);
      const Parallelotope image = cur.mapped(*maps[i]);
      auto nxt = image.shrunk(shrink);
      if (!nxt) {
        throw std::domain_error("build_region_A: piece B_" + std::to_string(i) + "^(" +
                                std::to_string(j + 1) +
                                ") vanished, so the final covering of B cannot hold; "
                                "use a smaller shrink");
      }
      out.steps.push_back(
          {i, j, certify_covered(*nxt, RegionUnion({image}), 0.5 * shrink, max_depth)});
      cur = *nxt;
    }
    last[i] = cur;
  }
  out.final_cover = certify_covered(b, RegionUnion({last[0], last[1]}), margin, max_depth);
  if (!out.final_cover.covered) {
    throw std::domain_error(
        "build_region_A: final covering of B by B_0^(k) u B_1^(k) failed at margin " +
        std::to_string(margin) + "; use a smaller shrink or a larger covering margin");
  }
  return out;
}

RegionUnion scaled_about(const RegionUnion& region, const Vec& center, double factor) {
  AffineMap s{factor * Mat::Identity(center.size(), center.size()), (1.0 - factor) * center};
  return region.mapped(s);
}

}  // namespace massive
