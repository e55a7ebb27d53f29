#pragma once

#include <optional>
#include <vector>

#include "massive/affine_core.hpp"
#include "massive/execution.hpp"

namespace massive {

/// Image of the standard box [-1, 1]^n under `frame`. The columns of
/// frame.linear are the half-axis vectors, frame.translation the center.
class Parallelotope {
 public:
  Parallelotope() = default;
  explicit Parallelotope(AffineMap frame);

  /// Axis-aligned box with the given center and half-widths.
  static Parallelotope box(const Vec& center, const Vec& half_widths);

  int dim() const { return frame_.dim(); }
  const AffineMap& frame() const { return frame_; }
  const Vec& center() const { return frame_.translation; }

  /// Coordinates of x in the frame (least-squares for degenerate frames).
  Vec local_coords(const Vec& x) const;
  bool contains(const Vec& x, double slack = 1e-12) const;
  std::vector<Vec> vertices() const;

  /// Each half-axis shortened by delta toward the center; nullopt when an
  /// axis would vanish.
  std::optional<Parallelotope> shrunk(double delta) const;

  Parallelotope mapped(const AffineMap& map) const;

 private:
  AffineMap frame_;
  Mat inverse_;
  bool degenerate_ = false;
};

class RegionUnion {
 public:
  RegionUnion() = default;
  explicit RegionUnion(std::vector<Parallelotope> pieces) : pieces_(std::move(pieces)) {}

  const std::vector<Parallelotope>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }
  int dim() const { return pieces_.empty() ? 0 : pieces_.front().dim(); }

  void add(Parallelotope p) { pieces_.push_back(std::move(p)); }
  RegionUnion mapped(const AffineMap& map) const;
  RegionUnion merged(const RegionUnion& other) const;

  /// Axis-aligned bounding box as (lower, upper).
  std::pair<Vec, Vec> bounding_box() const;

 private:
  std::vector<Parallelotope> pieces_;
};

bool contains_point(const RegionUnion& region, const Vec& x, double slack = 1e-12);

/// Max vertex-pair distance. Throws std::invalid_argument on an empty region.
double diameter(const RegionUnion& region);

/// Axis-aligned box in parameter space [-1, 1]^n of a target parallelotope.
struct Cell {
  Vec lower;
  Vec upper;
};

struct CoverCertificate {
  bool covered = false;
  int max_depth_used = 0;
  /// Cell of the target (in target-frame parameter coordinates) that no
  /// shrunk piece contains. Present iff not covered.
  std::optional<Cell> witness_cell;
  double margin = 0.0;
  long cells_examined = 0;
};

inline constexpr int kMaxCertifyDepth = 40;

/// Proves target is inside the union of the pieces, each shrunk by `margin`.
/// Breadth-first longest-axis bisection of the target's parameter box; a cell
/// is accepted when all its corner images lie in one shrunk piece.
CoverCertificate certify_covered(const Parallelotope& target, const RegionUnion& pieces,
                                 double margin, int max_depth, Exec exec = Exec::parallel);

/// certify_covered applied to each target piece; covered iff all are.
CoverCertificate certify_region_covered(const RegionUnion& target, const RegionUnion& pieces,
                                        double margin, int max_depth,
                                        Exec exec = Exec::parallel);

/// Largest margin (to `rel_tol` relative) at which target stays certified.
double covering_slack(const Parallelotope& target, const RegionUnion& pieces, int max_depth,
                      double rel_tol = 1e-6);

struct StepCertificate {
  int branch = 0;
  int step = 0;
  CoverCertificate certificate;
};

struct RegionA {
  RegionUnion region;  // A_0 pieces then A_1 pieces, j = 0..k-1 each
  std::vector<StepCertificate> steps;
  CoverCertificate final_cover;  // B_0^(k) u B_1^(k) over B
  double shrink = 0.0;
};

/// Builds A = union of B_i^(j), B_i^(j+1) = shrink(E_i B_i^(j)).
/// Throws std::domain_error when the final covering of B fails.
RegionA build_region_A(const AffineMap& e0, const AffineMap& e1, const Parallelotope& b, int k,
                       double shrink, double margin = 1e-3, int max_depth = 24);

/// Scales every piece about `center` by `factor`.
RegionUnion scaled_about(const RegionUnion& region, const Vec& center, double factor);

}  // namespace massive
