#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "iab/random.hpp"

namespace iab {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Direction of b as seen from a, radians in (-pi, pi].
inline double bearing(Point from, Point to) { return std::atan2(to.y - from.y, to.x - from.x); }

struct Segment {
  Point a;
  Point b;
};

/// Closed-segment intersection test. Touching at an endpoint or collinear
/// overlap counts as an intersection.
bool segments_intersect(const Segment& s, const Segment& t);

/// Circular deployment area. Coordinates are meters, densities km^-2; the
/// conversion between the two lives here and nowhere else.
struct Region {
  Point center{};
  double radius = 0.0;

  static Region from_area_km2(double area_km2, Point center = {});

  double area_m2() const { return M_PI * radius * radius; }
  double area_km2() const { return area_m2() * 1e-6; }
  /// Expected number of points of a density-per-km^2 process on this disk.
  double expected_count(double density_km2) const { return density_km2 * area_km2(); }
  bool contains(Point p) const;
  /// Nearest point of the disk to p.
  Point clamp(Point p) const;
};

/// Node and obstacle densities, all in km^-2.
struct PointProcessParams {
  double mbs = 2.0;
  double sbs = 50.0;
  double ue = 500.0;
  double blockers = 500.0;
  double trees = 0.0;
  double temporal_blockers = 0.0;

  void validate() const;
};

/// Germ-grain blocker: a wall segment of fixed length around a PPP germ.
struct Wall {
  Point midpoint{};
  double length = 0.0;
  double orientation = 0.0;  ///< [0, pi)

  Segment segment() const;
};

struct TreeLine {
  Point midpoint{};
  double length = 0.0;
  double orientation = 0.0;
  bool in_leaf = false;
  double depth = 0.0;  ///< vegetation depth, m

  Segment segment() const;
};

struct NetworkInstance {
  Region region;
  std::vector<Point> mbs;
  std::vector<Point> sbs;
  std::vector<Point> ues;
  std::vector<Wall> walls;
  std::vector<TreeLine> trees;
  /// Blockers added after deployment planning; empty for a fresh draw.
  std::vector<Wall> temporal_walls;
};

struct TreeParams {
  double length = 15.0;
  double depth = 7.5;
  double in_leaf_fraction = 0.15;
};

/// Points of a finite homogeneous PPP: Poisson(lambda * area) count, each
/// point uniform on the disk (polar inverse CDF, r = R sqrt(u)).
std::vector<Point> sample_ppp(const Region& region, double density_km2, Rng& rng);

/// Germ-grain walls: PPP midpoints, fixed length, orientation uniform [0, pi).
std::vector<Wall> sample_blockers(const Region& region, double density_km2, double wall_length,
                                  Rng& rng);

std::vector<TreeLine> sample_trees(const Region& region, double density_km2,
                                   const TreeParams& params, Rng& rng);

/// Samples every layer of an instance from one stream, in a fixed order
/// (MBS, SBS, UE, walls, trees).
NetworkInstance sample_instance(const Region& region, const PointProcessParams& densities,
                                double wall_length, const TreeParams& trees, Rng& rng);

/// True iff segment a-b crosses no wall. Throws DegenerateSegmentError if a == b.
bool is_los(Point a, Point b, std::span<const Wall> walls);

/// Tree lines whose segment intersects a-b.
std::vector<TreeLine> tree_crossings(Point a, Point b, std::span<const TreeLine> trees);

/// Uniform-grid index over obstacle segments, answering the same questions as
/// is_los / tree_crossings without scanning every obstacle.
class SegmentIndex {
 public:
  SegmentIndex() = default;
  SegmentIndex(const Region& region, std::vector<Segment> segments, double cell_size = 0.0);

  /// True if any indexed segment intersects a-b.
  bool any_hit(Point a, Point b) const;
  /// Indices (into the construction vector) of all segments hit by a-b, ascending.
  std::vector<std::uint32_t> hits(Point a, Point b) const;

  std::size_t size() const { return segments_.size(); }

 private:
  template <typename Visit>
  void walk(Point a, Point b, Visit&& visit) const;

  std::vector<Segment> segments_;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  double cell_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> cell_items_;
};

SegmentIndex make_wall_index(const Region& region, std::span<const Wall> walls);
SegmentIndex make_tree_index(const Region& region, std::span<const TreeLine> trees);

/// Area mask of cells where placement is not allowed.
class ForbiddenZones {
 public:
  ForbiddenZones() = default;

  /// Blocks a random subset of grid cells covering `fraction` of the disk.
  static ForbiddenZones random(const Region& region, double fraction, double cell_size, Rng& rng);

  bool empty() const { return blocked_cells_ == 0; }
  bool forbidden(Point p) const;
  /// Fraction of in-disk cells that are blocked.
  double blocked_fraction() const;
  /// True if some part of the disk is still allowed.
  bool has_feasible_area() const;
  /// Uniform point on the disk outside every forbidden cell.
  Point sample_feasible(const Region& region, Rng& rng) const;

 private:
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  double cell_ = 1.0;
  int nx_ = 0;
  std::vector<std::uint8_t> blocked_;
  std::size_t blocked_cells_ = 0;
  std::size_t disk_cells_ = 0;
};

}  // namespace iab
