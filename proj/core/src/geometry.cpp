#include "iab/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <string>

#include "iab/errors.hpp"

namespace iab {

namespace {

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// p is collinear with s; is it inside the bounding box of s?
bool within_box(const Segment& s, Point p) {
  return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
         std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

Segment centered_segment(Point mid, double length, double orientation) {
  const Point half{0.5 * length * std::cos(orientation), 0.5 * length * std::sin(orientation)};
  return {mid - half, mid + half};
}

void require_distinct(Point a, Point b) {
  if (a == b) throw DegenerateSegmentError("link endpoints coincide");
}

}  // namespace

bool segments_intersect(const Segment& s, const Segment& t) {
  const int d1 = sign(cross(t.a, t.b, s.a));
  const int d2 = sign(cross(t.a, t.b, s.b));
  const int d3 = sign(cross(s.a, s.b, t.a));
  const int d4 = sign(cross(s.a, s.b, t.b));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && within_box(t, s.a)) return true;
  if (d2 == 0 && within_box(t, s.b)) return true;
  if (d3 == 0 && within_box(s, t.a)) return true;
  if (d4 == 0 && within_box(s, t.b)) return true;
  return false;
}

Region Region::from_area_km2(double area_km2, Point center) {
  if (!(area_km2 > 0.0)) throw ParameterError("region area must be positive");
  return {center, std::sqrt(area_km2 * 1e6 / M_PI)};
}

bool Region::contains(Point p) const { return distance(p, center) <= radius; }

Point Region::clamp(Point p) const {
  const double r = distance(p, center);
  if (r <= radius) return p;
  // Pull slightly inside so rounding cannot leave the point outside.
  const double s = radius * (1.0 - 1e-12) / r;
  return center + s * (p - center);
}

void PointProcessParams::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"lambda_mbs", mbs},         {"lambda_sbs", sbs},     {"lambda_ue", ue},
      {"lambda_blockers", blockers}, {"lambda_trees", trees}, {"lambda_temporal", temporal_blockers}};
  for (const auto& [name, v] : fields) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be >= 0");
  }
}

Segment Wall::segment() const { return centered_segment(midpoint, length, orientation); }
Segment TreeLine::segment() const { return centered_segment(midpoint, length, orientation); }

std::vector<Point> sample_ppp(const Region& region, double density_km2, Rng& rng) {
  if (!(density_km2 >= 0.0) || !std::isfinite(density_km2)) {
    throw ParameterError("point process density must be >= 0");
  }
  if (!(region.radius > 0.0)) throw ParameterError("region radius must be positive");
  const double mean = region.expected_count(density_km2);
  if (mean == 0.0) return {};
  std::poisson_distribution<int> count_dist(mean);
  const int n = count_dist(rng);
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double r = region.radius * std::sqrt(uniform01(rng));
    const double th = 2.0 * M_PI * uniform01(rng);
    pts.push_back({region.center.x + r * std::cos(th), region.center.y + r * std::sin(th)});
  }
  return pts;
}

std::vector<Wall> sample_blockers(const Region& region, double density_km2, double wall_length,
                                  Rng& rng) {
  if (!(wall_length > 0.0)) throw ParameterError("wall length must be positive");
  const auto germs = sample_ppp(region, density_km2, rng);
  std::vector<Wall> walls;
  walls.reserve(germs.size());
  for (Point g : germs) walls.push_back({g, wall_length, M_PI * uniform01(rng)});
  return walls;
}

std::vector<TreeLine> sample_trees(const Region& region, double density_km2,
                                   const TreeParams& params, Rng& rng) {
  if (!(params.length > 0.0)) throw ParameterError("tree line length must be positive");
  if (!(params.depth > 0.0)) throw ParameterError("tree depth must be positive");
  if (!(params.in_leaf_fraction >= 0.0 && params.in_leaf_fraction <= 1.0)) {
    throw ParameterError("in-leaf fraction must be in [0, 1]");
  }
  const auto germs = sample_ppp(region, density_km2, rng);
  std::vector<TreeLine> trees;
  trees.reserve(germs.size());
  for (Point g : germs) {
    const double orientation = M_PI * uniform01(rng);
    const bool in_leaf = uniform01(rng) < params.in_leaf_fraction;
    trees.push_back({g, params.length, orientation, in_leaf, params.depth});
  }
  return trees;
}

NetworkInstance sample_instance(const Region& region, const PointProcessParams& densities,
                                double wall_length, const TreeParams& trees, Rng& rng) {
  densities.validate();
  NetworkInstance inst;
  inst.region = region;
  inst.mbs = sample_ppp(region, densities.mbs, rng);
  inst.sbs = sample_ppp(region, densities.sbs, rng);
  inst.ues = sample_ppp(region, densities.ue, rng);
  inst.walls = sample_blockers(region, densities.blockers, wall_length, rng);
  inst.trees = sample_trees(region, densities.trees, trees, rng);
  return inst;
}

bool is_los(Point a, Point b, std::span<const Wall> walls) {
  require_distinct(a, b);
  const Segment link{a, b};
  return std::none_of(walls.begin(), walls.end(),
                      [&](const Wall& w) { return segments_intersect(link, w.segment()); });
}

std::vector<TreeLine> tree_crossings(Point a, Point b, std::span<const TreeLine> trees) {
  require_distinct(a, b);
  const Segment link{a, b};
  std::vector<TreeLine> out;
  for (const auto& t : trees) {
    if (segments_intersect(link, t.segment())) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SegmentIndex

SegmentIndex::SegmentIndex(const Region& region, std::vector<Segment> segments, double cell_size)
    : segments_(std::move(segments)) {
  double longest = 0.0;
  for (const auto& s : segments_) longest = std::max(longest, distance(s.a, s.b));
  cell_ = cell_size > 0.0 ? cell_size : std::max(20.0, 2.0 * longest);
  const double margin = longest + cell_;
  origin_x_ = region.center.x - region.radius - margin;
  origin_y_ = region.center.y - region.radius - margin;
  const double span = 2.0 * (region.radius + margin);
  nx_ = std::max(1, static_cast<int>(std::ceil(span / cell_)));
  ny_ = nx_;

  // Counting sort of segments into the cells covered by their (slightly
  // inflated) bounding boxes.
  constexpr double kPad = 1e-6;
  auto cell_range = [&](const Segment& s) {
    auto cx = [&](double x) {
      return std::clamp(static_cast<int>(std::floor((x - origin_x_) / cell_)), 0, nx_ - 1);
    };
    auto cy = [&](double y) {
      return std::clamp(static_cast<int>(std::floor((y - origin_y_) / cell_)), 0, ny_ - 1);
    };
    return std::array<int, 4>{cx(std::min(s.a.x, s.b.x) - kPad), cx(std::max(s.a.x, s.b.x) + kPad),
                              cy(std::min(s.a.y, s.b.y) - kPad), cy(std::max(s.a.y, s.b.y) + kPad)};
  };
  std::vector<std::uint32_t> counts(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (const auto& s : segments_) {
    const auto r = cell_range(s);
    for (int j = r[2]; j <= r[3]; ++j)
      for (int i = r[0]; i <= r[1]; ++i) ++counts[static_cast<std::size_t>(j) * nx_ + i + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  cell_start_ = counts;
  cell_items_.resize(counts.back());
  for (std::uint32_t k = 0; k < segments_.size(); ++k) {
    const auto r = cell_range(segments_[k]);
    for (int j = r[2]; j <= r[3]; ++j)
      for (int i = r[0]; i <= r[1]; ++i) cell_items_[counts[static_cast<std::size_t>(j) * nx_ + i]++] = k;
  }
}

// Grid traversal (Amanatides-Woo) over every cell the segment a-b passes
// through; visit(cell) returns true to stop early.
template <typename Visit>
void SegmentIndex::walk(Point a, Point b, Visit&& visit) const {
  if (segments_.empty()) return;
  const double ax = (a.x - origin_x_) / cell_, ay = (a.y - origin_y_) / cell_;
  const double bx = (b.x - origin_x_) / cell_, by = (b.y - origin_y_) / cell_;
  int i = std::clamp(static_cast<int>(std::floor(ax)), 0, nx_ - 1);
  int j = std::clamp(static_cast<int>(std::floor(ay)), 0, ny_ - 1);
  const int iend = std::clamp(static_cast<int>(std::floor(bx)), 0, nx_ - 1);
  const int jend = std::clamp(static_cast<int>(std::floor(by)), 0, ny_ - 1);
  const double dx = bx - ax, dy = by - ay;
  const int step_i = dx > 0 ? 1 : -1;
  const int step_j = dy > 0 ? 1 : -1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double tdx = dx != 0.0 ? std::abs(1.0 / dx) : kInf;
  const double tdy = dy != 0.0 ? std::abs(1.0 / dy) : kInf;
  double tx = dx != 0.0 ? ((dx > 0 ? (i + 1 - ax) : (ax - i)) * tdx) : kInf;
  double ty = dy != 0.0 ? ((dy > 0 ? (j + 1 - ay) : (ay - j)) * tdy) : kInf;
  const int max_steps = std::abs(iend - i) + std::abs(jend - j) + 1;
  for (int n = 0; n < max_steps; ++n) {
    if (visit(static_cast<std::size_t>(j) * nx_ + i)) return;
    if (i == iend && j == jend) return;
    if (tx < ty) {
      i += step_i;
      tx += tdx;
    } else {
      j += step_j;
      ty += tdy;
    }
    if (i < 0 || i >= nx_ || j < 0 || j >= ny_) return;
  }
}

bool SegmentIndex::any_hit(Point a, Point b) const {
  require_distinct(a, b);
  const Segment link{a, b};
  bool hit = false;
  walk(a, b, [&](std::size_t cell) {
    for (auto k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) {
      if (segments_intersect(link, segments_[cell_items_[k]])) {
        hit = true;
        return true;
      }
    }
    return false;
  });
  return hit;
}

std::vector<std::uint32_t> SegmentIndex::hits(Point a, Point b) const {
  require_distinct(a, b);
  const Segment link{a, b};
  std::vector<std::uint32_t> out;
  walk(a, b, [&](std::size_t cell) {
    for (auto k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) {
      const auto id = cell_items_[k];
      if (segments_intersect(link, segments_[id])) out.push_back(id);
    }
    return false;
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SegmentIndex make_wall_index(const Region& region, std::span<const Wall> walls) {
  std::vector<Segment> segs;
  segs.reserve(walls.size());
  for (const auto& w : walls) segs.push_back(w.segment());
  return SegmentIndex(region, std::move(segs));
}

SegmentIndex make_tree_index(const Region& region, std::span<const TreeLine> trees) {
  std::vector<Segment> segs;
  segs.reserve(trees.size());
  for (const auto& t : trees) segs.push_back(t.segment());
  return SegmentIndex(region, std::move(segs));
}

// ---------------------------------------------------------------------------
// ForbiddenZones

ForbiddenZones ForbiddenZones::random(const Region& region, double fraction, double cell_size,
                                      Rng& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ParameterError("forbidden fraction must be in [0, 1]");
  if (!(cell_size > 0.0)) throw ParameterError("forbidden-zone cell size must be positive");
  ForbiddenZones z;
  z.cell_ = cell_size;
  z.origin_x_ = region.center.x - region.radius;
  z.origin_y_ = region.center.y - region.radius;
  z.nx_ = std::max(1, static_cast<int>(std::ceil(2.0 * region.radius / cell_size)));
  z.blocked_.assign(static_cast<std::size_t>(z.nx_) * z.nx_, 0);
  std::vector<std::size_t> disk_cells;
  for (int j = 0; j < z.nx_; ++j) {
    for (int i = 0; i < z.nx_; ++i) {
      const Point c{z.origin_x_ + (i + 0.5) * cell_size, z.origin_y_ + (j + 0.5) * cell_size};
      if (region.contains(c)) disk_cells.push_back(static_cast<std::size_t>(j) * z.nx_ + i);
    }
  }
  z.disk_cells_ = disk_cells.size();
  std::shuffle(disk_cells.begin(), disk_cells.end(), rng);
  const auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(disk_cells.size())));
  for (std::size_t k = 0; k < n; ++k) z.blocked_[disk_cells[k]] = 1;
  z.blocked_cells_ = n;
  return z;
}

bool ForbiddenZones::forbidden(Point p) const {
  if (blocked_.empty()) return false;
  const int i = static_cast<int>(std::floor((p.x - origin_x_) / cell_));
  const int j = static_cast<int>(std::floor((p.y - origin_y_) / cell_));
  if (i < 0 || j < 0 || i >= nx_ || j >= nx_) return false;
  return blocked_[static_cast<std::size_t>(j) * nx_ + i] != 0;
}

double ForbiddenZones::blocked_fraction() const {
  return disk_cells_ == 0 ? 0.0 : static_cast<double>(blocked_cells_) / static_cast<double>(disk_cells_);
}

bool ForbiddenZones::has_feasible_area() const { return blocked_.empty() || blocked_cells_ < disk_cells_; }

Point ForbiddenZones::sample_feasible(const Region& region, Rng& rng) const {
  if (!has_feasible_area()) throw ParameterError("no feasible placement area left");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double r = region.radius * std::sqrt(uniform01(rng));
    const double th = 2.0 * M_PI * uniform01(rng);
    const Point p{region.center.x + r * std::cos(th), region.center.y + r * std::sin(th)};
    if (!forbidden(p)) return p;
  }
  throw ParameterError("feasible placement area too small to sample");
}

}  // namespace iab
