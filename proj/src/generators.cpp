#include "bext/generators.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "bext/error.hpp"
#include "bext/kernels.hpp"

namespace bext {

namespace {

using Points = std::vector<std::array<double, 2>>;
using Inside = std::function<bool(double, double)>;

long grid_count(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 0.5) throw Error("bad-parameter", "epsilon must lie in (0, 1/2]");
  const long n = std::lround(1.0 / epsilon);
  if (std::abs(static_cast<double>(n) * epsilon - 1.0) > 1e-9)
    throw Error("bad-parameter", "1/epsilon must be an integer");
  return n;
}

double spacing_or(double spacing, double epsilon) { return spacing > 0.0 ? spacing : epsilon; }

// Off-grid interior sample within the link radius of boundary point b, at
// least epsilon/2 from every boundary sample; the candidate with the largest
// clearance wins. Returns false when none exists (acute corners).
bool link_point(const std::array<double, 2>& b, const GridIndex& bindex, double epsilon, const Inside& inside,
                std::array<double, 2>& out) {
  constexpr int kAngles = 64;
  double best = -1.0;
  for (double t : {0.75, 1.0, 1.25}) {
    for (int k = 0; k < kAngles; ++k) {
      const double a = 2.0 * std::numbers::pi * k / kAngles;
      const std::array<double, 2> p{b[0] + t * epsilon * std::cos(a), b[1] + t * epsilon * std::sin(a)};
      if (!inside(p[0], p[1])) continue;
      double clear = std::numeric_limits<double>::infinity();
      bindex.for_each_within_point(p, 2.0 * epsilon, [&](Id, double d) { clear = std::min(clear, d); });
      if (clear < 0.5 * epsilon || clear <= best) continue;
      best = clear;
      out = p;
    }
  }
  return best >= 0.0;
}

// Lays out interior samples (ids first) then boundary samples, dropping
// interior candidates closer than epsilon/2 to the boundary samples. Boundary
// samples left without an interior sample within the link radius get an
// off-grid one when the geometry allows it.
DomainModel assemble(const Points& candidates, const Points& boundary, std::array<double, 2> center,
                     double epsilon, double spacing, const std::string& name, const Inside& inside) {
  Points interior = candidates;
  std::vector<double> bcoords;
  bcoords.reserve(boundary.size() * 2);
  for (const auto& p : boundary) bcoords.insert(bcoords.end(), p.begin(), p.end());
  const auto bspace = PointCloudSpace::from_coordinates(bcoords, 2);
  std::vector<Id> bids(boundary.size());
  for (std::size_t i = 0; i < bids.size(); ++i) bids[i] = static_cast<Id>(i);
  GridIndex bindex(bspace, bids, std::max(epsilon, spacing));

  std::vector<char> keep(interior.size(), 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(interior.size()); ++i) {
    const auto& p = interior[static_cast<std::size_t>(i)];
    bool close = false;
    bindex.for_each_within_point(p, 0.5 * epsilon, [&](Id, double) { close = true; });
    if (close) keep[static_cast<std::size_t>(i)] = 0;
  }
  {
    std::vector<double> kept;
    for (std::size_t i = 0; i < interior.size(); ++i)
      if (keep[i]) kept.insert(kept.end(), interior[i].begin(), interior[i].end());
    const auto ispace = PointCloudSpace::from_coordinates(kept, 2);
    std::vector<Id> iids(kept.size() / 2);
    for (std::size_t i = 0; i < iids.size(); ++i) iids[i] = static_cast<Id>(i);
    GridIndex iindex(ispace, iids, epsilon);
    const double link = 1.5 * epsilon;
    for (const auto& b : boundary) {
      bool linked = false;
      iindex.for_each_within_point(b, link, [&](Id, double) { linked = true; });
      std::array<double, 2> p;
      if (!linked && link_point(b, bindex, epsilon, inside, p)) {
        interior.push_back(p);
        keep.push_back(1);
      }
    }
  }

  std::vector<double> coords;
  std::vector<Id> inner, outer;
  Id center_id = kNoId;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < interior.size(); ++i) {
    if (!keep[i]) continue;
    const Id id = static_cast<Id>(coords.size() / 2);
    coords.insert(coords.end(), interior[i].begin(), interior[i].end());
    inner.push_back(id);
    const double d = std::hypot(interior[i][0] - center[0], interior[i][1] - center[1]);
    if (d < best) {
      best = d;
      center_id = id;
    }
  }
  for (const auto& p : boundary) {
    outer.push_back(static_cast<Id>(coords.size() / 2));
    coords.insert(coords.end(), p.begin(), p.end());
  }
  auto space = std::make_shared<const PointCloudSpace>(PointCloudSpace::from_coordinates(std::move(coords), 2));
  DomainModel::Options opts;
  opts.boundary_spacing = spacing;
  opts.boundary_dim = 1.0;
  opts.name = name;
  return DomainModel(std::move(space), std::move(inner), std::move(outer), center_id, epsilon, 2.0, opts);
}

void add_circle(Points& out, double radius, double spacing) {
  const auto m = static_cast<long>(std::ceil(2.0 * std::numbers::pi * radius / spacing));
  for (long k = 0; k < m; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    out.push_back({radius * std::cos(a), radius * std::sin(a)});
  }
}

// Samples the segment from a to b (a included, b excluded) at roughly `spacing`.
void add_segment(Points& out, std::array<double, 2> a, std::array<double, 2> b, double spacing) {
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  const auto m = std::max<long>(1, static_cast<long>(std::ceil(len / spacing - 1e-9)));
  for (long k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(m);
    out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
  }
}

Points disc_grid(long n, double r_lo, double r_hi, double epsilon) {
  Points out;
  for (long j = -n; j <= n; ++j)
    for (long i = -n; i <= n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n);
      const double y = static_cast<double>(j) / static_cast<double>(n);
      const double r = std::hypot(x, y);
      if (r <= r_hi - 0.5 * epsilon && r >= r_lo + 0.5 * epsilon) out.push_back({x, y});
    }
  return out;
}

DomainModel rectangle_named(double width, double height, double epsilon, double boundary_spacing,
                            const std::string& name) {
  const long n = grid_count(epsilon);
  const double spacing = spacing_or(boundary_spacing, epsilon);
  if (!(width > 0.0) || !(height > 0.0)) throw Error("bad-parameter", "rectangle sides must be positive");
  const long nx = std::lround(width * static_cast<double>(n));
  const long ny = std::lround(height * static_cast<double>(n));
  Points interior, boundary;
  for (long j = 1; j < ny; ++j)
    for (long i = 1; i < nx; ++i)
      interior.push_back({static_cast<double>(i) / static_cast<double>(n), static_cast<double>(j) / static_cast<double>(n)});
  add_segment(boundary, {0.0, 0.0}, {width, 0.0}, spacing);
  add_segment(boundary, {width, 0.0}, {width, height}, spacing);
  add_segment(boundary, {width, height}, {0.0, height}, spacing);
  add_segment(boundary, {0.0, height}, {0.0, 0.0}, spacing);
  auto inside = [=](double x, double y) { return x > 0.0 && x < width && y > 0.0 && y < height; };
  return assemble(interior, boundary, {0.5 * width, 0.5 * height}, epsilon, spacing, name, inside);
}

}  // namespace

DomainModel make_rectangle(double width, double height, double epsilon, double boundary_spacing) {
  return rectangle_named(width, height, epsilon, boundary_spacing, "rectangle");
}

DomainModel make_square(double epsilon, double boundary_spacing) {
  return rectangle_named(1.0, 1.0, epsilon, boundary_spacing, "square");
}

DomainModel make_disc(double epsilon, double boundary_spacing) {
  const long n = grid_count(epsilon);
  const double spacing = spacing_or(boundary_spacing, epsilon);
  Points boundary;
  add_circle(boundary, 1.0, spacing);
  auto inside = [](double x, double y) { return std::hypot(x, y) < 1.0; };
  return assemble(disc_grid(n, -1.0, 1.0, epsilon), boundary, {0.0, 0.0}, epsilon, spacing, "disc", inside);
}

DomainModel make_slit_disc(double epsilon, double boundary_spacing) {
  const long n = grid_count(epsilon);
  const double spacing = spacing_or(boundary_spacing, epsilon);
  Points interior;
  for (const auto& p : disc_grid(n, -1.0, 1.0, epsilon))
    if (!(p[1] == 0.0 && p[0] >= 0.0)) interior.push_back(p);
  Points boundary;
  add_circle(boundary, 1.0, spacing);
  // The circle already carries (1, 0).
  add_segment(boundary, {0.0, 0.0}, {1.0, 0.0}, spacing);
  auto inside = [](double x, double y) { return std::hypot(x, y) < 1.0 && !(y == 0.0 && x >= 0.0); };
  return assemble(interior, boundary, {-0.5, 0.0}, epsilon, spacing, "slit-disc", inside);
}

DomainModel make_cusp(double epsilon, double s, double boundary_spacing) {
  const long n = grid_count(epsilon);
  const double spacing = spacing_or(boundary_spacing, epsilon);
  if (!(s >= 1.0)) throw Error("bad-parameter", "cusp exponent must be >= 1");
  const double xc = std::pow(2.0 * epsilon, 1.0 / s);
  Points boundary;
  add_segment(boundary, {xc, 0.0}, {xc, std::pow(xc, s)}, spacing);
  // Upper and lower arcs, stepped by arc length.
  Points upper;
  for (double x = xc; x < 1.0;) {
    upper.push_back({x, std::pow(x, s)});
    const double slope = s * std::pow(x, s - 1.0);
    x += spacing / std::sqrt(1.0 + slope * slope);
  }
  for (const auto& p : upper) boundary.push_back(p);
  add_segment(boundary, {1.0, 1.0}, {1.0, -1.0}, spacing);
  for (auto it = upper.rbegin(); it != upper.rend(); ++it) boundary.push_back({(*it)[0], -(*it)[1]});
  boundary.erase(boundary.end() - 1);  // (xc, -xc^s) is re-added by the closing edge
  add_segment(boundary, {xc, -std::pow(xc, s)}, {xc, 0.0}, spacing);

  Points interior;
  for (long i = 1; i < n; ++i)
    for (long j = -n; j <= n; ++j) {
      const double x = static_cast<double>(i) / static_cast<double>(n);
      const double y = static_cast<double>(j) / static_cast<double>(n);
      if (x > xc && std::abs(y) < std::pow(x, s)) interior.push_back({x, y});
    }
  auto inside = [=](double x, double y) { return x > xc && x < 1.0 && std::abs(y) < std::pow(x, s); };
  return assemble(interior, boundary, {0.75, 0.0}, epsilon, spacing, "cusp", inside);
}

DomainModel make_annulus(double epsilon, double boundary_spacing) {
  const long n = grid_count(epsilon);
  const double spacing = spacing_or(boundary_spacing, epsilon);
  Points boundary;
  add_circle(boundary, 1.0, spacing);
  add_circle(boundary, 0.5, spacing);
  auto inside = [](double x, double y) {
    const double r = std::hypot(x, y);
    return r > 0.5 && r < 1.0;
  };
  return assemble(disc_grid(n, 0.5, 1.0, epsilon), boundary, {0.75, 0.0}, epsilon, spacing, "annulus", inside);
}

DomainModel make_segment(double epsilon) {
  const long n = grid_count(epsilon);
  std::vector<double> coords;
  std::vector<Id> inner;
  for (long i = 1; i < n; ++i) {
    inner.push_back(static_cast<Id>(coords.size()));
    coords.push_back(static_cast<double>(i) / static_cast<double>(n));
  }
  const Id b0 = static_cast<Id>(coords.size());
  coords.push_back(0.0);
  coords.push_back(1.0);
  auto space = std::make_shared<const PointCloudSpace>(PointCloudSpace::from_coordinates(std::move(coords), 1));
  DomainModel::Options opts{epsilon, 0.0, "segment"};
  return DomainModel(std::move(space), std::move(inner), {b0, b0 + 1}, static_cast<Id>((n - 1) / 2), epsilon, 1.0, opts);
}

const std::vector<std::string>& generator_names() {
  static const std::vector<std::string> names{"square", "disc", "slit-disc", "cusp", "annulus"};
  return names;
}

DomainModel generate_domain(const GeneratorSpec& spec) {
  if (spec.name == "square") return make_square(spec.epsilon, spec.boundary_spacing);
  if (spec.name == "disc") return make_disc(spec.epsilon, spec.boundary_spacing);
  if (spec.name == "slit-disc") return make_slit_disc(spec.epsilon, spec.boundary_spacing);
  if (spec.name == "cusp") return make_cusp(spec.epsilon, spec.s, spec.boundary_spacing);
  if (spec.name == "annulus") return make_annulus(spec.epsilon, spec.boundary_spacing);
  throw Error("unknown-generator", "unknown domain generator `" + spec.name + "`");
}

JohnHint john_hint(const GeneratorSpec& spec) {
  if (spec.name == "cusp") return {2.0, 1.0 / spec.s, 2.0};
  if (spec.name == "slit-disc") return {1.0, 1.0, 8.0};
  if (spec.name == "annulus") return {1.0, 1.0, 12.0};
  return {1.0, 1.0, 2.0};
}

Id nearest_boundary(const DomainModel& domain, std::vector<double> p) {
  Id best = kNoId;
  double bd = std::numeric_limits<double>::infinity();
  for (Id b : domain.boundary()) {
    const double d = domain.space().distance_to_point(b, p);
    if (d < bd) {
      bd = d;
      best = b;
    }
  }
  return best;
}

Id nearest_interior(const DomainModel& domain, std::vector<double> p) {
  Id best = kNoId;
  double bd = std::numeric_limits<double>::infinity();
  for (Id x : domain.interior()) {
    const double d = domain.space().distance_to_point(x, p);
    if (d < bd) {
      bd = d;
      best = x;
    }
  }
  return best;
}

}  // namespace bext
