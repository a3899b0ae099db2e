#include "bext/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bext/error.hpp"
#include "bext/generators.hpp"
#include "bext/hull.hpp"

namespace bext {

namespace {

void require_planar(const DomainModel& domain, const std::string& name) {
  if (domain.space().dim() != 2)
    throw Error("no-coordinates", "map `" + name + "` needs planar coordinates");
}

}  // namespace

double oscillation_frequency() { return 2.0 * std::numbers::pi / std::numbers::ln2; }

const std::vector<std::string>& mapping_names() {
  static const std::vector<std::string> names{"constant", "identity", "square-z", "angle", "oscillate", "radial-log"};
  return names;
}

MappingModel make_mapping(const DomainModel& domain, const std::string& name) {
  const auto& space = domain.space();
  const std::size_t n = space.size();
  const double q = domain.q();
  MappingModel m;
  m.name = name;
  m.alpha.assign(domain.interior().size(), 0.0);
  auto interior_alpha = [&](auto&& fn) {
    for (std::size_t i = 0; i < domain.interior().size(); ++i) m.alpha[i] = fn(domain.interior()[i], i);
  };

  if (name == "constant") {
    m.formula = "f(z) = 0";
    m.image = {std::vector<double>(n, 0.0), 1};
    m.alpha_formula = "alpha = 0";
  } else if (name == "identity") {
    if (!space.has_coordinates()) throw Error("no-coordinates", "map `identity` needs coordinates");
    m.formula = "f(z) = z";
    m.image = {space.coordinates(), space.dim()};
    m.alpha_formula = "alpha = 1";
    interior_alpha([](Id, std::size_t) { return 1.0; });
  } else if (name == "square-z") {
    require_planar(domain, name);
    m.formula = "f(z) = z^2";
    m.image.dim = 2;
    m.image.values.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = space.point(static_cast<Id>(i));
      m.image.values[2 * i] = p[0] * p[0] - p[1] * p[1];
      m.image.values[2 * i + 1] = 2.0 * p[0] * p[1];
    }
    m.alpha_formula = "alpha = |2z|^q";
    interior_alpha([&](Id x, std::size_t) {
      const auto p = space.point(x);
      return std::pow(2.0 * std::hypot(p[0], p[1]), q);
    });
  } else if (name == "angle") {
    require_planar(domain, name);
    m.formula = "f(z) = arg(z) / 2pi, arg in [0, 2pi)";
    m.image.dim = 1;
    m.image.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = space.point(static_cast<Id>(i));
      double th = std::atan2(p[1], p[0]);
      if (th < 0.0) th += 2.0 * std::numbers::pi;
      m.image.values[i] = th / (2.0 * std::numbers::pi);
    }
    m.alpha_formula = "alpha = (1 / (2pi |z|))^q";
    interior_alpha([&](Id x, std::size_t) {
      const auto p = space.point(x);
      const double r = std::max(std::hypot(p[0], p[1]), 0.5 * domain.epsilon());
      return std::pow(1.0 / (2.0 * std::numbers::pi * r), q);
    });
  } else if (name == "oscillate") {
    const double w = oscillation_frequency();
    m.formula = "f(z) = sin(w log(1/d(z))), w = 2pi/ln2";
    m.image = {std::vector<double>(n, 0.0), 1};
    m.defined_on_boundary = false;
    m.alpha_formula = "alpha = (w |cos(w log(1/d))| / d)^q";
    interior_alpha([&](Id x, std::size_t i) {
      const double d = domain.boundary_distances()[i];
      m.image.values[static_cast<std::size_t>(x)] = std::sin(w * std::log(1.0 / d));
      return std::pow(w * std::abs(std::cos(w * std::log(1.0 / d))) / d, q);
    });
  } else if (name == "radial-log") {
    require_planar(domain, name);
    const Id pid = nearest_boundary(domain, {1.0, 0.0});
    const auto pc = space.point(pid);
    const double px = pc[0], py = pc[1];
    m.formula = "f(z) = w (1 + log(1/|w|))^(1/2), w = z - p, p = boundary sample nearest (1,0)";
    m.image.dim = 2;
    m.image.values.assign(2 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = space.point(static_cast<Id>(i));
      const double wx = p[0] - px, wy = p[1] - py;
      const double r = std::hypot(wx, wy);
      if (r == 0.0) continue;
      const double g = std::sqrt(1.0 + std::log(1.0 / r));
      m.image.values[2 * i] = wx * g;
      m.image.values[2 * i + 1] = wy * g;
    }
    m.alpha_formula = "alpha = (1 + log(1/|w|))^(q/2)";
    interior_alpha([&](Id x, std::size_t) {
      const auto p = space.point(x);
      return std::pow(1.0 + std::log(1.0 / std::hypot(p[0] - px, p[1] - py)), 0.5 * q);
    });
  } else {
    throw Error("unknown-map", "unknown map `" + name + "`");
  }
  return m;
}

double image_diameter(const kernels::ImageTable& image, std::span<const Id> ids) {
  if (ids.size() < 2) return 0.0;
  if (image.dim == 1) {
    double lo = image.row(ids[0])[0], hi = lo;
    for (Id i : ids) {
      lo = std::min(lo, image.row(i)[0]);
      hi = std::max(hi, image.row(i)[0]);
    }
    return hi - lo;
  }
  std::vector<Id> pts(ids.begin(), ids.end());
  if (image.dim == 2 && pts.size() > 32) {
    pts = planar_hull(std::move(pts), [&](Id i) { return image.row(i); });
  }
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, image.distance(pts[i], pts[j]));
  return best;
}

}  // namespace bext
