#include "bext/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bext::kernels {

double ImageTable::distance(Id a, Id b) const {
  const double* pa = values.data() + static_cast<std::size_t>(a) * dim;
  const double* pb = values.data() + static_cast<std::size_t>(b) * dim;
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double t = pa[d] - pb[d];
    s += t * t;
  }
  return std::sqrt(s);
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace {

template <class Dist>
double group_max(std::span<const Id> ids, std::size_t first, std::size_t last, Dist&& dist) {
  double best = 0.0;
  for (std::size_t i = first; i < last; ++i)
    for (std::size_t j = i + 1; j < last; ++j) best = std::max(best, dist(ids[i], ids[j]));
  return best;
}

}  // namespace

namespace serial {

std::vector<double> min_distances(const PointCloudSpace& space, std::span<const Id> queries,
                                  std::span<const Id> targets) {
  std::vector<double> out(queries.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (Id t : targets) out[i] = std::min(out[i], space.distance(queries[i], t));
  return out;
}

std::vector<std::size_t> ball_counts(const PointCloudSpace& space, std::span<const Id> centers,
                                     std::span<const Id> members, double radius) {
  std::vector<std::size_t> out(centers.size(), 0);
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (Id m : members)
      if (space.distance(centers[i], m) < radius) ++out[i];
  return out;
}

std::vector<std::size_t> cover_counts(const PointCloudSpace& space, std::span<const Id> queries,
                                      std::span<const Id> centers, std::span<const double> radii) {
  std::vector<std::size_t> out(queries.size(), 0);
  for (std::size_t i = 0; i < queries.size(); ++i)
    for (std::size_t c = 0; c < centers.size(); ++c)
      if (space.distance(queries[i], centers[c]) < radii[c]) ++out[i];
  return out;
}

std::vector<double> group_diameters(const PointCloudSpace& space, std::span<const std::size_t> offsets,
                                    std::span<const Id> ids) {
  std::vector<double> out(offsets.empty() ? 0 : offsets.size() - 1, 0.0);
  for (std::size_t g = 0; g < out.size(); ++g)
    out[g] = group_max(ids, offsets[g], offsets[g + 1], [&](Id a, Id b) { return space.distance(a, b); });
  return out;
}

std::vector<double> group_image_diameters(const ImageTable& image, std::span<const std::size_t> offsets,
                                          std::span<const Id> ids) {
  std::vector<double> out(offsets.empty() ? 0 : offsets.size() - 1, 0.0);
  for (std::size_t g = 0; g < out.size(); ++g)
    out[g] = group_max(ids, offsets[g], offsets[g + 1], [&](Id a, Id b) { return image.distance(a, b); });
  return out;
}

}  // namespace serial

namespace parallel {

std::vector<double> min_distances(const PointCloudSpace& space, std::span<const Id> queries,
                                  std::span<const Id> targets) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(queries.size());
  std::vector<double> out(queries.size(), std::numeric_limits<double>::infinity());
  if (space.euclidean() && !targets.empty()) {
    // Expanding grid search; exact because the last ring searched contains
    // every target closer than the current best.
    double extent = 0.0;
    for (int d = 0; d < space.dim(); ++d) {
      double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
      for (Id t : targets) {
        lo = std::min(lo, space.point(t)[d]);
        hi = std::max(hi, space.point(t)[d]);
      }
      extent = std::max(extent, hi - lo);
    }
    const double cell = std::max(extent / std::sqrt(static_cast<double>(targets.size()) + 1.0), 1e-12);
    GridIndex index(space, std::vector<Id>(targets.begin(), targets.end()), cell);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      double d = 0.0;
      index.nearest(queries[static_cast<std::size_t>(i)], &d);
      out[static_cast<std::size_t>(i)] = d;
    }
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Id t : targets) best = std::min(best, space.distance(queries[static_cast<std::size_t>(i)], t));
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

std::vector<std::size_t> ball_counts(const GridIndex& index, std::span<const Id> centers, double radius) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(centers.size());
  std::vector<std::size_t> out(centers.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = index.count_within(centers[static_cast<std::size_t>(i)], radius);
  return out;
}

std::vector<std::size_t> cover_counts(const PointCloudSpace& space, std::span<const Id> queries,
                                      std::span<const Id> centers, std::span<const double> radii) {
  std::map<double, std::vector<Id>> groups;
  for (std::size_t c = 0; c < centers.size(); ++c) groups[radii[c]].push_back(centers[c]);
  std::vector<std::pair<double, GridIndex>> indexes;
  indexes.reserve(groups.size());
  for (auto& [r, ids] : groups) indexes.emplace_back(r, GridIndex(space, std::move(ids), r));

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(queries.size());
  std::vector<std::size_t> out(queries.size(), 0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (const auto& [r, index] : indexes) count += index.count_within(queries[static_cast<std::size_t>(i)], r);
    out[static_cast<std::size_t>(i)] = count;
  }
  return out;
}

std::vector<double> group_diameters(const PointCloudSpace& space, std::span<const std::size_t> offsets,
                                    std::span<const Id> ids) {
  const std::ptrdiff_t groups = offsets.empty() ? 0 : static_cast<std::ptrdiff_t>(offsets.size() - 1);
  std::vector<double> out(static_cast<std::size_t>(groups), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t g = 0; g < groups; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    out[gi] = group_max(ids, offsets[gi], offsets[gi + 1], [&](Id a, Id b) { return space.distance(a, b); });
  }
  return out;
}

std::vector<double> group_image_diameters(const ImageTable& image, std::span<const std::size_t> offsets,
                                          std::span<const Id> ids) {
  const std::ptrdiff_t groups = offsets.empty() ? 0 : static_cast<std::ptrdiff_t>(offsets.size() - 1);
  std::vector<double> out(static_cast<std::size_t>(groups), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t g = 0; g < groups; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    out[gi] = group_max(ids, offsets[gi], offsets[gi + 1], [&](Id a, Id b) { return image.distance(a, b); });
  }
  return out;
}

}  // namespace parallel

}  // namespace bext::kernels
