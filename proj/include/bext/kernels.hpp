#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference
// (brute force, kept for testing) and an OpenMP version that the library
// calls. Both return identical results: per-item values are written to
// their own slots and reductions are max/min or serial sums over those slots.

#include <span>
#include <vector>

#include "bext/space.hpp"

namespace bext::kernels {

// Row-major values of a map into R^m, one row per space id.
struct ImageTable {
  std::vector<double> values;
  int dim = 1;

  std::span<const double> row(Id id) const {
    return {values.data() + static_cast<std::size_t>(id) * dim, static_cast<std::size_t>(dim)};
  }
  double distance(Id a, Id b) const;
};

namespace serial {

// For each query id, min distance to any of `targets`.
std::vector<double> min_distances(const PointCloudSpace& space, std::span<const Id> queries,
                                  std::span<const Id> targets);

// For each center, the number of `members` strictly within `radius`.
std::vector<std::size_t> ball_counts(const PointCloudSpace& space, std::span<const Id> centers,
                                     std::span<const Id> members, double radius);

// For each query id, the number of balls B(centers[i], radii[i]) containing it.
std::vector<std::size_t> cover_counts(const PointCloudSpace& space, std::span<const Id> queries,
                                      std::span<const Id> centers, std::span<const double> radii);

// Max pairwise distance within each group (groups given as CSR offsets).
std::vector<double> group_diameters(const PointCloudSpace& space, std::span<const std::size_t> offsets,
                                    std::span<const Id> ids);

// Same over image values.
std::vector<double> group_image_diameters(const ImageTable& image, std::span<const std::size_t> offsets,
                                          std::span<const Id> ids);

}  // namespace serial

namespace parallel {

std::vector<double> min_distances(const PointCloudSpace& space, std::span<const Id> queries,
                                  std::span<const Id> targets);

// `index` must index exactly the member set.
std::vector<std::size_t> ball_counts(const GridIndex& index, std::span<const Id> centers, double radius);

std::vector<std::size_t> cover_counts(const PointCloudSpace& space, std::span<const Id> queries,
                                      std::span<const Id> centers, std::span<const double> radii);

std::vector<double> group_diameters(const PointCloudSpace& space, std::span<const std::size_t> offsets,
                                    std::span<const Id> ids);

std::vector<double> group_image_diameters(const ImageTable& image, std::span<const std::size_t> offsets,
                                          std::span<const Id> ids);

}  // namespace parallel

int max_threads();

}  // namespace bext::kernels
