#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace bext {

using Id = std::int32_t;
inline constexpr Id kNoId = -1;

/// Finite metric space on dense ids 0..n-1.
///
/// The metric is one of: Euclidean distance between stored coordinates, an
/// explicit n x n table, or a user callable. Coordinates may be present with
/// a table or callable metric; they are then used for rendering and spatial
/// bucketing is disabled.
class PointCloudSpace {
 public:
  using DistanceFn = std::function<double(Id, Id)>;

  static PointCloudSpace from_coordinates(std::vector<double> coords, int dim);
  static PointCloudSpace from_table(std::vector<double> table, std::size_t n,
                                    std::vector<double> coords = {}, int dim = 0);
  static PointCloudSpace from_callable(std::size_t n, DistanceFn fn,
                                       std::vector<double> coords = {}, int dim = 0);

  std::size_t size() const { return n_; }
  bool empty() const { return n_ == 0; }
  int dim() const { return dim_; }
  bool has_coordinates() const { return dim_ > 0; }
  // True when distance() is the Euclidean distance of the stored coordinates.
  bool euclidean() const { return kind_ == Kind::kEuclidean; }

  std::span<const double> point(Id i) const {
    return {coords_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
  }
  const std::vector<double>& coordinates() const { return coords_; }

  double distance(Id a, Id b) const;
  // Euclidean distance from id to an arbitrary coordinate tuple.
  double distance_to_point(Id a, std::span<const double> p) const;

  // Brute-force diameter over a subset (all ids if empty).
  double diameter(std::span<const Id> ids = {}) const;

  // Checks symmetry, zero diagonal, non-negativity and the triangle
  // inequality on `triples` random triples. Returns the number of violations.
  std::size_t check_metric_axioms(std::size_t triples, std::uint64_t seed,
                                  double tolerance = 1e-12) const;

 private:
  enum class Kind { kEuclidean, kTable, kCallable };

  Kind kind_ = Kind::kEuclidean;
  std::size_t n_ = 0;
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<double> table_;
  DistanceFn fn_;
};

/// Uniform-grid bucketing over a subset of a Euclidean space. Falls back to
/// scanning the whole subset when the space has no Euclidean coordinates.
class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(const PointCloudSpace& space, std::vector<Id> ids, double cell);

  const std::vector<Id>& ids() const { return ids_; }
  const PointCloudSpace& space() const { return *space_; }

  // Calls fn(id, distance) for every indexed id with distance(center, id) < r.
  template <class Fn>
  void for_each_within(Id center, double r, Fn&& fn) const {
    visit_candidates(space_->point(center), r, center, [&](Id id) {
      const double d = space_->distance(center, id);
      if (d < r) fn(id, d);
    });
  }

  // Same query from an arbitrary coordinate tuple (Euclidean spaces only).
  template <class Fn>
  void for_each_within_point(std::span<const double> p, double r, Fn&& fn) const {
    visit_candidates(p, r, kNoId, [&](Id id) {
      const double d = space_->distance_to_point(id, p);
      if (d < r) fn(id, d);
    });
  }

  std::vector<Id> within(Id center, double r) const;
  std::size_t count_within(Id center, double r) const;
  // Nearest indexed id (lowest id on ties); kNoId when empty.
  Id nearest(Id center, double* distance = nullptr) const;

 private:
  template <class Visit>
  void visit_candidates(std::span<const double> p, double r, Id /*center*/, Visit&& visit) const {
    if (!bucketed_) {
      for (Id id : ids_) visit(id);
      return;
    }
    std::int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int d = 0; d < dim_; ++d) {
      lo[d] = std::max<std::int64_t>(0, cell_of(p[d] - r, d));
      hi[d] = std::min<std::int64_t>(extent_[d] - 1, cell_of(p[d] + r, d));
      if (lo[d] > hi[d]) return;
    }
    for (std::int64_t k = lo[2]; k <= hi[2]; ++k)
      for (std::int64_t j = lo[1]; j <= hi[1]; ++j) {
        const std::size_t row = flat(lo[0], j, k);
        const std::size_t first = cell_start_[row];
        const std::size_t last = cell_start_[row + static_cast<std::size_t>(hi[0] - lo[0]) + 1];
        for (std::size_t s = first; s < last; ++s) visit(cell_ids_[s]);
      }
  }

  std::int64_t cell_of(double x, int d) const {
    return static_cast<std::int64_t>(std::floor((x - lo_[d]) / cell_));
  }
  std::size_t flat(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return static_cast<std::size_t>((k * extent_[1] + j) * extent_[0] + i);
  }

  const PointCloudSpace* space_ = nullptr;
  std::vector<Id> ids_;
  bool bucketed_ = false;
  int dim_ = 0;
  double cell_ = 1.0;
  std::vector<double> lo_;
  std::vector<std::int64_t> extent_;
  std::vector<std::size_t> cell_start_;  // CSR over cells
  std::vector<Id> cell_ids_;
};

// Point-cloud ingestion.
//   coordinates: CSV with header `id,x,y[,z]`
//   table:       CSV with header `id`, one id per row, plus a separate square
//                distance table (whitespace or comma separated rows)
PointCloudSpace read_points_csv(std::istream& in);
PointCloudSpace read_points_csv(const std::string& path);
PointCloudSpace read_distance_table(std::istream& ids_csv, std::istream& table);
void write_points_csv(std::ostream& out, const PointCloudSpace& space);

}  // namespace bext
