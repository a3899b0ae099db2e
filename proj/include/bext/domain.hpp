#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bext/space.hpp"

namespace bext {

/// Two-sided ball-measure bound r^q / C_q <= nu(B(x,r)) <= C_q r^q.
struct AhlforsProfile {
  double q = 2.0;          // exponent the bound is stated at
  double fitted_q = 2.0;   // least-squares slope of log nu vs log r
  double c_q = 1.0;
  double r_min = 0.0;
  double r_max = 0.0;
  std::size_t balls = 0;
};

/// Polyline through sample ids with parameter and cumulative length per vertex.
struct CurveModel {
  std::vector<Id> vertices;
  std::vector<double> t;
  std::vector<double> arclen;

  double length() const { return arclen.empty() ? 0.0 : arclen.back(); }
  std::size_t size() const { return vertices.size(); }
};

// Builds arc-length data for a vertex sequence (t proportional to length;
// a single vertex gets t = {0}).
CurveModel make_curve(const PointCloudSpace& space, std::vector<Id> vertices);

// Throws "degenerate-curve" for fewer than two vertices or zero length.
CurveModel reparameterize_by_arclength(const PointCloudSpace& space, const CurveModel& curve);

/// A finitely sampled domain: interior samples, a separate boundary sample
/// set, resolution epsilon and the measure model counting x epsilon^q.
class DomainModel {
 public:
  struct Options {
    double boundary_spacing = 0.0;  // defaults to epsilon
    double boundary_dim = 1.0;      // exponent of the boundary measure
    std::string name;
  };

  DomainModel(std::shared_ptr<const PointCloudSpace> space, std::vector<Id> interior,
              std::vector<Id> boundary, Id center, double epsilon, double q, Options options);
  DomainModel(std::shared_ptr<const PointCloudSpace> space, std::vector<Id> interior,
              std::vector<Id> boundary, Id center, double epsilon, double q)
      : DomainModel(std::move(space), std::move(interior), std::move(boundary), center, epsilon, q, Options{}) {}

  const PointCloudSpace& space() const { return *space_; }
  const std::shared_ptr<const PointCloudSpace>& space_ptr() const { return space_; }
  const std::vector<Id>& interior() const { return interior_; }
  const std::vector<Id>& boundary() const { return boundary_; }
  Id center() const { return center_; }
  double epsilon() const { return epsilon_; }
  double q() const { return q_; }
  double boundary_spacing() const { return boundary_spacing_; }
  double boundary_dim() const { return boundary_dim_; }
  const std::string& name() const { return name_; }

  // Radius of the epsilon-neighbor graph and of member adjacency.
  double link_radius() const { return 1.5 * epsilon_; }

  bool is_interior(Id x) const { return x >= 0 && static_cast<std::size_t>(x) < slot_.size() && slot_[x] >= 0; }
  bool is_boundary(Id x) const { return x >= 0 && static_cast<std::size_t>(x) < is_boundary_.size() && is_boundary_[x]; }
  // Position of x in interior(), or -1.
  std::int32_t slot(Id x) const { return is_interior(x) ? slot_[x] : -1; }

  // Throws "not-interior".
  double dist_to_boundary(Id x) const;
  // Cached values aligned with interior().
  const std::vector<double>& boundary_distances() const { return dbound_; }

  double point_measure() const { return point_measure_; }
  double boundary_point_measure() const { return boundary_point_measure_; }

  const GridIndex& interior_index() const { return interior_index_; }
  const GridIndex& boundary_index() const { return boundary_index_; }

  // Interior neighbors of an interior sample within link_radius (ascending ids).
  std::span<const Id> neighbors(Id x) const;
  // Interior samples within link_radius of an arbitrary sample (e.g. a boundary id).
  std::vector<Id> interior_near(Id x) const;

  bool connected() const;

 private:
  std::shared_ptr<const PointCloudSpace> space_;
  std::vector<Id> interior_;
  std::vector<Id> boundary_;
  Id center_ = kNoId;
  double epsilon_ = 0.0;
  double q_ = 2.0;
  double boundary_spacing_ = 0.0;
  double boundary_dim_ = 1.0;
  std::string name_;
  double point_measure_ = 0.0;
  double boundary_point_measure_ = 0.0;

  std::vector<std::int32_t> slot_;
  std::vector<char> is_boundary_;
  std::vector<double> dbound_;
  GridIndex interior_index_;
  GridIndex boundary_index_;
  std::vector<std::size_t> nbr_start_;
  std::vector<Id> nbr_ids_;
};

// Greedy covers of sampled balls B(x, r) by balls of radius r/2 centered at
// samples; returns the largest cover size over `trials` random (x, r).
// Throws "empty-space".
std::size_t estimate_doubling(const PointCloudSpace& space, std::size_t trials, std::uint64_t seed);
// Cover size for one ball, exposed for testing.
std::size_t doubling_cover_size(const GridIndex& index, Id x, double r);

// Throws "sub-resolution" for radii below 4 epsilon and "need-2-radii" when
// fewer than two distinct radii are given.
AhlforsProfile estimate_ahlfors(const DomainModel& domain, std::vector<double> radii, std::uint64_t seed,
                                std::size_t centers = 64);

}  // namespace bext
