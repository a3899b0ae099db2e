#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "bext/domain.hpp"
#include "bext/dyadic.hpp"

namespace bext {

struct WhitneyParams {
  double delta = 1.0 / 12.0;
  double c1 = 1.0 / 3.0;
  double C1 = 2.0;
  double a = 4.0;
};

// True iff a >= 4, 6 c1 <= C1, 2 C1 delta <= c1 and delta in (0,1).
// Throws "bad-parameter" for nonpositive input.
bool validate_whitney_params(const WhitneyParams& p);

// Net parameters of the underlying cube system: c0 = 3 c1, C0 = C1 / 2.
NetParams net_params_for(const WhitneyParams& p);

// Layer index k with a C1 delta^k < d <= a C1 delta^(k-1).
int whitney_layer(double d, const WhitneyParams& p);

struct WhitneyCube {
  int level = 0;          // Whitney level k (may lie beyond the dyadic range)
  int dyadic_level = 0;   // level of the dyadic cube holding the members
  int dyadic_index = 0;
  Id center = kNoId;
  double inner_radius = 0.0;  // c1 delta^k
  double outer_radius = 0.0;  // C1 delta^k
  double dist_to_boundary = 0.0;
  double member_diameter = 0.0;
  std::vector<Id> members;  // ascending

  // Diameter used in size comparisons: members, floored at the inner radius.
  double size() const { return std::max(member_diameter, inner_radius); }
};

struct CubeEdge {
  int a = 0;
  int b = 0;
  bool members_linked = false;
  bool outer_balls_meet = false;
};

class WhitneyDecomposition {
 public:
  static constexpr double kLambda0 = 1.5;

  const WhitneyParams& params() const { return params_; }
  const std::vector<WhitneyCube>& cubes() const { return cubes_; }
  const WhitneyCube& cube(int i) const { return cubes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return cubes_.size(); }
  int min_level() const { return min_level_; }
  int max_level() const { return max_level_; }
  // Cube indices at Whitney level k.
  std::vector<int> level(int k) const;

  // Index of the cube containing x. Throws "not-interior".
  int cube_of(Id x) const;
  int cube_of_unchecked(Id x) const { return cube_of_[static_cast<std::size_t>(x)]; }

  // Member-linked neighbors (ascending); chains walk these.
  std::span<const int> neighbors(int cube) const {
    const auto c = static_cast<std::size_t>(cube);
    return {adj_ids_.data() + adj_start_[c], adj_start_[c + 1] - adj_start_[c]};
  }
  const std::vector<CubeEdge>& edges() const { return edges_; }

 private:
  friend WhitneyDecomposition build_whitney(const DomainModel&, const CubeSystem&, const WhitneyParams&);

  WhitneyParams params_;
  std::vector<WhitneyCube> cubes_;
  int min_level_ = 0;
  int max_level_ = 0;
  std::vector<int> cube_of_;  // space id -> cube, -1 outside
  std::vector<std::size_t> adj_start_;
  std::vector<int> adj_ids_;
  std::vector<CubeEdge> edges_;
};

// Throws "bad-parameter" for invalid params or a cube system that is not
// built on the interior samples, and "improper-domain" without boundary.
WhitneyDecomposition build_whitney(const DomainModel& domain, const CubeSystem& cubes, const WhitneyParams& params);

// Number of cubes Q with x in lambda B^Q. Throws "lambda-out-of-range".
std::size_t overlap_count(const WhitneyDecomposition& decomp, const DomainModel& domain, double lambda, Id x);
// Same for every interior sample, aligned with domain.interior().
std::vector<std::size_t> overlap_counts(const WhitneyDecomposition& decomp, const DomainModel& domain, double lambda);

// Shortest member-adjacency path of cubes from x1's cube to x2's cube.
// Throws "no-chain" and "not-interior".
std::vector<int> cube_chain(const WhitneyDecomposition& decomp, Id x1, Id x2);

struct WhitneyCheck {
  std::size_t partition = 0;
  std::size_t lower_distance = 0;   // (a-2) C1 delta^k <= d(Q, boundary)
  std::size_t upper_distance = 0;   // d(Q, boundary) <= a C1 delta^(k-1) + 2 eps
  std::size_t enlarged_ball = 0;    // boundary samples inside (3/2) B^Q
  std::size_t center_clearance = 0; // d(x_Q, boundary) >= (3/2) C1 delta^k - eps
  std::size_t inner_ball = 0;
  std::size_t outer_ball = 0;
  std::size_t maximality = 0;
  std::size_t size_ratio = 0;       // d(Q, boundary) / size in [(a-2)/2, a C1 / (c1 delta)]
  std::size_t total() const {
    return partition + lower_distance + upper_distance + enlarged_ball + center_clearance + inner_ball + outer_ball +
           maximality + size_ratio;
  }
};
WhitneyCheck check_whitney(const WhitneyDecomposition& decomp, const DomainModel& domain, const CubeSystem& cubes);

void export_whitney_jsonl(std::ostream& out, const WhitneyDecomposition& decomp);

}  // namespace bext
