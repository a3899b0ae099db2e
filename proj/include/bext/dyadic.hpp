#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "bext/space.hpp"

namespace bext {

struct NetParams {
  double delta = 1.0 / 12.0;
  double c0 = 1.0;
  double C0 = 1.0;
  // When false, [k_min, k_max] is chosen so that level k_min is a single
  // root cube and level k_max makes every sample a center.
  bool fixed_levels = false;
  int k_min = 0;
  int k_max = 0;

  double c1() const { return c0 / 3.0; }
  double C1() const { return 2.0 * C0; }
};

// True iff 12 C0 delta <= c0 and c0 <= C0. Throws "bad-parameter" for
// nonpositive values or delta >= 1.
bool validate_net_params(double delta, double c0, double C0);

struct NetSystem {
  int k_min = 0;
  int k_max = 0;
  std::vector<Id> samples;               // ascending
  std::vector<std::vector<Id>> centers;  // centers[k - k_min], ascending ids

  const std::vector<Id>& at(int k) const { return centers[static_cast<std::size_t>(k - k_min)]; }
};

// Greedy id-ordered nets over `ids` (all samples when empty).
NetSystem build_nets(const PointCloudSpace& space, std::span<const Id> ids, const NetParams& params);

struct DyadicCube {
  int level = 0;
  int index = 0;
  Id center = kNoId;
  int parent = -1;  // index at level - 1, -1 at k_min
  std::vector<int> children;
  std::vector<Id> members;  // ascending
};

class CubeSystem {
 public:
  const NetParams& params() const { return params_; }
  const NetSystem& nets() const { return nets_; }
  int k_min() const { return nets_.k_min; }
  int k_max() const { return nets_.k_max; }
  const std::vector<Id>& samples() const { return samples_; }

  const std::vector<DyadicCube>& level(int k) const { return levels_[static_cast<std::size_t>(k - k_min())]; }
  const DyadicCube& cube(int k, int index) const { return level(k)[static_cast<std::size_t>(index)]; }

  // Index of the level-k cube containing x. Throws "unknown-point" and "bad-level".
  int locate(Id x, int k) const;
  // Same without validation; x must be a sample and k in range.
  int locate_unchecked(Id x, int k) const {
    return cube_of_[static_cast<std::size_t>(k - k_min())][static_cast<std::size_t>(slot_[x])];
  }
  bool contains(Id x) const { return x >= 0 && static_cast<std::size_t>(x) < slot_.size() && slot_[x] >= 0; }

 private:
  friend CubeSystem build_cubes(const PointCloudSpace&, const NetSystem&, const NetParams&);

  NetParams params_;
  NetSystem nets_;
  std::vector<Id> samples_;
  std::vector<std::int32_t> slot_;  // space id -> position in samples_
  std::vector<std::vector<DyadicCube>> levels_;
  std::vector<std::vector<int>> cube_of_;  // [level][sample slot]
};

// Throws "invalid-net" when separation or covering fails.
CubeSystem build_cubes(const PointCloudSpace& space, const NetSystem& nets, const NetParams& params);

struct CubeSystemCheck {
  std::size_t partition = 0;
  std::size_t nesting = 0;
  std::size_t inner_ball = 0;
  std::size_t outer_ball = 0;
  std::size_t total() const { return partition + nesting + inner_ball + outer_ball; }
};
// Exhaustive check of partition, nesting and the c1/C1 ball sandwich.
CubeSystemCheck check_cube_system(const PointCloudSpace& space, const CubeSystem& system);

void export_cubes_jsonl(std::ostream& out, const CubeSystem& system, bool member_ids);

}  // namespace bext
