#include "bext/dyadic.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "bext/error.hpp"

namespace bext {

namespace {

double level_radius(double c, double delta, int k) { return c * std::pow(delta, k); }

// Upper bound for the diameter: box diagonal, or twice an eccentricity.
double diameter_bound(const PointCloudSpace& space, std::span<const Id> ids) {
  if (ids.size() < 2) return 0.0;
  if (space.euclidean()) {
    double s = 0.0;
    for (int d = 0; d < space.dim(); ++d) {
      double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
      for (Id x : ids) {
        lo = std::min(lo, space.point(x)[d]);
        hi = std::max(hi, space.point(x)[d]);
      }
      s += (hi - lo) * (hi - lo);
    }
    return std::sqrt(s);
  }
  double e = 0.0;
  for (Id y : ids) e = std::max(e, space.distance(ids[0], y));
  return 2.0 * e;
}

double min_separation(const PointCloudSpace& space, std::span<const Id> ids, double diam) {
  if (ids.size() < 2) return std::numeric_limits<double>::infinity();
  const double cell = diam / std::sqrt(static_cast<double>(ids.size()));
  GridIndex index(space, std::vector<Id>(ids.begin(), ids.end()), cell);
  std::vector<double> best(ids.size(), std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(ids.size()); ++i) {
    const Id x = ids[static_cast<std::size_t>(i)];
    double& b = best[static_cast<std::size_t>(i)];
    for (double r = cell; ; r *= 2.0) {
      index.for_each_within(x, r, [&](Id y, double d) {
        if (y != x && d > 0.0) b = std::min(b, d);
      });
      if (b < std::numeric_limits<double>::infinity() || r > 4.0 * diam) break;
    }
  }
  double m = std::numeric_limits<double>::infinity();
  for (double b : best) m = std::min(m, b);
  return m;
}

// Incremental bucket grid of admitted centers for the greedy scan.
class CenterGrid {
 public:
  CenterGrid(const PointCloudSpace& space, double cell) : space_(space), cell_(cell) {}

  bool far_from_all(Id x, double sep) const {
    if (!space_.euclidean()) {
      for (Id c : all_)
        if (space_.distance(x, c) < sep) return false;
      return true;
    }
    const auto key = cell_of(x);
    const int dim = space_.dim();
    for (int dz = (dim > 2 ? -1 : 0); dz <= (dim > 2 ? 1 : 0); ++dz)
      for (int dy = (dim > 1 ? -1 : 0); dy <= (dim > 1 ? 1 : 0); ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          auto it = cells_.find(pack(key[0] + dx, key[1] + dy, key[2] + dz));
          if (it == cells_.end()) continue;
          for (Id c : it->second)
            if (space_.distance(x, c) < sep) return false;
        }
    return true;
  }

  void add(Id x) {
    if (!space_.euclidean()) {
      all_.push_back(x);
      return;
    }
    const auto key = cell_of(x);
    cells_[pack(key[0], key[1], key[2])].push_back(x);
  }

 private:
  std::array<std::int64_t, 3> cell_of(Id x) const {
    std::array<std::int64_t, 3> k{0, 0, 0};
    const auto p = space_.point(x);
    for (int d = 0; d < space_.dim(); ++d) k[static_cast<std::size_t>(d)] = static_cast<std::int64_t>(std::floor(p[d] / cell_));
    return k;
  }
  static std::uint64_t pack(std::int64_t a, std::int64_t b, std::int64_t c) {
    const auto m = [](std::int64_t v) { return static_cast<std::uint64_t>(v + (1 << 20)) & 0x1FFFFF; };
    return (m(a) << 42) | (m(b) << 21) | m(c);
  }

  const PointCloudSpace& space_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<Id>> cells_;
  std::vector<Id> all_;
};

}  // namespace

bool validate_net_params(double delta, double c0, double C0) {
  if (!(delta > 0.0) || !(c0 > 0.0) || !(C0 > 0.0) || !(delta < 1.0))
    throw Error("bad-parameter", "net parameters must be positive with delta < 1");
  return 12.0 * C0 * delta <= c0 && c0 <= C0;
}

NetSystem build_nets(const PointCloudSpace& space, std::span<const Id> ids_in, const NetParams& params) {
  if (!validate_net_params(params.delta, params.c0, params.C0))
    throw Error("bad-parameter", "net parameters violate 12 C0 delta <= c0 <= C0");
  std::vector<Id> ids(ids_in.begin(), ids_in.end());
  if (ids.empty()) {
    ids.resize(space.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<Id>(i);
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw Error("empty-space", "no samples to build nets on");

  NetSystem nets;
  nets.samples = ids;
  if (params.fixed_levels) {
    if (params.k_min > params.k_max) throw Error("bad-parameter", "k_min > k_max");
    nets.k_min = params.k_min;
    nets.k_max = params.k_max;
  } else {
    const double diam = diameter_bound(space, ids);
    const double sep = min_separation(space, ids, diam);
    if (ids.size() == 1 || !(diam > 0.0)) {
      nets.k_min = nets.k_max = 0;
    } else {
      // Single root: c0 delta^k_min > diam.
      int k = static_cast<int>(std::floor(std::log(diam / params.c0) / std::log(params.delta)));
      while (level_radius(params.c0, params.delta, k) <= diam) --k;
      while (level_radius(params.c0, params.delta, k + 1) > diam) ++k;
      nets.k_min = k;
      int kk = k;
      while (level_radius(params.c0, params.delta, kk) >= sep) ++kk;
      nets.k_max = kk;
    }
  }

  for (int k = nets.k_min; k <= nets.k_max; ++k) {
    const double sep = level_radius(params.c0, params.delta, k);
    CenterGrid grid(space, sep);
    std::vector<Id> centers;
    for (Id x : ids) {
      if (grid.far_from_all(x, sep)) {
        centers.push_back(x);
        grid.add(x);
      }
    }
    nets.centers.push_back(std::move(centers));
  }
  return nets;
}

int CubeSystem::locate(Id x, int k) const {
  if (!contains(x)) throw Error("unknown-point", "sample " + std::to_string(x) + " is not in the cube system");
  if (k < k_min() || k > k_max()) throw Error("bad-level", "level " + std::to_string(k) + " out of range");
  return locate_unchecked(x, k);
}

CubeSystem build_cubes(const PointCloudSpace& space, const NetSystem& nets, const NetParams& params) {
  CubeSystem sys;
  sys.params_ = params;
  sys.nets_ = nets;
  const int levels = nets.k_max - nets.k_min + 1;
  if (levels <= 0 || static_cast<int>(nets.centers.size()) != levels) throw Error("invalid-net", "level count mismatch");

  sys.samples_ = nets.samples;
  sys.slot_.assign(space.size(), -1);
  for (std::size_t i = 0; i < sys.samples_.size(); ++i) sys.slot_[static_cast<std::size_t>(sys.samples_[i])] = static_cast<std::int32_t>(i);
  const std::size_t n = sys.samples_.size();

  // Net invariants, plus nearest-center lookups used below.
  std::vector<GridIndex> index(static_cast<std::size_t>(levels));
  std::vector<int> position(space.size(), -1);
  for (int k = nets.k_min; k <= nets.k_max; ++k) {
    const auto& centers = nets.at(k);
    if (centers.empty()) throw Error("invalid-net", "empty net at level " + std::to_string(k));
    const double sep = level_radius(params.c0, params.delta, k);
    const double cover = level_radius(params.C0, params.delta, k);
    auto& ix = index[static_cast<std::size_t>(k - nets.k_min)];
    ix = GridIndex(space, centers, sep);
    std::size_t bad = 0;
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : bad)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(centers.size()); ++i) {
      const Id c = centers[static_cast<std::size_t>(i)];
      ix.for_each_within(c, sep, [&](Id o, double) { bad += o != c ? 1 : 0; });
    }
    if (bad) throw Error("invalid-net", "separation fails at level " + std::to_string(k));
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : bad)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      double d = 0.0;
      ix.nearest(sys.samples_[static_cast<std::size_t>(i)], &d);
      bad += d < cover ? 0 : 1;
    }
    if (bad) throw Error("invalid-net", "covering fails at level " + std::to_string(k));
  }

  sys.levels_.resize(static_cast<std::size_t>(levels));
  sys.cube_of_.assign(static_cast<std::size_t>(levels), std::vector<int>(n, -1));
  for (int k = nets.k_min; k <= nets.k_max; ++k) {
    auto& cubes = sys.levels_[static_cast<std::size_t>(k - nets.k_min)];
    const auto& centers = nets.at(k);
    cubes.resize(centers.size());
    for (std::size_t a = 0; a < centers.size(); ++a) {
      cubes[a].level = k;
      cubes[a].index = static_cast<int>(a);
      cubes[a].center = centers[a];
    }
  }

  // Finest level: nearest center, lowest index on ties.
  {
    const auto& centers = nets.at(nets.k_max);
    for (std::size_t a = 0; a < centers.size(); ++a) position[static_cast<std::size_t>(centers[a])] = static_cast<int>(a);
    const auto& ix = index.back();
    auto& row = sys.cube_of_.back();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
      row[static_cast<std::size_t>(i)] = position[static_cast<std::size_t>(ix.nearest(sys.samples_[static_cast<std::size_t>(i)]))];
  }

  // Parents: each center attaches to its nearest coarser center.
  for (int k = nets.k_max; k > nets.k_min; --k) {
    const auto& coarse = nets.at(k - 1);
    for (std::size_t a = 0; a < coarse.size(); ++a) position[static_cast<std::size_t>(coarse[a])] = static_cast<int>(a);
    auto& fine = sys.levels_[static_cast<std::size_t>(k - nets.k_min)];
    auto& up = sys.levels_[static_cast<std::size_t>(k - 1 - nets.k_min)];
    const auto& ix = index[static_cast<std::size_t>(k - 1 - nets.k_min)];
    for (auto& cube : fine) {
      cube.parent = position[static_cast<std::size_t>(ix.nearest(cube.center))];
      up[static_cast<std::size_t>(cube.parent)].children.push_back(cube.index);
    }
    const auto& below = sys.cube_of_[static_cast<std::size_t>(k - nets.k_min)];
    auto& here = sys.cube_of_[static_cast<std::size_t>(k - 1 - nets.k_min)];
    for (std::size_t i = 0; i < n; ++i) here[i] = fine[static_cast<std::size_t>(below[i])].parent;
  }

  for (int k = nets.k_min; k <= nets.k_max; ++k) {
    auto& cubes = sys.levels_[static_cast<std::size_t>(k - nets.k_min)];
    const auto& row = sys.cube_of_[static_cast<std::size_t>(k - nets.k_min)];
    for (std::size_t i = 0; i < n; ++i) cubes[static_cast<std::size_t>(row[i])].members.push_back(sys.samples_[i]);
  }
  return sys;
}

CubeSystemCheck check_cube_system(const PointCloudSpace& space, const CubeSystem& system) {
  CubeSystemCheck out;
  const auto& samples = system.samples();
  const NetParams& p = system.params();
  GridIndex index(space, samples, level_radius(p.c1(), p.delta, system.k_max()));
  for (int k = system.k_min(); k <= system.k_max(); ++k) {
    std::vector<int> hits(space.size(), 0);
    for (const auto& cube : system.level(k))
      for (Id m : cube.members) ++hits[static_cast<std::size_t>(m)];
    for (Id x : samples) out.partition += hits[static_cast<std::size_t>(x)] == 1 ? 0 : 1;

    const double inner = level_radius(p.c1(), p.delta, k);
    const double outer = level_radius(p.C1(), p.delta, k);
    const auto& cubes = system.level(k);
    std::vector<std::size_t> nest(cubes.size(), 0), in(cubes.size(), 0), outv(cubes.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(cubes.size()); ++a) {
      const auto& cube = cubes[static_cast<std::size_t>(a)];
      const auto ai = static_cast<std::size_t>(a);
      if (k > system.k_min()) {
        if (cube.parent < 0) {
          ++nest[ai];
        } else {
          const auto& up = system.cube(k - 1, cube.parent).members;
          for (Id m : cube.members) nest[ai] += std::binary_search(up.begin(), up.end(), m) ? 0 : 1;
        }
      }
      for (Id m : cube.members) outv[ai] += space.distance(cube.center, m) < outer ? 0 : 1;
      index.for_each_within(cube.center, inner, [&](Id y, double) {
        in[ai] += std::binary_search(cube.members.begin(), cube.members.end(), y) ? 0 : 1;
      });
    }
    for (std::size_t a = 0; a < cubes.size(); ++a) {
      out.nesting += nest[a];
      out.inner_ball += in[a];
      out.outer_ball += outv[a];
    }
  }
  return out;
}

void export_cubes_jsonl(std::ostream& out, const CubeSystem& system, bool member_ids) {
  for (int k = system.k_min(); k <= system.k_max(); ++k)
    for (const auto& cube : system.level(k)) {
      nlohmann::ordered_json j;
      j["level"] = cube.level;
      j["index"] = cube.index;
      j["center"] = cube.center;
      j["parent"] = cube.parent < 0 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(cube.parent);
      j["members_count"] = cube.members.size();
      if (member_ids) j["member_ids"] = cube.members;
      out << j.dump() << '\n';
    }
}

}  // namespace bext
