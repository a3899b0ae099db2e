#include "bext/whitney.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "bext/error.hpp"
#include "bext/kernels.hpp"

namespace bext {

namespace {

double level_radius(double c, double delta, int k) { return c * std::pow(delta, k); }

std::int64_t key_of(int k, int index) {
  return (static_cast<std::int64_t>(k + (1 << 20)) << 32) | static_cast<std::uint32_t>(index);
}

// Dyadic cube holding x at Whitney level k, clamped to the dyadic range.
int clamped_index(const CubeSystem& cubes, Id x, int k) {
  const int j = std::clamp(k, cubes.k_min(), cubes.k_max());
  return cubes.locate_unchecked(x, j);
}

}  // namespace

bool validate_whitney_params(const WhitneyParams& p) {
  if (!(p.delta > 0.0) || !(p.c1 > 0.0) || !(p.C1 > 0.0) || !(p.a > 0.0))
    throw Error("bad-parameter", "Whitney parameters must be positive");
  return p.a >= 4.0 && 6.0 * p.c1 <= p.C1 * (1.0 + 1e-12) && 2.0 * p.C1 * p.delta <= p.c1 * (1.0 + 1e-12) &&
         p.delta < 1.0;
}

NetParams net_params_for(const WhitneyParams& p) {
  NetParams n;
  n.delta = p.delta;
  n.c0 = 3.0 * p.c1;
  n.C0 = 0.5 * p.C1;
  return n;
}

int whitney_layer(double d, const WhitneyParams& p) {
  const double base = p.a * p.C1;
  int k = static_cast<int>(std::floor(std::log(d / base) / std::log(p.delta))) + 1;
  while (d <= base * std::pow(p.delta, k)) ++k;
  while (d > base * std::pow(p.delta, k - 1)) --k;
  return k;
}

std::vector<int> WhitneyDecomposition::level(int k) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < cubes_.size(); ++i)
    if (cubes_[i].level == k) out.push_back(static_cast<int>(i));
  return out;
}

int WhitneyDecomposition::cube_of(Id x) const {
  if (x < 0 || static_cast<std::size_t>(x) >= cube_of_.size() || cube_of_[static_cast<std::size_t>(x)] < 0)
    throw Error("not-interior", "sample " + std::to_string(x) + " is not interior");
  return cube_of_[static_cast<std::size_t>(x)];
}

WhitneyDecomposition build_whitney(const DomainModel& domain, const CubeSystem& cubes, const WhitneyParams& params) {
  if (!validate_whitney_params(params)) throw Error("bad-parameter", "Whitney parameters violate a >= 4, 6 c1 <= C1, 2 C1 delta <= c1");
  if (domain.boundary().empty()) throw Error("improper-domain", "domain has no boundary samples");
  if (cubes.samples() != domain.interior()) throw Error("bad-parameter", "cube system is not built on the interior samples");
  const NetParams np = cubes.params();
  if (std::abs(np.delta - params.delta) > 1e-15 || std::abs(np.c0 - 3.0 * params.c1) > 1e-12 ||
      std::abs(np.C0 - 0.5 * params.C1) > 1e-12)
    throw Error("bad-parameter", "cube system must use c0 = 3 c1 and C0 = C1 / 2");

  const auto& interior = domain.interior();
  const auto& dist = domain.boundary_distances();
  const std::size_t n = interior.size();
  std::vector<int> layer(n);
  for (std::size_t i = 0; i < n; ++i) layer[i] = whitney_layer(dist[i], params);

  bool singleton_finest = true;
  for (const auto& c : cubes.level(cubes.k_max())) singleton_finest = singleton_finest && c.members.size() == 1;

  std::unordered_set<std::int64_t> qualified;
  std::vector<std::pair<int, int>> candidate(n);
  int lo = cubes.k_min();
  for (std::size_t i = 0; i < n; ++i) {
    if (layer[i] > cubes.k_max() && !singleton_finest)
      throw Error("bad-parameter", "cube system does not resolve single samples at its finest level");
    candidate[i] = {layer[i], clamped_index(cubes, interior[i], layer[i])};
    qualified.insert(key_of(candidate[i].first, candidate[i].second));
    lo = std::min(lo, layer[i]);
  }

  // Keep candidates without a qualified strict ancestor.
  std::map<std::pair<int, int>, Id> maximal;  // (level, dyadic index at clamp) -> representative
  for (std::size_t i = 0; i < n; ++i) {
    const auto [k, c] = candidate[i];
    bool top = true;
    for (int j = lo; j < k && top; ++j)
      if (qualified.count(key_of(j, clamped_index(cubes, interior[i], j)))) top = false;
    if (top) maximal.emplace(candidate[i], interior[i]);
  }

  WhitneyDecomposition w;
  w.params_ = params;
  for (const auto& [key, rep] : maximal) {
    WhitneyCube q;
    q.level = key.first;
    q.dyadic_level = std::clamp(key.first, cubes.k_min(), cubes.k_max());
    q.dyadic_index = key.second;
    const auto& dc = cubes.cube(q.dyadic_level, q.dyadic_index);
    q.center = dc.center;
    q.members = dc.members;
    q.inner_radius = level_radius(params.c1, params.delta, q.level);
    q.outer_radius = level_radius(params.C1, params.delta, q.level);
    q.dist_to_boundary = std::numeric_limits<double>::infinity();
    for (Id m : q.members) q.dist_to_boundary = std::min(q.dist_to_boundary, domain.dist_to_boundary(m));
    (void)rep;
    w.cubes_.push_back(std::move(q));
  }
  std::sort(w.cubes_.begin(), w.cubes_.end(), [](const WhitneyCube& a, const WhitneyCube& b) {
    return a.level != b.level ? a.level < b.level : a.center < b.center;
  });
  w.min_level_ = w.cubes_.empty() ? 0 : w.cubes_.front().level;
  w.max_level_ = w.cubes_.empty() ? 0 : w.cubes_.back().level;

  std::vector<std::size_t> offsets{0};
  std::vector<Id> flat;
  for (const auto& q : w.cubes_) {
    flat.insert(flat.end(), q.members.begin(), q.members.end());
    offsets.push_back(flat.size());
  }
  const auto diams = kernels::parallel::group_diameters(domain.space(), offsets, flat);
  for (std::size_t i = 0; i < w.cubes_.size(); ++i) w.cubes_[i].member_diameter = diams[i];

  w.cube_of_.assign(domain.space().size(), -1);
  for (std::size_t i = 0; i < w.cubes_.size(); ++i)
    for (Id m : w.cubes_[i].members) w.cube_of_[static_cast<std::size_t>(m)] = static_cast<int>(i);

  // Member-linked adjacency from the sample graph.
  std::vector<std::vector<int>> rows(w.cubes_.size());
  for (Id x : interior) {
    const int cx = w.cube_of_[static_cast<std::size_t>(x)];
    for (Id y : domain.neighbors(x)) {
      const int cy = w.cube_of_[static_cast<std::size_t>(y)];
      if (cy != cx) rows[static_cast<std::size_t>(cx)].push_back(cy);
    }
  }
  w.adj_start_.assign(w.cubes_.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    w.adj_start_[i + 1] = w.adj_start_[i] + r.size();
    w.adj_ids_.insert(w.adj_ids_.end(), r.begin(), r.end());
  }

  // Outer-ball intersections, flagged alongside member links.
  std::vector<Id> centers;
  double max_outer = 0.0;
  for (const auto& q : w.cubes_) {
    centers.push_back(q.center);
    max_outer = std::max(max_outer, q.outer_radius);
  }
  std::vector<int> cube_at_center(domain.space().size(), -1);
  for (std::size_t i = 0; i < w.cubes_.size(); ++i) cube_at_center[static_cast<std::size_t>(w.cubes_[i].center)] = static_cast<int>(i);
  GridIndex cindex(domain.space(), centers, std::max(max_outer, domain.epsilon()));
  std::vector<std::vector<CubeEdge>> per(w.cubes_.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(w.cubes_.size()); ++i) {
    const auto& q = w.cubes_[static_cast<std::size_t>(i)];
    auto& out = per[static_cast<std::size_t>(i)];
    auto linked = w.neighbors(static_cast<int>(i));
    cindex.for_each_within(q.center, q.outer_radius + max_outer, [&](Id c, double d) {
      const int j = cube_at_center[static_cast<std::size_t>(c)];
      if (j <= i) return;
      if (d < q.outer_radius + w.cubes_[static_cast<std::size_t>(j)].outer_radius)
        out.push_back({static_cast<int>(i), j, std::binary_search(linked.begin(), linked.end(), j), true});
    });
    for (int j : linked)
      if (j > i) {
        const double d = domain.space().distance(q.center, w.cubes_[static_cast<std::size_t>(j)].center);
        if (!(d < q.outer_radius + w.cubes_[static_cast<std::size_t>(j)].outer_radius))
          out.push_back({static_cast<int>(i), j, true, false});
      }
    std::sort(out.begin(), out.end(), [](const CubeEdge& a, const CubeEdge& b) { return a.b < b.b; });
  }
  for (auto& p : per) w.edges_.insert(w.edges_.end(), p.begin(), p.end());
  return w;
}

std::size_t overlap_count(const WhitneyDecomposition& decomp, const DomainModel& domain, double lambda, Id x) {
  if (!(lambda >= 1.0 && lambda <= WhitneyDecomposition::kLambda0))
    throw Error("lambda-out-of-range", "lambda must lie in [1, 3/2]");
  if (!domain.is_interior(x)) throw Error("not-interior", "sample is not interior");
  std::size_t count = 0;
  for (const auto& q : decomp.cubes())
    if (domain.space().distance(x, q.center) < lambda * q.outer_radius) ++count;
  return count;
}

std::vector<std::size_t> overlap_counts(const WhitneyDecomposition& decomp, const DomainModel& domain, double lambda) {
  if (!(lambda >= 1.0 && lambda <= WhitneyDecomposition::kLambda0))
    throw Error("lambda-out-of-range", "lambda must lie in [1, 3/2]");
  std::vector<Id> centers;
  std::vector<double> radii;
  for (const auto& q : decomp.cubes()) {
    centers.push_back(q.center);
    radii.push_back(lambda * q.outer_radius);
  }
  return kernels::parallel::cover_counts(domain.space(), domain.interior(), centers, radii);
}

std::vector<int> cube_chain(const WhitneyDecomposition& decomp, Id x1, Id x2) {
  const int from = decomp.cube_of(x1);
  const int to = decomp.cube_of(x2);
  std::vector<int> prev(decomp.size(), -2);
  std::deque<int> queue{from};
  prev[static_cast<std::size_t>(from)] = -1;
  while (!queue.empty() && prev[static_cast<std::size_t>(to)] == -2) {
    const int c = queue.front();
    queue.pop_front();
    for (int d : decomp.neighbors(c)) {
      if (prev[static_cast<std::size_t>(d)] != -2) continue;
      prev[static_cast<std::size_t>(d)] = c;
      queue.push_back(d);
    }
  }
  if (prev[static_cast<std::size_t>(to)] == -2) throw Error("no-chain", "cubes are not connected");
  std::vector<int> chain;
  for (int c = to; c != -1; c = prev[static_cast<std::size_t>(c)]) chain.push_back(c);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

WhitneyCheck check_whitney(const WhitneyDecomposition& decomp, const DomainModel& domain, const CubeSystem& cubes) {
  WhitneyCheck out;
  const WhitneyParams& p = decomp.params();
  const double eps = domain.epsilon();
  const auto& space = domain.space();

  std::vector<int> hits(space.size(), 0);
  for (const auto& q : decomp.cubes())
    for (Id m : q.members) ++hits[static_cast<std::size_t>(m)];
  for (Id x : domain.interior()) out.partition += hits[static_cast<std::size_t>(x)] == 1 ? 0 : 1;
  for (std::size_t i = 0; i < hits.size(); ++i)
    if (hits[i] && !domain.is_interior(static_cast<Id>(i))) ++out.partition;

  // Dyadic cubes (and virtual levels) that meet their own layer.
  std::unordered_set<std::int64_t> meets;
  int lo = cubes.k_min();
  for (Id x : domain.interior()) {
    const int k = whitney_layer(domain.dist_to_boundary(x), p);
    meets.insert(key_of(k, clamped_index(cubes, x, k)));
    lo = std::min(lo, k);
  }

  const auto& cs = decomp.cubes();
  std::vector<WhitneyCheck> per(cs.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cs.size()); ++i) {
    const auto& q = cs[static_cast<std::size_t>(i)];
    auto& c = per[static_cast<std::size_t>(i)];
    const double d = q.dist_to_boundary;
    const double dk = std::pow(p.delta, q.level);
    if (d < (p.a - 2.0) * p.C1 * dk) ++c.lower_distance;
    if (d > p.a * p.C1 * dk / p.delta + 2.0 * eps) ++c.upper_distance;
    domain.boundary_index().for_each_within(q.center, 1.5 * q.outer_radius, [&](Id, double) { ++c.enlarged_ball; });
    if (domain.dist_to_boundary(q.center) < 1.5 * q.outer_radius - eps) ++c.center_clearance;
    for (Id m : q.members)
      if (!(space.distance(q.center, m) < q.outer_radius)) ++c.outer_ball;
    domain.interior_index().for_each_within(q.center, q.inner_radius, [&](Id y, double) {
      if (!std::binary_search(q.members.begin(), q.members.end(), y)) ++c.inner_ball;
    });
    for (int j = lo; j < q.level; ++j)
      if (meets.count(key_of(j, clamped_index(cubes, q.center, j)))) {
        ++c.maximality;
        break;
      }
    const double size = q.size();
    if (d < 0.5 * (p.a - 2.0) * size || d > p.a * p.C1 / (p.c1 * p.delta) * size + 2.0 * eps) ++c.size_ratio;
  }
  for (const auto& c : per) {
    out.lower_distance += c.lower_distance;
    out.upper_distance += c.upper_distance;
    out.enlarged_ball += c.enlarged_ball;
    out.center_clearance += c.center_clearance;
    out.outer_ball += c.outer_ball;
    out.inner_ball += c.inner_ball;
    out.maximality += c.maximality;
    out.size_ratio += c.size_ratio;
  }
  return out;
}

void export_whitney_jsonl(std::ostream& out, const WhitneyDecomposition& decomp) {
  for (const auto& q : decomp.cubes()) {
    nlohmann::ordered_json j;
    j["level"] = q.level;
    j["center"] = q.center;
    j["inner_radius"] = q.inner_radius;
    j["outer_radius"] = q.outer_radius;
    j["dist_to_boundary"] = q.dist_to_boundary;
    j["members_count"] = q.members.size();
    out << j.dump() << '\n';
  }
}

}  // namespace bext
