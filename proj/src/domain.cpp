#include "bext/domain.hpp"

#include <cmath>
#include <limits>
#include <bit>
#include <random>
#include <unordered_map>

#include "bext/error.hpp"
#include "bext/kernels.hpp"

namespace bext {

CurveModel make_curve(const PointCloudSpace& space, std::vector<Id> vertices) {
  CurveModel c;
  c.vertices = std::move(vertices);
  c.arclen.assign(c.vertices.size(), 0.0);
  for (std::size_t i = 1; i < c.vertices.size(); ++i)
    c.arclen[i] = c.arclen[i - 1] + space.distance(c.vertices[i - 1], c.vertices[i]);
  c.t.assign(c.vertices.size(), 0.0);
  const double total = c.length();
  for (std::size_t i = 0; i < c.vertices.size(); ++i) c.t[i] = total > 0.0 ? c.arclen[i] / total : 0.0;
  if (!c.t.empty() && total > 0.0) c.t.back() = 1.0;
  return c;
}

CurveModel reparameterize_by_arclength(const PointCloudSpace& space, const CurveModel& curve) {
  if (curve.vertices.size() < 2) throw Error("degenerate-curve", "curve needs at least two vertices");
  CurveModel out = make_curve(space, curve.vertices);
  if (!(out.length() > 0.0)) throw Error("degenerate-curve", "curve has zero length");
  return out;
}

DomainModel::DomainModel(std::shared_ptr<const PointCloudSpace> space, std::vector<Id> interior,
                         std::vector<Id> boundary, Id center, double epsilon, double q, Options options)
    : space_(std::move(space)),
      interior_(std::move(interior)),
      boundary_(std::move(boundary)),
      center_(center),
      epsilon_(epsilon),
      q_(q),
      boundary_spacing_(options.boundary_spacing > 0.0 ? options.boundary_spacing : epsilon),
      boundary_dim_(options.boundary_dim),
      name_(std::move(options.name)) {
  if (!space_) throw Error("bad-domain", "no space");
  if (!(epsilon_ > 0.0) || !(q_ > 0.0)) throw Error("bad-parameter", "epsilon and q must be positive");
  const std::size_t n = space_->size();
  std::sort(interior_.begin(), interior_.end());
  std::sort(boundary_.begin(), boundary_.end());
  slot_.assign(n, -1);
  is_boundary_.assign(n, 0);
  for (std::size_t i = 0; i < interior_.size(); ++i) {
    const Id x = interior_[i];
    if (x < 0 || static_cast<std::size_t>(x) >= n) throw Error("bad-domain", "interior id out of range");
    if (slot_[x] >= 0) throw Error("bad-domain", "duplicate interior id");
    slot_[x] = static_cast<std::int32_t>(i);
  }
  for (Id b : boundary_) {
    if (b < 0 || static_cast<std::size_t>(b) >= n) throw Error("bad-domain", "boundary id out of range");
    if (slot_[b] >= 0) throw Error("bad-domain", "sample is both interior and boundary");
    is_boundary_[b] = 1;
  }
  if (!is_interior(center_)) throw Error("bad-domain", "center is not an interior sample");

  point_measure_ = std::pow(epsilon_, q_);
  boundary_point_measure_ = std::pow(boundary_spacing_, boundary_dim_);

  if (boundary_.empty()) {
    dbound_.assign(interior_.size(), std::numeric_limits<double>::infinity());
  } else {
    dbound_ = kernels::parallel::min_distances(*space_, interior_, boundary_);
    for (double d : dbound_)
      if (d < 0.5 * epsilon_) throw Error("bad-domain", "interior sample closer than epsilon/2 to the boundary");
  }

  interior_index_ = GridIndex(*space_, interior_, link_radius());
  boundary_index_ = GridIndex(*space_, boundary_, std::max(boundary_spacing_, epsilon_));

  const double link = link_radius();
  nbr_start_.assign(interior_.size() + 1, 0);
  std::vector<std::vector<Id>> rows(interior_.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(interior_.size()); ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    const Id x = interior_[static_cast<std::size_t>(i)];
    interior_index_.for_each_within(x, link, [&](Id y, double) {
      if (y != x) row.push_back(y);
    });
    std::sort(row.begin(), row.end());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) nbr_start_[i + 1] = nbr_start_[i] + rows[i].size();
  nbr_ids_.reserve(nbr_start_.back());
  for (auto& row : rows) nbr_ids_.insert(nbr_ids_.end(), row.begin(), row.end());
}

double DomainModel::dist_to_boundary(Id x) const {
  if (!is_interior(x)) throw Error("not-interior", "sample " + std::to_string(x) + " is not interior");
  return dbound_[static_cast<std::size_t>(slot_[x])];
}

std::span<const Id> DomainModel::neighbors(Id x) const {
  const auto s = static_cast<std::size_t>(slot(x));
  return {nbr_ids_.data() + nbr_start_[s], nbr_start_[s + 1] - nbr_start_[s]};
}

std::vector<Id> DomainModel::interior_near(Id x) const {
  std::vector<Id> out;
  interior_index_.for_each_within(x, link_radius(), [&](Id y, double) {
    if (y != x) out.push_back(y);
  });
  std::sort(out.begin(), out.end());
  return out;
}

bool DomainModel::connected() const {
  if (interior_.empty()) return true;
  std::vector<char> seen(interior_.size(), 0);
  std::vector<Id> stack{interior_.front()};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const Id x = stack.back();
    stack.pop_back();
    for (Id y : neighbors(x)) {
      auto& s = seen[static_cast<std::size_t>(slot_[y])];
      if (!s) {
        s = 1;
        ++count;
        stack.push_back(y);
      }
    }
  }
  return count == interior_.size();
}

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t popcount_and_not(const Bits& a, const Bits& covered) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < a.size(); ++w) n += static_cast<std::size_t>(std::popcount(a[w] & ~covered[w]));
  return n;
}

bool covers_all(const std::vector<const Bits*>& sets, std::size_t words, std::size_t members) {
  Bits u(words, 0);
  for (const Bits* s : sets)
    for (std::size_t w = 0; w < words; ++w) u[w] |= (*s)[w];
  std::size_t n = 0;
  for (auto v : u) n += static_cast<std::size_t>(std::popcount(v));
  return n == members;
}

}  // namespace

constexpr std::size_t kMaxCoverCandidates = 1024;

std::size_t doubling_cover_size(const GridIndex& index, Id x, double r) {
  std::vector<Id> members = index.within(x, r);
  if (members.size() <= 1) return members.size();
  std::unordered_map<Id, std::uint32_t> local;
  local.reserve(members.size() * 2);
  for (std::uint32_t i = 0; i < members.size(); ++i) local.emplace(members[i], i);

  const std::size_t words = (members.size() + 63) / 64;
  std::vector<Id> candidates = index.within(x, 1.5 * r);
  if (candidates.size() > kMaxCoverCandidates) {
    // Thin to an r/8-net: every member stays within r/8 of a kept center, so
    // a cover by radius r/2 balls still exists among them.
    const auto& space = index.space();
    std::vector<Id> net;
    for (Id c : candidates) {
      bool far = true;
      for (Id n : net)
        if (space.distance(c, n) <= 0.125 * r) {
          far = false;
          break;
        }
      if (far) net.push_back(c);
    }
    if (!std::binary_search(net.begin(), net.end(), x)) net.insert(std::lower_bound(net.begin(), net.end(), x), x);
    candidates = std::move(net);
  }
  std::vector<Bits> sets(candidates.size(), Bits(words, 0));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    index.for_each_within(candidates[c], 0.5 * r, [&](Id y, double) {
      auto it = local.find(y);
      if (it != local.end()) sets[c][it->second / 64] |= std::uint64_t{1} << (it->second % 64);
    });
  }

  // Greedy max coverage (ties to the lowest candidate id) from a forced
  // start, followed by local improvement.
  auto solve = [&](std::vector<std::size_t> chosen) {
  Bits covered(words, 0);
  std::size_t remaining = members.size();
  for (auto c : chosen) {
    remaining -= popcount_and_not(sets[c], covered);
    for (std::size_t w = 0; w < words; ++w) covered[w] |= sets[c][w];
  }
  while (remaining > 0) {
    std::size_t best = 0, gain = 0;
    for (std::size_t c = 0; c < sets.size(); ++c) {
      const std::size_t g = popcount_and_not(sets[c], covered);
      if (g > gain) {
        gain = g;
        best = c;
      }
    }
    if (gain == 0) break;
    chosen.push_back(best);
    for (std::size_t w = 0; w < words; ++w) covered[w] |= sets[best][w];
    remaining -= gain;
  }

  // Local improvement: drop redundant balls, then replace any two by one.
  auto others = [&](std::size_t skip_a, std::size_t skip_b) {
    std::vector<const Bits*> out;
    for (std::size_t i = 0; i < chosen.size(); ++i)
      if (i != skip_a && i != skip_b) out.push_back(&sets[chosen[i]]);
    return out;
  };
  const std::size_t none = static_cast<std::size_t>(-1);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < chosen.size() && !changed; ++i) {
      if (covers_all(others(i, none), words, members.size())) {
        chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
      }
    }
    for (std::size_t i = 0; i < chosen.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < chosen.size() && !changed; ++j) {
        Bits need(words, 0);
        for (const Bits* s : others(i, j))
          for (std::size_t w = 0; w < words; ++w) need[w] |= (*s)[w];
        for (std::size_t w = 0; w < words; ++w) need[w] = ~need[w];
        if (members.size() % 64) need.back() &= (std::uint64_t{1} << (members.size() % 64)) - 1;
        for (std::size_t c = 0; c < sets.size(); ++c) {
          bool ok = true;
          for (std::size_t w = 0; w < words && ok; ++w) ok = (need[w] & ~sets[c][w]) == 0;
          if (ok) {
            chosen.erase(chosen.begin() + static_cast<std::ptrdiff_t>(j));
            chosen[i] = c;
            changed = true;
            break;
          }
        }
      }
  }
  return chosen.size();
  };
  std::size_t best = solve({});
  const auto self = std::lower_bound(candidates.begin(), candidates.end(), x) - candidates.begin();
  best = std::min(best, solve({static_cast<std::size_t>(self)}));
  return best;
}

std::size_t estimate_doubling(const PointCloudSpace& space, std::size_t trials, std::uint64_t seed) {
  if (space.empty()) throw Error("empty-space", "doubling estimate needs at least one sample");
  if (space.size() == 1) return 1;
  std::vector<Id> all(space.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Id>(i);
  const double diam = space.diameter();
  GridIndex index(space, all, diam / std::sqrt(static_cast<double>(all.size())));

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Id> pick(0, static_cast<Id>(space.size() - 1));
  std::vector<std::pair<Id, double>> jobs;
  for (std::size_t t = 0; t < trials; ++t) {
    const Id x = pick(rng);
    double nearest = std::numeric_limits<double>::infinity();
    for (Id y : all)
      if (y != x) nearest = std::min(nearest, space.distance(x, y));
    const int levels = std::max(1, static_cast<int>(std::ceil(std::log2(diam / std::max(nearest, 1e-300)))) + 1);
    std::uniform_int_distribution<int> level(0, levels);
    jobs.emplace_back(x, diam * std::ldexp(1.0, -level(rng)));
  }
  std::vector<std::size_t> sizes(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(jobs.size()); ++j) {
    const auto& [x, r] = jobs[static_cast<std::size_t>(j)];
    sizes[static_cast<std::size_t>(j)] = doubling_cover_size(index, x, r);
  }
  std::size_t best = 1;
  for (auto s : sizes) best = std::max(best, s);
  return best;
}

AhlforsProfile estimate_ahlfors(const DomainModel& domain, std::vector<double> radii, std::uint64_t seed,
                                std::size_t centers) {
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  if (radii.size() < 2) throw Error("need-2-radii", "need at least two distinct radii");
  for (double r : radii)
    if (r < 4.0 * domain.epsilon()) throw Error("sub-resolution", "radius below 4 epsilon");
  if (domain.interior().empty()) throw Error("empty-space", "domain has no interior samples");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, domain.interior().size() - 1);
  std::vector<Id> xs(centers);
  for (auto& x : xs) x = domain.interior()[pick(rng)];

  // The exponent is fitted on balls that stay inside the domain at every
  // tested radius when there are enough of them; clipping by the boundary
  // only changes the constant. C_q is taken over every tested ball.
  std::size_t deep = 0;
  for (Id x : xs) deep += domain.dist_to_boundary(x) >= radii.back() ? 1 : 0;
  const bool deep_only = deep >= 8;

  std::vector<double> lr, lm;
  AhlforsProfile p;
  p.q = domain.q();
  p.r_min = radii.front();
  p.r_max = radii.back();
  double c = 1.0;
  for (double r : radii) {
    const auto counts = kernels::parallel::ball_counts(domain.interior_index(), xs, r);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double nu = static_cast<double>(counts[i]) * domain.point_measure();
      const double rq = std::pow(r, p.q);
      c = std::max({c, nu / rq, rq / nu});
      if (deep_only && domain.dist_to_boundary(xs[i]) < radii.back()) continue;
      lr.push_back(std::log(r));
      lm.push_back(std::log(nu));
    }
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    mx += lr[i];
    my += lm[i];
  }
  mx /= static_cast<double>(lr.size());
  my /= static_cast<double>(lr.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    sxy += (lr[i] - mx) * (lm[i] - my);
    sxx += (lr[i] - mx) * (lr[i] - mx);
  }
  p.fitted_q = sxy / sxx;
  p.c_q = c;
  p.balls = xs.size() * radii.size();
  return p;
}

}  // namespace bext
