#include "bext/john.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>

#include <json.hpp>

#include "bext/error.hpp"

namespace bext {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Search {
  std::vector<double> len;         // by interior slot
  std::vector<std::int32_t> prev;  // slot, -1 when reached from the source
};

// Label-setting search from `source` with running length starting at
// `start_len`. A vertex is entered only when admit(slot, L) holds and
// L <= cap. Stops once `target` (a slot, or -1) is settled.
template <class Admit>
Search constrained_search(const DomainModel& domain, Id source, double start_len, double cap, Admit&& admit,
                          std::int32_t target) {
  const std::size_t n = domain.interior().size();
  Search s{std::vector<double>(n, kInf), std::vector<std::int32_t>(n, -2)};
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto relax = [&](std::int32_t slot, double L, std::int32_t from) {
    if (L > cap || !(L < s.len[static_cast<std::size_t>(slot)]) || !admit(slot, L)) return;
    s.len[static_cast<std::size_t>(slot)] = L;
    s.prev[static_cast<std::size_t>(slot)] = from;
    heap.emplace(L, slot);
  };
  const auto& space = domain.space();
  if (domain.is_interior(source)) {
    relax(domain.slot(source), start_len, -1);
  } else {
    for (Id y : domain.interior_near(source)) relax(domain.slot(y), start_len + space.distance(source, y), -1);
  }
  const auto& ids = domain.interior();
  while (!heap.empty()) {
    const auto [L, u] = heap.top();
    heap.pop();
    if (L > s.len[static_cast<std::size_t>(u)]) continue;
    if (u == target) break;
    const Id x = ids[static_cast<std::size_t>(u)];
    for (Id y : domain.neighbors(x)) relax(domain.slot(y), L + space.distance(x, y), u);
  }
  return s;
}

std::vector<Id> trace_back(const DomainModel& domain, const Search& s, Id source, std::int32_t target) {
  std::vector<Id> path;
  for (std::int32_t u = target; u != -1; u = s.prev[static_cast<std::size_t>(u)])
    path.push_back(domain.interior()[static_cast<std::size_t>(u)]);
  if (!domain.is_interior(source)) path.push_back(source);
  std::reverse(path.begin(), path.end());
  return path;
}

double clearance(const DomainModel& domain, Id v) {
  if (domain.is_boundary(v)) return 0.0;
  if (!domain.is_interior(v)) throw Error("bad-curve", "vertex " + std::to_string(v) + " is not a domain sample");
  return domain.dist_to_boundary(v);
}

void check_source(const DomainModel& domain, Id start) {
  if (!domain.is_interior(start) && !domain.is_boundary(start))
    throw Error("bad-curve", "start " + std::to_string(start) + " is not a domain sample");
}

}  // namespace

JohnProfile JohnProfile::from_table(std::vector<double> t, std::vector<double> phi, double c) {
  if (t.size() != phi.size() || t.size() < 2 || t.front() != 0.0 || phi.front() != 0.0)
    throw Error("bad-profile", "table must start at (0, 0) and have at least two nodes");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]) || phi[i] < phi[i - 1]) throw Error("bad-profile", "table must be increasing");
  JohnProfile p;
  p.table_t = std::move(t);
  p.table_phi = std::move(phi);
  p.c = c;
  return p;
}

double JohnProfile::phi(double t) const {
  if (t <= 0.0) return 0.0;
  if (table_t.empty()) return scale * std::pow(t, exponent);
  auto it = std::upper_bound(table_t.begin(), table_t.end(), t);
  std::size_t i = static_cast<std::size_t>(it - table_t.begin());
  if (i >= table_t.size()) i = table_t.size() - 1;
  const double t0 = table_t[i - 1], t1 = table_t[i];
  const double p0 = table_phi[i - 1], p1 = table_phi[i];
  return p0 + (p1 - p0) * (t - t0) / (t1 - t0);
}

std::string JohnProfile::formula() const {
  std::ostringstream s;
  s.precision(17);
  if (!table_t.empty()) {
    s << "table(" << table_t.size() << " nodes)";
  } else if (exponent == 1.0) {
    s << scale << "*t";
  } else {
    s << scale << "*t^" << exponent;
  }
  s << ", c=" << c;
  return s.str();
}

bool validate_profile(const JohnProfile& profile, double t_max, std::size_t samples) {
  if (profile.phi(0.0) != 0.0 || !(profile.c >= 1.0)) return false;
  double prev = 0.0;
  for (std::size_t i = 1; i <= samples; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(samples);
    const double v = profile.phi(t);
    if (!(v > prev) || v < t * (1.0 - 1e-12)) return false;
    prev = v;
  }
  return true;
}

JohnCertificate verify_john_curve(const DomainModel& domain, const CurveModel& curve, const JohnProfile& profile) {
  if (curve.vertices.empty() || curve.vertices.back() != domain.center())
    throw Error("not-anchored", "curve does not end at the center");
  if (curve.arclen.size() != curve.vertices.size()) throw Error("bad-curve", "arc length table has wrong size");
  JohnCertificate cert;
  cert.curve = curve;
  cert.margin = kInf;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double m = profile.phi(profile.c * clearance(domain, curve.vertices[i])) - curve.arclen[i];
    if (m < cert.margin) {
      cert.margin = m;
      cert.worst = i;
    }
  }
  cert.pass = cert.margin >= -2.0 * domain.epsilon();
  return cert;
}

CurveModel construct_john_curve(const DomainModel& domain, Id start, const JohnProfile& profile) {
  check_source(domain, start);
  const double slack = 2.0 * domain.epsilon();
  const auto& dist = domain.boundary_distances();
  auto admit = [&](std::int32_t u, double L) {
    return L <= profile.phi(profile.c * dist[static_cast<std::size_t>(u)]) + slack;
  };
  const std::int32_t target = domain.slot(domain.center());
  const Search s = constrained_search(domain, start, 0.0, kInf, admit, target);
  if (s.len[static_cast<std::size_t>(target)] == kInf)
    throw Error("no-john-curve", "no admissible curve from sample " + std::to_string(start));
  return make_curve(domain.space(), trace_back(domain, s, start, target));
}

CurveModel construct_john_curve(const DomainModel& domain, Id start, Id waypoint, const JohnProfile& profile) {
  check_source(domain, start);
  if (!domain.is_interior(waypoint)) throw Error("not-interior", "waypoint is not interior");
  const double slack = 2.0 * domain.epsilon();
  const auto& dist = domain.boundary_distances();
  auto admit = [&](std::int32_t u, double L) {
    return L <= profile.phi(profile.c * dist[static_cast<std::size_t>(u)]) + slack;
  };
  const std::int32_t mid = domain.slot(waypoint);
  const Search first = constrained_search(domain, start, 0.0, kInf, admit, mid);
  if (first.len[static_cast<std::size_t>(mid)] == kInf)
    throw Error("no-john-curve", "no admissible curve to the waypoint");
  const std::int32_t target = domain.slot(domain.center());
  const Search second =
      constrained_search(domain, waypoint, first.len[static_cast<std::size_t>(mid)], kInf, admit, target);
  if (second.len[static_cast<std::size_t>(target)] == kInf)
    throw Error("no-john-curve", "no admissible curve from the waypoint");
  auto path = trace_back(domain, first, start, mid);
  const auto rest = trace_back(domain, second, waypoint, target);
  path.insert(path.end(), rest.begin() + 1, rest.end());
  return make_curve(domain.space(), std::move(path));
}

QuasihyperbolicResult quasihyperbolic_distance(const DomainModel& domain, Id x, Id y) {
  if (!domain.is_interior(x) || !domain.is_interior(y)) throw Error("not-interior", "endpoints must be interior");
  if (x == y) return {0.0, {x}};
  // Always search from the smaller id so swapped arguments give identical sums.
  const Id a = std::min(x, y), b = std::max(x, y);
  const auto& ids = domain.interior();
  const auto& dist = domain.boundary_distances();
  const auto& space = domain.space();
  const std::size_t n = ids.size();
  std::vector<double> k(n, kInf);
  std::vector<std::int32_t> prev(n, -1);
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  const std::int32_t sa = domain.slot(a), sb = domain.slot(b);
  k[static_cast<std::size_t>(sa)] = 0.0;
  heap.emplace(0.0, sa);
  while (!heap.empty()) {
    const auto [v, u] = heap.top();
    heap.pop();
    if (v > k[static_cast<std::size_t>(u)]) continue;
    if (u == sb) break;
    const Id p = ids[static_cast<std::size_t>(u)];
    for (Id q : domain.neighbors(p)) {
      const std::int32_t w = domain.slot(q);
      const double step =
          space.distance(p, q) / std::min(dist[static_cast<std::size_t>(u)], dist[static_cast<std::size_t>(w)]);
      if (v + step < k[static_cast<std::size_t>(w)]) {
        k[static_cast<std::size_t>(w)] = v + step;
        prev[static_cast<std::size_t>(w)] = u;
        heap.emplace(v + step, w);
      }
    }
  }
  if (k[static_cast<std::size_t>(sb)] == kInf) throw Error("no-path", "endpoints are not connected");
  QuasihyperbolicResult r;
  r.value = k[static_cast<std::size_t>(sb)];
  for (std::int32_t u = sb; u != -1; u = prev[static_cast<std::size_t>(u)]) r.path.push_back(ids[static_cast<std::size_t>(u)]);
  if (x == a) std::reverse(r.path.begin(), r.path.end());
  return r;
}

double quasihyperbolic_bound(double C, const QuasihyperbolicSample& s) {
  return C * std::max(0.0, std::log(C * s.distance / s.min_clearance)) + 2.0;
}

double fit_quasihyperbolic_constant(const std::vector<QuasihyperbolicSample>& samples) {
  double best = 1.0;
  for (const auto& s : samples) {
    if (quasihyperbolic_bound(best, s) >= s.k) continue;
    double lo = best, hi = 2.0 * best;
    while (quasihyperbolic_bound(hi, s) < s.k) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (quasihyperbolic_bound(mid, s) >= s.k ? hi : lo) = mid;
    }
    best = hi;
  }
  return best;
}

UniformReport check_uniform(const DomainModel& domain, double c, const std::vector<std::pair<Id, Id>>& pairs) {
  UniformReport rep;
  rep.c = c;
  rep.pairs.resize(pairs.size());
  const double slack = 2.0 * domain.epsilon();
  const auto& dist = domain.boundary_distances();
  const auto& ids = domain.interior();
  const auto& space = domain.space();
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs.size()); ++i) {
    const auto [x1, x2] = pairs[static_cast<std::size_t>(i)];
    UniformPair& out = rep.pairs[static_cast<std::size_t>(i)];
    out.x1 = x1;
    out.x2 = x2;
    if (!domain.is_interior(x1) || !domain.is_interior(x2)) {
      out.best_length = kInf;
      continue;
    }
    out.distance = space.distance(x1, x2);
    if (x1 == x2) {
      out.pass = true;
      continue;
    }
    const double cap = c * out.distance + slack;
    auto admit = [&](std::int32_t u, double L) { return L <= c * dist[static_cast<std::size_t>(u)] + slack; };
    const Search fw = constrained_search(domain, x1, 0.0, cap, admit, -1);
    const Search bw = constrained_search(domain, x2, 0.0, cap, admit, -1);
    double best = kInf;
    for (std::size_t u = 0; u < ids.size(); ++u) {
      if (fw.len[u] == kInf) continue;
      best = std::min(best, fw.len[u] + bw.len[u]);
      for (Id y : domain.neighbors(ids[u])) {
        const auto v = static_cast<std::size_t>(domain.slot(y));
        if (bw.len[v] < kInf) best = std::min(best, fw.len[u] + space.distance(ids[u], y) + bw.len[v]);
      }
    }
    out.best_length = best;
    out.pass = best <= cap;
  }
  for (const auto& p : rep.pairs) {
    if (p.pass) {
      ++rep.passed;
    } else {
      rep.witnesses.push_back(p);
    }
  }
  rep.pass_fraction = pairs.empty() ? 1.0 : static_cast<double>(rep.passed) / static_cast<double>(pairs.size());
  std::stable_sort(rep.witnesses.begin(), rep.witnesses.end(), [](const UniformPair& a, const UniformPair& b) {
    return a.best_length / a.distance > b.best_length / b.distance;
  });
  if (rep.witnesses.size() > 8) rep.witnesses.resize(8);
  return rep;
}

std::vector<std::pair<Id, Id>> random_pairs(const DomainModel& domain, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, domain.interior().size() - 1);
  std::vector<std::pair<Id, Id>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Id a = domain.interior()[pick(rng)];
    const Id b = domain.interior()[pick(rng)];
    out.emplace_back(a, b);
  }
  return out;
}

void write_curve_json(std::ostream& out, const CurveModel& curve) {
  nlohmann::ordered_json j;
  j["vertices"] = curve.vertices;
  j["t"] = curve.t;
  j["arclen"] = curve.arclen;
  out << j.dump() << '\n';
}

CurveModel read_curve_json(std::istream& in) {
  try {
    const auto j = nlohmann::json::parse(in);
    CurveModel c;
    c.vertices = j.at("vertices").get<std::vector<Id>>();
    c.t = j.at("t").get<std::vector<double>>();
    c.arclen = j.at("arclen").get<std::vector<double>>();
    if (c.t.size() != c.vertices.size() || c.arclen.size() != c.vertices.size())
      throw Error("bad-curve", "field lengths differ");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-curve", e.what());
  }
}

}  // namespace bext
