#include "bext/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_set>

#include "bext/error.hpp"

namespace bext {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_gap(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Diameter of a set of space samples; hull-based for planar coordinates.
double sample_diameter(const DomainModel& domain, const kernels::ImageTable* coords, std::span<const Id> ids) {
  if (coords) return image_diameter(*coords, ids);
  return domain.space().diameter(ids);
}

std::unique_ptr<kernels::ImageTable> coordinate_table(const DomainModel& domain) {
  if (!domain.space().euclidean()) return nullptr;
  return std::make_unique<kernels::ImageTable>(kernels::ImageTable{domain.space().coordinates(), domain.space().dim()});
}

double level_scale(const WhitneyParams& p, int k) { return std::pow(p.delta, k); }

// First interior vertex of a curve that starts on the boundary.
Id first_interior(const DomainModel& domain, const CurveModel& curve) {
  for (Id v : curve.vertices)
    if (domain.is_interior(v)) return v;
  throw Error("bad-curve", "curve has no interior vertex");
}

void certify(const DomainModel& domain, const JohnProfile& profile, Id xi, const CurveModel& curve) {
  if (curve.vertices.empty() || curve.vertices.front() != xi)
    throw Error("uncertified-curve", "curve does not start at boundary sample " + std::to_string(xi));
  JohnCertificate cert;
  try {
    cert = verify_john_curve(domain, curve, profile);
  } catch (const Error& e) {
    throw Error("uncertified-curve", e.what());
  }
  if (!cert.pass)
    throw Error("uncertified-curve", "curve from " + std::to_string(xi) + " has margin " + std::to_string(cert.margin));
}

}  // namespace

CurveFamily construct_curve_family(const DomainModel& domain, const JohnProfile& profile, std::size_t stride,
                                   std::vector<Id>* missing) {
  if (stride == 0) stride = 1;
  std::vector<Id> sources;
  for (std::size_t i = 0; i < domain.boundary().size(); i += stride) sources.push_back(domain.boundary()[i]);
  std::vector<CurveModel> built(sources.size());
  std::vector<char> ok(sources.size(), 0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sources.size()); ++i) {
    try {
      built[static_cast<std::size_t>(i)] = construct_john_curve(domain, sources[static_cast<std::size_t>(i)], profile);
      ok[static_cast<std::size_t>(i)] = 1;
    } catch (const Error&) {
    }
  }
  CurveFamily out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (ok[i]) {
      out.emplace(sources[i], std::move(built[i]));
    } else if (missing) {
      missing->push_back(sources[i]);
    }
  }
  return out;
}

ShadowMap compute_shadows(const WhitneyDecomposition& decomp, const DomainModel& domain, const JohnProfile& profile,
                          const CurveFamily& curves) {
  const WhitneyParams& p = decomp.params();
  ShadowMap m;
  m.c = profile.c;
  m.b = p.a * p.C1 / (p.c1 * p.delta);
  m.C = profile.c * (m.b + 1.0) + 1.0;
  m.b_formula = "b = a C1 / (c1 delta)";
  m.C_formula = "C = c (b + 1) + 1";
  m.shadow.resize(decomp.size());
  for (const auto& [xi, curve] : curves) {
    certify(domain, profile, xi, curve);
    std::vector<std::pair<int, std::size_t>> hits;
    std::unordered_set<int> seen;
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const Id v = curve.vertices[i];
      if (!domain.is_interior(v)) continue;
      const int q = decomp.cube_of_unchecked(v);
      if (seen.insert(q).second) hits.emplace_back(q, i);
    }
    std::sort(hits.begin(), hits.end());
    for (const auto& h : hits) m.shadow[static_cast<std::size_t>(h.first)].push_back(xi);
    m.sources.push_back(xi);
    m.hits.push_back(std::move(hits));
  }
  return m;
}

ShadowDiameterReport check_shadow_diameters(const ShadowMap& shadows, const WhitneyDecomposition& decomp,
                                            const DomainModel& domain, const JohnProfile& profile) {
  const auto coords = coordinate_table(domain);
  const std::size_t n = decomp.size();
  std::vector<double> ratio(n, -1.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const auto& s = shadows.shadow[static_cast<std::size_t>(i)];
    if (s.empty()) continue;
    const double diam = sample_diameter(domain, coords.get(), s);
    const double bound = 3.0 * profile.phi(shadows.C * decomp.cube(static_cast<int>(i)).size()) + 4.0 * domain.epsilon();
    ratio[static_cast<std::size_t>(i)] = diam / bound;
  }
  ShadowDiameterReport r;
  for (std::size_t i = 0; i < n; ++i) {
    if (ratio[i] < 0.0) continue;
    ++r.cubes;
    if (ratio[i] > 1.0) ++r.violations;
    if (ratio[i] > r.worst_ratio) {
      r.worst_ratio = ratio[i];
      r.worst_cube = static_cast<int>(i);
    }
  }
  return r;
}

std::vector<LevelRow> shadow_level_counts(const ShadowMap& shadows, const WhitneyDecomposition& decomp, Id xi,
                                          const AhlforsProfile& ahlfors, const JohnProfile& profile) {
  const WhitneyParams& p = decomp.params();
  std::vector<LevelRow> rows;
  for (int k = decomp.min_level(); k <= decomp.max_level() && decomp.size() > 0; ++k) {
    const double dk = level_scale(p, k);
    const double base = 2.0 * profile.phi(2.0 * shadows.C * p.C1 * dk) / (p.c1 * dk);
    rows.push_back({k, 0.0, ahlfors.c_q * ahlfors.c_q * std::pow(base, ahlfors.q)});
  }
  const auto it = std::lower_bound(shadows.sources.begin(), shadows.sources.end(), xi);
  if (it == shadows.sources.end() || *it != xi) return rows;
  for (const auto& h : shadows.hits[static_cast<std::size_t>(it - shadows.sources.begin())])
    rows[static_cast<std::size_t>(decomp.cube(h.first).level - decomp.min_level())].lhs += 1.0;
  return rows;
}

std::vector<LevelRow> shadow_measure_sums(const ShadowMap& shadows, const WhitneyDecomposition& decomp,
                                          const DomainModel& domain, const std::vector<Id>& E,
                                          const AhlforsProfile& ahlfors, const JohnProfile& profile) {
  const WhitneyParams& p = decomp.params();
  const double mu = domain.boundary_point_measure();
  std::vector<Id> e(E);
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  const double mu_e = mu * static_cast<double>(e.size());
  std::vector<LevelRow> rows;
  for (int k = decomp.min_level(); k <= decomp.max_level() && decomp.size() > 0; ++k) {
    const double dk = level_scale(p, k);
    const double base = 2.0 * profile.phi(shadows.C * p.C1 * dk) / (p.c1 * dk);
    rows.push_back({k, 0.0, ahlfors.c_q * ahlfors.c_q * std::pow(base, ahlfors.q) * mu_e});
  }
  // sum_Q mu(S_E(Q)) = mu * sum over xi in E of the cubes its curve meets.
  std::vector<std::size_t> counts(rows.size(), 0);
  for (std::size_t s = 0; s < shadows.sources.size(); ++s) {
    if (!std::binary_search(e.begin(), e.end(), shadows.sources[s])) continue;
    for (const auto& h : shadows.hits[s]) ++counts[static_cast<std::size_t>(decomp.cube(h.first).level - decomp.min_level())];
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].lhs = mu * static_cast<double>(counts[i]);
  return rows;
}

namespace {

void fill_cube_diameters(CubeDiameters& out, const MappingModel& f, const WhitneyDecomposition& decomp,
                         const DomainModel& domain, int i) {
  const auto& q = decomp.cube(i);
  const auto at = static_cast<std::size_t>(i);
  out.members[at] = image_diameter(f.image, q.members);
  out.outer[at] = image_diameter(f.image, domain.interior_index().within(q.center, q.outer_radius));
  std::vector<Id> closure(q.members);
  for (Id m : q.members) {
    const auto nb = domain.neighbors(m);
    closure.insert(closure.end(), nb.begin(), nb.end());
  }
  std::sort(closure.begin(), closure.end());
  closure.erase(std::unique(closure.begin(), closure.end()), closure.end());
  out.closure[at] = image_diameter(f.image, closure);
}

std::vector<int> cubes_met(const WhitneyDecomposition& decomp, const CurveModel& curve) {
  std::vector<int> order;
  std::unordered_set<int> seen;
  for (Id v : curve.vertices) {
    if (v < 0) continue;
    const int q = decomp.cube_of_unchecked(v) ;
    if (q >= 0 && seen.insert(q).second) order.push_back(q);
  }
  return order;
}

}  // namespace

CubeDiameters cube_image_diameters(const MappingModel& f, const WhitneyDecomposition& decomp,
                                   const DomainModel& domain) {
  const std::size_t n = decomp.size();
  CubeDiameters out{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
    fill_cube_diameters(out, f, decomp, domain, static_cast<int>(i));
  return out;
}

DiscreteLengthReport discrete_length(const CubeDiameters& diams, const WhitneyDecomposition& decomp,
                                     const CurveModel& curve) {
  DiscreteLengthReport r;
  r.cubes = cubes_met(decomp, curve);
  std::map<int, LevelSum> levels;
  for (int q : r.cubes) {
    auto& row = levels[decomp.cube(q).level];
    row.level = decomp.cube(q).level;
    ++row.cubes;
    row.members += diams.members[static_cast<std::size_t>(q)];
    row.outer += diams.outer[static_cast<std::size_t>(q)];
    row.closure += diams.closure[static_cast<std::size_t>(q)];
  }
  for (const auto& [k, row] : levels) {
    r.levels.push_back(row);
    r.total += row.members;
    r.total_outer += row.outer;
    r.total_closure += row.closure;
  }
  return r;
}

DiscreteLengthReport discrete_length(const MappingModel& f, const WhitneyDecomposition& decomp,
                                     const DomainModel& domain, const CurveModel& curve) {
  CubeDiameters diams{std::vector<double>(decomp.size()), std::vector<double>(decomp.size()),
                      std::vector<double>(decomp.size())};
  for (int q : cubes_met(decomp, curve)) fill_cube_diameters(diams, f, decomp, domain, q);
  return discrete_length(diams, decomp, curve);
}

BoundaryLimit boundary_limit(const MappingModel& f, const DiscreteLengthReport& length, const CurveModel& curve,
                             const DomainModel& domain, double tol) {
  BoundaryLimit out;
  out.vertex = first_interior(domain, curve);
  const auto v = f.value(out.vertex);
  out.value.assign(v.begin(), v.end());
  if (length.levels.empty()) {
    out.converged = true;
    return out;
  }
  std::vector<double> tail(length.levels.size() + 1, 0.0);
  for (std::size_t i = length.levels.size(); i-- > 0;) tail[i] = tail[i + 1] + length.levels[i].closure;
  out.stuck_level = length.levels.back().level;
  out.final_tail = tail[length.levels.size() - 1];
  for (std::size_t i = 0; i < length.levels.size(); ++i) {
    if (tail[i] < tol) {
      out.converged = true;
      out.level = length.levels[i].level;
      out.error_radius = tail[i];
      return out;
    }
  }
  return out;
}

const char* class_name(ClassTag tag) { return tag == ClassTag::kA1 ? "A1" : "A2"; }

ClassEstimate estimate_class_constant(const MappingModel& f, const DomainModel& domain, const std::vector<double>& alpha,
                                      double sigma, ClassTag tag, const std::vector<std::pair<Id, double>>& balls) {
  if (!(sigma >= 1.0)) throw Error("bad-parameter", "sigma must be at least 1");
  if (alpha.size() != domain.interior().size()) throw Error("bad-parameter", "alpha must cover the interior");
  ClassEstimate est;
  est.tag = tag;
  est.sigma = sigma;
  const double q = domain.q();
  const double slack = 2.0 * domain.epsilon();
  std::vector<BallRow> rows(balls.size());
  std::vector<char> used(balls.size(), 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(balls.size()); ++i) {
    const auto [x, r] = balls[static_cast<std::size_t>(i)];
    if (!domain.is_interior(x) || domain.dist_to_boundary(x) <= sigma * r + slack) continue;
    if (tag == ClassTag::kA2 && 2.0 * r >= 1.0) continue;
    BallRow row;
    row.center = x;
    row.r = r;
    row.image_diameter = image_diameter(f.image, domain.interior_index().within(x, r));
    double integral = 0.0;
    for (Id y : domain.interior_index().within(x, sigma * r)) integral += alpha[static_cast<std::size_t>(domain.slot(y))];
    row.integral = integral * domain.point_measure();
    row.log_factor = tag == ClassTag::kA2 ? std::pow(std::log(1.0 / (2.0 * r)), 1.0 / q) : 1.0;
    const double denom = std::pow(row.integral, 1.0 / q) * row.log_factor;
    row.ratio = denom > 0.0 ? row.image_diameter / denom : (row.image_diameter > 0.0 ? kInf : 0.0);
    rows[static_cast<std::size_t>(i)] = row;
    used[static_cast<std::size_t>(i)] = 1;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!used[i]) {
      ++est.skipped;
      continue;
    }
    ++est.tested;
    est.C = std::max(est.C, rows[i].ratio);
    est.rows.push_back(rows[i]);
  }
  if (est.tested == 0) throw Error("no-admissible-balls", "every ball violates sigma B inside the domain");
  return est;
}

std::vector<std::pair<Id, double>> random_balls(const DomainModel& domain, std::size_t count,
                                                const std::vector<double>& radii, std::uint64_t seed) {
  if (radii.empty()) throw Error("bad-parameter", "no radii given");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, domain.interior().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_r(0, radii.size() - 1);
  std::vector<std::pair<Id, double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Id x = domain.interior()[pick(rng)];
    out.emplace_back(x, radii[pick_r(rng)]);
  }
  return out;
}

std::vector<std::pair<Id, double>> curve_lengths(const CubeDiameters& diams, const WhitneyDecomposition& decomp,
                                                 const CurveFamily& curves) {
  std::vector<std::pair<Id, double>> out;
  for (const auto& [xi, curve] : curves) out.emplace_back(xi, discrete_length(diams, decomp, curve).total_closure);
  return out;
}

std::vector<ExceptionalReport> exceptional_content(const std::vector<std::pair<Id, double>>& lengths,
                                                   const DomainModel& domain, const GaugeFunction& h,
                                                   std::vector<double> thresholds) {
  std::sort(thresholds.begin(), thresholds.end());
  const auto coords = coordinate_table(domain);
  const auto& space = domain.space();
  const double floor_diam = domain.boundary_spacing();
  std::vector<std::pair<Id, double>> sorted(lengths);
  std::sort(sorted.begin(), sorted.end());
  std::vector<ExceptionalReport> out;
  double carried = kInf, carried_scale = 0.0;
  for (double k : thresholds) {
    ExceptionalReport rep;
    rep.threshold = k;
    rep.note = "A_k is taken over the constructed curve family only (one curve per boundary sample), "
               "so E_f is under-approximated";
    for (const auto& [xi, l] : sorted)
      if (l >= k) rep.ids.push_back(xi);
    double best = rep.ids.empty() ? 0.0 : kInf, best_scale = 0.0;
    if (!rep.ids.empty()) {
      const double whole = sample_diameter(domain, coords.get(), rep.ids);
      for (double r = floor_diam;; r *= 2.0) {
        std::vector<char> covered(rep.ids.size(), 0);
        double sum = 0.0;
        for (std::size_t i = 0; i < rep.ids.size(); ++i) {
          if (covered[i]) continue;
          std::vector<Id> set;
          for (std::size_t j = i; j < rep.ids.size(); ++j)
            if (!covered[j] && space.distance(rep.ids[i], rep.ids[j]) <= r) {
              covered[j] = 1;
              set.push_back(rep.ids[j]);
            }
          sum += h.value(std::max(sample_diameter(domain, coords.get(), set), floor_diam));
        }
        if (sum < best) {
          best = sum;
          best_scale = r;
        }
        if (r >= whole) break;
      }
    }
    if (best < carried) {
      carried = best;
      carried_scale = best_scale;
    }
    rep.content = carried;
    rep.scale = carried_scale;
    out.push_back(std::move(rep));
  }
  return out;
}

UniquenessReport uniqueness_check(const MappingModel& f, const DomainModel& domain, const WhitneyDecomposition& decomp,
                                  Id xi, const CurveModel& gamma, const CurveModel& eta,
                                  const std::vector<double>& scales, const UniquenessOptions& options) {
  const JohnProfile profile = JohnProfile::identity(options.c);
  certify(domain, profile, xi, gamma);
  certify(domain, profile, xi, eta);
  const double eps = domain.epsilon();
  const double q = domain.q();
  UniquenessReport rep;

  auto at_length = [&](const CurveModel& c, double s) {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c.arclen[i] >= s && domain.is_interior(c.vertices[i])) return c.vertices[i];
    return c.vertices.back();
  };
  auto in_ball = [&](Id y, int cube) {
    const auto& Q = decomp.cube(cube);
    return domain.space().distance(y, Q.center) < options.sigma * Q.outer_radius;
  };

  for (double s : scales) {
    UniquenessScale row;
    row.s = s;
    row.y1 = at_length(gamma, s);
    row.y2 = at_length(eta, s);
    row.clearance_ok = options.c * domain.dist_to_boundary(row.y1) >= s - 2.0 * eps &&
                       options.c * domain.dist_to_boundary(row.y2) >= s - 2.0 * eps;
    row.chain = cube_chain(decomp, row.y1, row.y2);
    std::vector<Id> pts{row.y1};
    for (std::size_t i = 1; i + 1 < row.chain.size(); ++i) pts.push_back(decomp.cube(row.chain[i]).center);
    if (row.chain.size() > 1) pts.push_back(row.y2);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      row.chain_estimate += point_gap(f.value(pts[i]), f.value(pts[i + 1]));
      if (!in_ball(pts[i + 1], row.chain[i]) && !in_ball(pts[i], row.chain[i + 1])) ++row.ball_misses;
    }
    for (int c : row.chain) {
      const auto& Q = decomp.cube(c);
      double integral = 0.0;
      for (Id y : domain.interior_index().within(Q.center, options.sigma * Q.outer_radius))
        integral += f.alpha[static_cast<std::size_t>(domain.slot(y))];
      integral *= domain.point_measure();
      const double lf = std::max(0.0, std::log(1.0 / Q.size()));
      row.dominant = std::max(row.dominant, std::pow(integral, 1.0 / q) * std::pow(lf, 1.0 / q));
    }
    row.image_gap = point_gap(f.value(row.y1), f.value(row.y2));
    rep.scales.push_back(std::move(row));
  }

  const auto l1 = f.value(first_interior(domain, gamma));
  const auto l2 = f.value(first_interior(domain, eta));
  rep.limit1.assign(l1.begin(), l1.end());
  rep.limit2.assign(l2.begin(), l2.end());
  rep.gap = point_gap(l1, l2);
  rep.unique = rep.gap <= options.tol;
  if (!options.uniform_pairs.empty()) {
    rep.uniform = check_uniform(domain, options.uniform_c, options.uniform_pairs);
    rep.uniform_hypothesis = rep.uniform.witnesses.empty();
  } else {
    rep.uniform.c = options.uniform_c;
    rep.uniform_hypothesis = true;
  }
  return rep;
}

}  // namespace bext
