#include "bext/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "bext/error.hpp"
#include "bext/io.hpp"
#include "bext/render.hpp"

namespace bext {

namespace {

using ojson = nlohmann::ordered_json;

double number_or_fraction(const nlohmann::json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_fraction(v.get<std::string>());
  throw Error("bad-config", "`" + key + "` must be a number or a fraction string");
}

std::string fraction_text(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw Error("bad-config", "`" + key + "` must be a number or a fraction string");
}

ojson constant(const std::string& name, double value, const std::string& formula) {
  ojson j;
  j["name"] = name;
  j["value"] = value;
  j["formula"] = formula;
  return j;
}

ojson level_rows_json(const std::vector<LevelRow>& rows) {
  ojson out = ojson::array();
  for (const auto& r : rows) {
    ojson j;
    j["level"] = r.level;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["ratio"] = r.slack();
    out.push_back(j);
  }
  return out;
}

double gap(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

double RunConfig::epsilon() const { return parse_fraction(eps); }

void validate_config(const RunConfig& c) {
  const double eps = c.epsilon();
  if (!(eps > 0.0) || eps >= 1.0) throw Error("bad-parameter", "eps must lie in (0, 1)");
  if (parse_fraction(c.boundary_spacing) < 0.0) throw Error("bad-parameter", "boundary spacing must be nonnegative");
  if (c.domain_file.empty()) {
    const auto& names = generator_names();
    if (std::find(names.begin(), names.end(), c.domain) == names.end())
      throw Error("unknown-generator", "unknown domain generator `" + c.domain + "`");
  }
  if (c.domain == "cusp" && !(c.s > 1.0)) throw Error("bad-parameter", "cusp exponent s must exceed 1");
  const auto& maps = mapping_names();
  if (std::find(maps.begin(), maps.end(), c.map) == maps.end())
    throw Error("unknown-map", "unknown map `" + c.map + "`");
  if (!validate_whitney_params(c.whitney))
    throw Error("bad-parameter", "Whitney parameters must satisfy a >= 4, 6 c1 <= C1, 2 C1 delta <= c1, delta < 1");
  if (c.john_c && !(*c.john_c >= 1.0)) throw Error("bad-parameter", "John constant c must be at least 1");
  if (c.john_scale && !(*c.john_scale > 0.0)) throw Error("bad-parameter", "John profile scale must be positive");
  if (c.john_exponent && !(*c.john_exponent > 0.0 && *c.john_exponent <= 1.0))
    throw Error("bad-parameter", "John profile exponent must lie in (0, 1]");
  if (!(c.sigma > 1.0 && c.sigma <= WhitneyDecomposition::kLambda0))
    throw Error("bad-parameter", "sigma must lie in (1, 3/2]");
  if (c.curve_stride == 0) throw Error("bad-parameter", "curve stride must be positive");
  if (!(c.limit_tol > 0.0)) throw Error("bad-parameter", "limit tolerance must be positive");
  if (c.thresholds.empty()) throw Error("bad-parameter", "need at least one threshold");
  for (double r : c.class_radii)
    if (!(r > 0.0)) throw Error("bad-parameter", "class radii must be positive");
  for (double s : c.uniqueness_scales)
    if (!(s > 0.0)) throw Error("bad-parameter", "uniqueness scales must be positive");
  if (!(c.uniform_c >= 1.0)) throw Error("bad-parameter", "uniform constant must be at least 1");
  if (c.format != "json" && c.format != "csv") throw Error("bad-parameter", "format must be json or csv");
  for (const auto& g : c.gauges) {
    parse_variant(g.variant);
    if (g.h != "power" && g.h != "log") throw Error("bad-parameter", "gauge h must be power or log");
    if (!(g.exponent > 0.0)) throw Error("bad-parameter", "gauge exponent must be positive");
    if (g.q != 0.0 && !(g.q > 1.0)) throw Error("exponent-out-of-range", "gauge q must exceed 1");
  }
}

void apply_config_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw Error("bad-config", "config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "domain") c.domain = v.get<std::string>();
      else if (key == "eps") c.eps = fraction_text(v, key);
      else if (key == "boundary_spacing") c.boundary_spacing = fraction_text(v, key);
      else if (key == "s") c.s = number_or_fraction(v, key);
      else if (key == "domain_file") c.domain_file = v.get<std::string>();
      else if (key == "points_file") c.points_file = v.get<std::string>();
      else if (key == "delta") c.whitney.delta = number_or_fraction(v, key);
      else if (key == "c1") c.whitney.c1 = number_or_fraction(v, key);
      else if (key == "C1") c.whitney.C1 = number_or_fraction(v, key);
      else if (key == "a") c.whitney.a = number_or_fraction(v, key);
      else if (key == "john_scale") c.john_scale = number_or_fraction(v, key);
      else if (key == "john_exponent") c.john_exponent = number_or_fraction(v, key);
      else if (key == "john_c") c.john_c = number_or_fraction(v, key);
      else if (key == "map") c.map = v.get<std::string>();
      else if (key == "gauges") {
        c.gauges.clear();
        for (const auto& g : v) {
          GaugeSelection s;
          s.variant = g.value("variant", s.variant);
          s.h = g.value("h", s.h);
          if (g.contains("exponent")) s.exponent = number_or_fraction(g.at("exponent"), "exponent");
          if (g.contains("q")) s.q = number_or_fraction(g.at("q"), "q");
          c.gauges.push_back(s);
        }
      }
      else if (key == "curve_stride") c.curve_stride = v.get<std::size_t>();
      else if (key == "thresholds") c.thresholds = v.get<std::vector<double>>();
      else if (key == "limit_tol") c.limit_tol = number_or_fraction(v, key);
      else if (key == "limit_samples") c.limit_samples = v.get<std::size_t>();
      else if (key == "class_balls") c.class_balls = v.get<std::size_t>();
      else if (key == "class_radii") {
        c.class_radii.clear();
        for (const auto& r : v) c.class_radii.push_back(number_or_fraction(r, key));
      }
      else if (key == "sigma") c.sigma = number_or_fraction(v, key);
      else if (key == "qh_pairs") c.qh_pairs = v.get<std::size_t>();
      else if (key == "uniqueness") c.uniqueness = v.get<bool>();
      else if (key == "uniqueness_scales") {
        c.uniqueness_scales.clear();
        for (const auto& r : v) c.uniqueness_scales.push_back(number_or_fraction(r, key));
      }
      else if (key == "uniqueness_tol") c.uniqueness_tol = number_or_fraction(v, key);
      else if (key == "uniform_c") c.uniform_c = number_or_fraction(v, key);
      else if (key == "uniform_pairs") c.uniform_pairs = v.get<std::size_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error("bad-config", "unknown config key `" + key + "`");
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad-config", "`" + key + "`: " + e.what());
    }
  }
}

ojson config_to_json(const RunConfig& c) {
  ojson j;
  j["domain"] = c.domain_file.empty() ? c.domain : std::string("file");
  if (!c.domain_file.empty()) j["domain_file"] = c.domain_file;
  j["eps"] = c.eps;
  j["boundary_spacing"] = c.boundary_spacing;
  j["s"] = c.s;
  j["delta"] = c.whitney.delta;
  j["c1"] = c.whitney.c1;
  j["C1"] = c.whitney.C1;
  j["a"] = c.whitney.a;
  if (c.john_scale) j["john_scale"] = *c.john_scale;
  if (c.john_exponent) j["john_exponent"] = *c.john_exponent;
  if (c.john_c) j["john_c"] = *c.john_c;
  j["map"] = c.map;
  ojson g = ojson::array();
  for (const auto& s : c.gauges) g.push_back({{"variant", s.variant}, {"h", s.h}, {"exponent", s.exponent}, {"q", s.q}});
  j["gauges"] = g;
  j["curve_stride"] = c.curve_stride;
  j["thresholds"] = c.thresholds;
  j["limit_tol"] = c.limit_tol;
  j["limit_samples"] = c.limit_samples;
  j["class_balls"] = c.class_balls;
  j["class_radii"] = c.class_radii;
  j["sigma"] = c.sigma;
  j["qh_pairs"] = c.qh_pairs;
  j["uniqueness"] = c.uniqueness;
  j["uniqueness_scales"] = c.uniqueness_scales;
  j["uniqueness_tol"] = c.uniqueness_tol;
  j["uniform_c"] = c.uniform_c;
  j["uniform_pairs"] = c.uniform_pairs;
  j["seed"] = c.seed;
  return j;
}

ojson invariants_to_json(const std::vector<InvariantResult>& inv) {
  ojson out = ojson::array();
  for (const auto& r : inv) {
    ojson j;
    j["name"] = r.name;
    j["ok"] = r.ok;
    if (!r.witness.empty()) j["witness"] = r.witness;
    out.push_back(j);
  }
  return out;
}

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) { validate_config(config_); }

bool Pipeline::ok() const {
  return std::all_of(invariants_.begin(), invariants_.end(), [](const InvariantResult& r) { return r.ok; });
}

void Pipeline::check(const std::string& name, bool ok, const std::string& witness) {
  invariants_.push_back({name, ok, ok ? std::string() : witness});
}

const DomainModel& Pipeline::domain() {
  if (!domain_) {
    if (!config_.domain_file.empty()) {
      std::shared_ptr<const PointCloudSpace> space;
      if (!config_.points_file.empty())
        space = std::make_shared<const PointCloudSpace>(read_points_csv(config_.points_file));
      std::ifstream in(config_.domain_file);
      if (!in) throw Error("io-error", "cannot read " + config_.domain_file);
      domain_.emplace(read_domain_json(in, space));
    } else {
      GeneratorSpec spec;
      spec.name = config_.domain;
      spec.epsilon = config_.epsilon();
      spec.boundary_spacing = parse_fraction(config_.boundary_spacing);
      spec.s = config_.s;
      domain_.emplace(generate_domain(spec));
    }
  }
  return *domain_;
}

const CubeSystem& Pipeline::cubes() {
  if (!cubes_) {
    const NetParams np = net_params_for(config_.whitney);
    const auto& d = domain();
    cubes_.emplace(build_cubes(d.space(), build_nets(d.space(), d.interior(), np), np));
  }
  return *cubes_;
}

const WhitneyDecomposition& Pipeline::whitney() {
  if (!whitney_) whitney_.emplace(build_whitney(domain(), cubes(), config_.whitney));
  return *whitney_;
}

JohnProfile Pipeline::profile() {
  JohnHint hint;
  if (config_.domain_file.empty()) {
    GeneratorSpec spec;
    spec.name = config_.domain;
    spec.s = config_.s;
    hint = john_hint(spec);
  }
  return JohnProfile::power(config_.john_scale.value_or(hint.scale), config_.john_exponent.value_or(hint.exponent),
                            config_.john_c.value_or(hint.c));
}

const CurveFamily& Pipeline::curves() {
  if (!curves_) {
    missing_curves_.clear();
    curves_.emplace(construct_curve_family(domain(), profile(), config_.curve_stride, &missing_curves_));
  }
  return *curves_;
}

const MappingModel& Pipeline::mapping() {
  if (!mapping_) mapping_.emplace(make_mapping(domain(), config_.map));
  return *mapping_;
}

const CubeDiameters& Pipeline::diameters() {
  if (!diameters_) diameters_.emplace(cube_image_diameters(mapping(), whitney(), domain()));
  return *diameters_;
}

const ShadowMap& Pipeline::shadows() {
  if (!shadows_) shadows_.emplace(compute_shadows(whitney(), domain(), profile(), curves()));
  return *shadows_;
}

const AhlforsProfile& Pipeline::ahlfors() {
  if (!ahlfors_) {
    const auto& d = domain();
    const double eps = d.epsilon();
    std::vector<double> radii;
    for (double r : {1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0})
      if (r >= 4.0 * eps) radii.push_back(r);
    if (radii.size() < 2) radii = {4.0 * eps, 8.0 * eps};
    ahlfors_.emplace(estimate_ahlfors(d, radii, config_.seed));
  }
  return *ahlfors_;
}

ojson Pipeline::section_domain() {
  const auto& d = domain();
  ojson j;
  j["name"] = d.name();
  j["samples"] = d.space().size();
  j["interior"] = d.interior().size();
  j["boundary"] = d.boundary().size();
  j["epsilon"] = d.epsilon();
  j["q"] = d.q();
  j["boundary_spacing"] = d.boundary_spacing();
  j["center"] = d.center();
  j["center_clearance"] = d.dist_to_boundary(d.center());
  const bool connected = d.connected();
  j["connected"] = connected;
  check("domain.connected", connected, "interior sample graph is disconnected");
  const std::size_t axioms = d.space().check_metric_axioms(10000, config_.seed);
  j["metric_axiom_violations"] = axioms;
  check("domain.metric-axioms", axioms == 0, std::to_string(axioms) + " violating triples");
  double min_clear = std::numeric_limits<double>::infinity();
  for (double v : d.boundary_distances()) min_clear = std::min(min_clear, v);
  check("domain.min-clearance", min_clear >= 0.5 * d.epsilon(), "interior sample closer than eps/2 to the boundary");
  j["doubling_estimate"] = estimate_doubling(d.space(), 16, config_.seed);
  const auto& a = ahlfors();
  j["ahlfors"] = {{"q", a.q}, {"fitted_q", a.fitted_q}, {"C_q", a.c_q}, {"r_min", a.r_min}, {"r_max", a.r_max},
                  {"balls", a.balls}};
  return j;
}

ojson Pipeline::section_decomposition() {
  const auto& d = domain();
  const auto& cs = cubes();
  ojson j;
  ojson dy;
  dy["k_min"] = cs.k_min();
  dy["k_max"] = cs.k_max();
  ojson levels = ojson::array();
  for (int k = cs.k_min(); k <= cs.k_max(); ++k) levels.push_back({{"level", k}, {"cubes", cs.level(k).size()}});
  dy["levels"] = levels;
  const auto cc = check_cube_system(d.space(), cs);
  dy["violations"] = {{"partition", cc.partition}, {"nesting", cc.nesting}, {"inner_ball", cc.inner_ball},
                      {"outer_ball", cc.outer_ball}};
  check("dyadic.partition", cc.partition == 0, std::to_string(cc.partition) + " samples");
  check("dyadic.nesting", cc.nesting == 0, std::to_string(cc.nesting) + " cubes");
  check("dyadic.sandwich", cc.inner_ball + cc.outer_ball == 0,
        std::to_string(cc.inner_ball) + " inner, " + std::to_string(cc.outer_ball) + " outer");
  j["dyadic"] = dy;

  const auto& w = whitney();
  ojson wj;
  wj["cubes"] = w.size();
  wj["min_level"] = w.min_level();
  wj["max_level"] = w.max_level();
  ojson wl = ojson::array();
  for (int k = w.min_level(); k <= w.max_level() && w.size() > 0; ++k) wl.push_back({{"level", k}, {"cubes", w.level(k).size()}});
  wj["levels"] = wl;
  const auto wc = check_whitney(w, d, cs);
  wj["violations"] = {{"partition", wc.partition},
                      {"lower_distance", wc.lower_distance},
                      {"upper_distance", wc.upper_distance},
                      {"enlarged_ball", wc.enlarged_ball},
                      {"center_clearance", wc.center_clearance},
                      {"inner_ball", wc.inner_ball},
                      {"outer_ball", wc.outer_ball},
                      {"maximality", wc.maximality},
                      {"size_ratio", wc.size_ratio}};
  check("whitney.partition", wc.partition == 0, std::to_string(wc.partition) + " samples");
  check("whitney.distance-bounds", wc.lower_distance + wc.upper_distance == 0,
        std::to_string(wc.lower_distance) + " below, " + std::to_string(wc.upper_distance) + " above");
  check("whitney.enlarged-ball", wc.enlarged_ball + wc.center_clearance == 0,
        std::to_string(wc.enlarged_ball) + " boundary samples, " + std::to_string(wc.center_clearance) + " centers");
  check("whitney.sandwich", wc.inner_ball + wc.outer_ball == 0,
        std::to_string(wc.inner_ball) + " inner, " + std::to_string(wc.outer_ball) + " outer");
  check("whitney.maximality", wc.maximality == 0, std::to_string(wc.maximality) + " cubes");
  check("whitney.size-ratio", wc.size_ratio == 0, std::to_string(wc.size_ratio) + " cubes");

  std::size_t linked = 0, ball_only = 0;
  for (const auto& e : w.edges()) (e.members_linked ? linked : ball_only) += 1;
  wj["edges"] = {{"members_linked", linked}, {"outer_balls_only", ball_only}};
  if (d.connected() && w.size() > 0) {
    std::vector<char> seen(w.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const int c = queue.front();
      queue.pop_front();
      for (int n : w.neighbors(c))
        if (!seen[static_cast<std::size_t>(n)]) {
          seen[static_cast<std::size_t>(n)] = 1;
          ++reached;
          queue.push_back(n);
        }
    }
    check("whitney.adjacency-connected", reached == w.size(),
          std::to_string(w.size() - reached) + " cubes unreachable from cube 0");
  }
  for (double lambda : {1.0, WhitneyDecomposition::kLambda0}) {
    const auto counts = overlap_counts(w, d, lambda);
    const std::size_t mx = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
    wj[lambda == 1.0 ? "overlap_max_lambda_1" : "overlap_max_lambda_3_2"] = mx;
  }
  j["whitney"] = wj;
  return j;
}

ojson Pipeline::section_curves() {
  const auto& d = domain();
  const auto p = profile();
  const auto& fam = curves();
  ojson j;
  j["profile"] = p.formula();
  j["profile_valid"] = validate_profile(p, 1.0);
  j["curves"] = fam.size();
  j["missing"] = missing_curves_.size();
  double worst = std::numeric_limits<double>::infinity();
  Id worst_id = kNoId;
  std::size_t fails = 0, fails_2c = 0;
  double longest = 0.0;
  JohnProfile wider = p;
  wider.c = 2.0 * p.c;
  for (const auto& [xi, curve] : fam) {
    const auto cert = verify_john_curve(d, curve, p);
    if (!cert.pass) ++fails;
    if (!verify_john_curve(d, curve, wider).pass) ++fails_2c;
    if (cert.margin < worst) {
      worst = cert.margin;
      worst_id = xi;
    }
    longest = std::max(longest, curve.length());
  }
  j["worst_margin"] = fam.empty() ? 0.0 : worst;
  j["worst_curve"] = worst_id;
  j["longest"] = longest;
  check("john.self-consistency", fails == 0, std::to_string(fails) + " constructed curves fail verification");
  check("john.c-monotone", fails_2c == 0, std::to_string(fails_2c) + " curves fail at 2c");
  return j;
}

ojson Pipeline::section_shadows() {
  const auto& d = domain();
  const auto& w = whitney();
  const auto p = profile();
  const auto& sh = shadows();
  const auto& a = ahlfors();
  ojson j;
  j["b"] = {{"value", sh.b}, {"formula", sh.b_formula}};
  j["C"] = {{"value", sh.C}, {"formula", sh.C_formula}};
  const auto dr = check_shadow_diameters(sh, w, d, p);
  j["diameter_bound"] = {{"formula", "diam S(Q) <= 3 phi(C D_Q) + 4 eps, D_Q = max(diam Q, c1 delta^k)"},
                         {"cubes", dr.cubes},
                         {"violations", dr.violations},
                         {"worst_ratio", dr.worst_ratio}};
  check("shadow.diameter-bound", dr.violations == 0, std::to_string(dr.violations) + " cubes");

  // Per level: the largest a_k over boundary points.
  std::vector<LevelRow> worst;
  Id worst_xi = kNoId;
  bool counts_ok = true;
  for (Id xi : sh.sources) {
    const auto rows = shadow_level_counts(sh, w, xi, a, p);
    if (worst.empty()) worst = rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].lhs > worst[i].lhs) worst[i] = rows[i];
      if (!rows[i].holds() && counts_ok) {
        counts_ok = false;
        worst_xi = xi;
      }
    }
  }
  j["level_counts"] = {{"formula", "a_k <= C_q^2 (2 phi(2 C C1 delta^k) / (c1 delta^k))^q"},
                       {"rows", level_rows_json(worst)}};
  check("shadow.level-counts", counts_ok, "boundary sample " + std::to_string(worst_xi));
  const auto sums = shadow_measure_sums(sh, w, d, sh.sources, a, p);
  bool sums_ok = std::all_of(sums.begin(), sums.end(), [](const LevelRow& r) { return r.holds(); });
  j["level_sums"] = {{"formula", "sum_Q mu(S_E(Q)) <= C_q^2 (2 phi(C C1 delta^k) / (c1 delta^k))^q mu(E)"},
                     {"E", "all boundary samples with curves"},
                     {"rows", level_rows_json(sums)}};
  check("shadow.level-sums", sums_ok, "a level sum exceeds its bound");
  return j;
}

ojson Pipeline::section_trace() {
  const auto& d = domain();
  const auto& w = whitney();
  const auto& f = mapping();
  const auto& diams = diameters();
  const auto& fam = curves();
  ojson j;
  j["map"] = f.name;
  j["formula"] = f.formula;
  j["alpha"] = f.alpha_formula;

  double max_len = 0.0, max_closure = 0.0, sum_len = 0.0;
  bool totals_ok = true;
  for (const auto& [xi, curve] : fam) {
    const auto r = discrete_length(diams, w, curve);
    double s = 0.0;
    for (const auto& l : r.levels) s += l.members;
    totals_ok = totals_ok && std::abs(s - r.total) <= 1e-12 * std::max(1.0, r.total);
    max_len = std::max(max_len, r.total);
    max_closure = std::max(max_closure, r.total_closure);
    sum_len += r.total;
  }
  check("trace.length-levels", totals_ok, "total differs from the sum of level partials");
  j["discrete_length"] = {{"curves", fam.size()},
                          {"max_members", max_len},
                          {"mean", fam.empty() ? 0.0 : sum_len / static_cast<double>(fam.size())},
                          {"max_closure", max_closure}};

  // Boundary limits on a deterministic sample of curves.
  std::vector<Id> sources;
  for (const auto& kv : fam) sources.push_back(kv.first);
  std::mt19937_64 rng(config_.seed + 17);
  std::shuffle(sources.begin(), sources.end(), rng);
  if (sources.size() > config_.limit_samples) sources.resize(config_.limit_samples);
  std::sort(sources.begin(), sources.end());
  std::size_t converged = 0, within = 0, cauchy_ok = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  ojson rows = ojson::array();
  for (Id xi : sources) {
    const auto& curve = fam.at(xi);
    const auto dl = discrete_length(diams, w, curve);
    const auto bl = boundary_limit(f, dl, curve, d, config_.limit_tol);
    ojson r;
    r["xi"] = xi;
    r["converged"] = bl.converged;
    if (bl.converged) {
      ++converged;
      r["level"] = bl.level;
      r["error_radius"] = bl.error_radius;
      r["value"] = bl.value;
      // Oscillation over the leading run of vertices in cubes of level >= N.
      double osc = 0.0;
      const auto v0 = f.value(bl.vertex);
      for (Id v : curve.vertices) {
        if (!d.is_interior(v)) continue;
        if (w.cube(w.cube_of_unchecked(v)).level < bl.level) break;
        osc = std::max(osc, gap(f.value(v), v0));
      }
      r["oscillation"] = osc;
      if (osc <= bl.error_radius + 1e-12) ++cauchy_ok;
      if (f.defined_on_boundary) {
        const double g = gap(f.value(xi), bl.value);
        r["true_gap"] = g;
        worst_excess = std::max(worst_excess, g - bl.error_radius - 2.0 * d.epsilon());
        if (g <= bl.error_radius + 2.0 * d.epsilon()) ++within;
      }
    } else {
      r["stuck_level"] = bl.stuck_level;
      r["final_tail"] = bl.final_tail;
    }
    rows.push_back(r);
  }
  j["limits"] = {{"tol", config_.limit_tol},
                 {"samples", sources.size()},
                 {"converged", converged},
                 {"diverged", sources.size() - converged},
                 {"rows", rows}};
  check("trace.cauchy", cauchy_ok == converged, std::to_string(converged - cauchy_ok) + " curves oscillate beyond the tail");
  if (f.defined_on_boundary)
    check("trace.limit-within-radius", within == converged, "excess " + fmt(worst_excess));

  // Class constants.
  std::vector<double> radii = config_.class_radii;
  if (radii.empty()) radii = {4.0 * d.epsilon(), 8.0 * d.epsilon(), 16.0 * d.epsilon()};
  const auto balls = random_balls(d, config_.class_balls, radii, config_.seed + 29);
  ojson cls;
  try {
    const auto a1 = estimate_class_constant(f, d, f.alpha, config_.sigma, ClassTag::kA1, balls);
    const auto a2 = estimate_class_constant(f, d, f.alpha, config_.sigma, ClassTag::kA2, balls);
    cls["sigma"] = config_.sigma;
    cls["A1"] = {{"C", a1.C}, {"tested", a1.tested}, {"skipped", a1.skipped}};
    cls["A2"] = {{"C", a2.C}, {"tested", a2.tested}, {"skipped", a2.skipped}};
    std::size_t bad = 0, i = 0;
    for (const auto& r2 : a2.rows) {
      while (i < a1.rows.size() && (a1.rows[i].center != r2.center || a1.rows[i].r != r2.r)) ++i;
      if (i == a1.rows.size()) break;
      if (2.0 * r2.r <= std::exp(-1.0) && r2.ratio > a1.rows[i].ratio * (1.0 + 1e-12)) ++bad;
      ++i;
    }
    check("class.a2-le-a1", bad == 0, std::to_string(bad) + " balls");
  } catch (const Error& e) {
    cls["error"] = e.what();
  }
  j["class_constants"] = cls;
  return j;
}

ojson Pipeline::section_gauges() {
  const auto p = profile();
  const double dq = domain().q();
  std::vector<GaugeSelection> sel = config_.gauges;
  if (sel.empty()) sel = {{"A1", "power", 1.0, 0.0}, {"A2", "power", 1.0, 0.0}, {"uniqueness", "power", 1.0, 0.0}};
  ojson out = ojson::array();
  for (const auto& s : sel) {
    const GaugeFunction h = s.h == "log" ? GaugeFunction::log(s.exponent) : GaugeFunction::power(s.exponent);
    const double q = s.q > 0.0 ? s.q : dq;
    const auto v = gauge_integral(p, h, q, parse_variant(s.variant));
    ojson j;
    j["variant"] = variant_name(parse_variant(s.variant));
    j["integral"] = v.integral;
    j["finite"] = v.finite;
    if (v.finite) j["value"] = v.value;
    j["tail_power"] = std::isfinite(v.tail_power) ? ojson(v.tail_power) : ojson("inf");
    j["h_doubling"] = gauge_doubling_constant(h);
    out.push_back(j);
  }
  return out;
}

ojson Pipeline::section_content() {
  const auto& d = domain();
  const auto lengths = curve_lengths(diameters(), whitney(), curves());
  const GaugeFunction h = GaugeFunction::power(1.0);
  const auto reps = exceptional_content(lengths, d, h, config_.thresholds);
  ojson j;
  j["h"] = h.formula();
  j["length_column"] = "closure";
  j["note"] = reps.empty() ? std::string() : reps.front().note;
  ojson rows = ojson::array();
  bool monotone = true;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    rows.push_back({{"threshold", reps[i].threshold},
                    {"count", reps[i].ids.size()},
                    {"content", reps[i].content},
                    {"scale", reps[i].scale}});
    if (i > 0) {
      monotone = monotone && reps[i].content <= reps[i - 1].content &&
                 std::includes(reps[i - 1].ids.begin(), reps[i - 1].ids.end(), reps[i].ids.begin(), reps[i].ids.end());
    }
  }
  j["rows"] = rows;
  check("content.monotone", monotone, "A_k or its content increases with k");
  return j;
}

ojson Pipeline::section_quasihyperbolic() {
  const auto& d = domain();
  auto samples = [&](const std::vector<std::pair<Id, Id>>& pairs) {
    std::vector<QuasihyperbolicSample> out(pairs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs.size()); ++i) {
      const auto [x, y] = pairs[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = {quasihyperbolic_distance(d, x, y).value, d.space().distance(x, y),
                                          std::min(d.dist_to_boundary(x), d.dist_to_boundary(y))};
    }
    return out;
  };
  const auto pairs = random_pairs(d, config_.qh_pairs, config_.seed + 101);
  const auto fitted = samples(pairs);
  const auto holdout_pairs = random_pairs(d, config_.qh_pairs, config_.seed + 202);
  const auto holdout = samples(holdout_pairs);
  const double C = fit_quasihyperbolic_constant(fitted);
  auto count = [&](const std::vector<QuasihyperbolicSample>& v) {
    std::size_t n = 0;
    for (const auto& s : v) n += s.k <= quasihyperbolic_bound(C, s) ? 1 : 0;
    return n;
  };
  const std::size_t holds = count(fitted);
  ojson j;
  j["formula"] = "k(x,y) <= C log+(C d(x,y) / min(d(x), d(y))) + 2";
  j["C"] = C;
  j["pairs"] = fitted.size();
  j["holds"] = holds;
  j["holdout_pairs"] = holdout.size();
  j["holdout_holds"] = count(holdout);
  check("qh.bound", holds == fitted.size(), std::to_string(fitted.size() - holds) + " pairs exceed the fitted bound");
  const auto& test_pairs = holdout_pairs;
  bool symmetric = true;
  for (std::size_t i = 0; i < std::min<std::size_t>(5, test_pairs.size()); ++i) {
    const auto [x, y] = test_pairs[i];
    symmetric = symmetric && quasihyperbolic_distance(d, x, y).value == quasihyperbolic_distance(d, y, x).value;
  }
  check("qh.symmetric", symmetric, "k(x,y) != k(y,x)");
  if (d.name() == "disc") {
    const Id y = nearest_interior(d, {0.5, 0.0});
    const double k = quasihyperbolic_distance(d, d.center(), y).value;
    j["radial"] = {{"value", k}, {"oracle", std::numbers::ln2}, {"relative_error", std::abs(k / std::numbers::ln2 - 1.0)}};
  }
  return j;
}

ojson Pipeline::section_uniqueness() {
  const auto& d = domain();
  ojson j;
  if (d.space().dim() != 2) {
    j["skipped"] = "needs planar coordinates";
    return j;
  }
  const auto& w = whitney();
  const auto& f = mapping();
  const double c = profile().c;
  const JohnProfile prof = JohnProfile::identity(c);
  const Id xi = nearest_boundary(d, {1.0, 0.0});
  const double eps = d.epsilon();
  UniquenessOptions opt;
  opt.c = c;
  opt.sigma = config_.sigma;
  opt.tol = config_.uniqueness_tol;
  opt.uniform_c = config_.uniform_c;
  opt.uniform_pairs = random_pairs(d, config_.uniform_pairs, config_.seed + 303);
  if (d.name() == "slit-disc")
    for (double x : {0.25, 0.5, 0.75})
      opt.uniform_pairs.emplace_back(nearest_interior(d, {x, eps}), nearest_interior(d, {x, -eps}));
  try {
    CurveModel gamma, eta;
    if (d.name() == "slit-disc") {
      gamma = construct_john_curve(d, xi, nearest_interior(d, {0.5, 0.25}), prof);
      eta = construct_john_curve(d, xi, nearest_interior(d, {0.5, -0.25}), prof);
    } else {
      gamma = construct_john_curve(d, xi, prof);
      eta = construct_john_curve(d, xi, nearest_interior(d, {0.6, 0.3}), prof);
    }
    const auto rep = uniqueness_check(f, d, w, xi, gamma, eta, config_.uniqueness_scales, opt);
    j["xi"] = xi;
    j["john_c"] = c;
    ojson rows = ojson::array();
    bool clear = true;
    for (const auto& s : rep.scales) {
      rows.push_back({{"s", s.s},
                      {"N", s.chain.size()},
                      {"chain_estimate", s.chain_estimate},
                      {"dominant", s.dominant},
                      {"image_gap", s.image_gap},
                      {"clearance_ok", s.clearance_ok},
                      {"ball_misses", s.ball_misses}});
      clear = clear && s.clearance_ok;
    }
    j["scales"] = rows;
    j["limit_gamma"] = rep.limit1;
    j["limit_eta"] = rep.limit2;
    j["gap"] = rep.gap;
    j["verdict"] = rep.unique ? "unique" : "non-unique";
    ojson wit = ojson::array();
    for (const auto& p : rep.uniform.witnesses)
      wit.push_back({{"x1", p.x1}, {"x2", p.x2}, {"distance", p.distance},
                     {"best_length", std::isfinite(p.best_length) ? ojson(p.best_length) : ojson("inf")}});
    j["uniform"] = {{"c", rep.uniform.c},
                    {"pairs", rep.uniform.pairs.size()},
                    {"pass_fraction", rep.uniform.pass_fraction},
                    {"hypothesis_holds", rep.uniform_hypothesis},
                    {"witnesses", wit}};
    check("uniqueness.clearance", clear, "a chain endpoint has c d(y) < s - 2 eps");
  } catch (const Error& e) {
    j["error"] = e.what();
    check("uniqueness.curves", false, e.what());
  }
  return j;
}

ojson Pipeline::section_constants() {
  const auto& p = config_.whitney;
  const auto pr = profile();
  const double b = p.a * p.C1 / (p.c1 * p.delta);
  ojson out = ojson::array();
  out.push_back(constant("delta", p.delta, "given"));
  out.push_back(constant("c1", p.c1, "given"));
  out.push_back(constant("C1", p.C1, "given"));
  out.push_back(constant("a", p.a, "given"));
  out.push_back(constant("c0", 3.0 * p.c1, "c0 = 3 c1"));
  out.push_back(constant("C0", 0.5 * p.C1, "C0 = C1 / 2"));
  out.push_back(constant("lambda0", WhitneyDecomposition::kLambda0, "lambda0 = 3/2"));
  out.push_back(constant("sigma", config_.sigma, "given, 1 < sigma <= lambda0"));
  out.push_back(constant("c", pr.c, "John constant"));
  out.push_back(constant("b", b, "b = a C1 / (c1 delta)"));
  out.push_back(constant("C", pr.c * (b + 1.0) + 1.0, "C = c (b + 1) + 1"));
  out.push_back(constant("link_radius", domain().link_radius(), "1.5 eps"));
  return out;
}

ojson Pipeline::full_report() {
  invariants_.clear();
  ojson r;
  r["config"] = config_to_json(config_);
  r["constants"] = section_constants();
  r["domain"] = section_domain();
  r["decomposition"] = section_decomposition();
  r["curves"] = section_curves();
  r["shadows"] = section_shadows();
  r["trace"] = section_trace();
  r["gauges"] = section_gauges();
  r["content"] = section_content();
  r["quasihyperbolic"] = section_quasihyperbolic();
  if (config_.uniqueness) r["uniqueness"] = section_uniqueness();
  r["invariants"] = invariants_to_json(invariants_);
  r["ok"] = ok();
  return r;
}

std::string Pipeline::levels_csv() {
  const auto& w = whitney();
  const auto& diams = diameters();
  std::map<int, LevelSum> acc;
  std::map<int, std::size_t> curves_at;
  for (const auto& [xi, curve] : curves()) {
    for (const auto& l : discrete_length(diams, w, curve).levels) {
      auto& a = acc[l.level];
      a.level = l.level;
      a.cubes += l.cubes;
      a.members += l.members;
      a.outer += l.outer;
      a.closure += l.closure;
      ++curves_at[l.level];
    }
  }
  std::ostringstream s;
  s.precision(17);
  s << "level,curves,cubes,members,outer,closure\n";
  for (const auto& [k, a] : acc)
    s << k << ',' << curves_at[k] << ',' << a.cubes << ',' << a.members << ',' << a.outer << ',' << a.closure << '\n';
  return s.str();
}

void Pipeline::write_exports() {
  const std::string dir = config_.out + "/";
  const auto& d = domain();
  std::ostringstream s;
  write_domain_json(s, d);
  write_text_file(dir + "domain.json", s.str());
  s.str("");
  export_cubes_jsonl(s, cubes(), false);
  write_text_file(dir + "cubes.jsonl", s.str());
  s.str("");
  export_whitney_jsonl(s, whitney());
  write_text_file(dir + "whitney.jsonl", s.str());
  s.str("");
  for (const auto& [xi, c] : curves()) {
    ojson j;
    j["xi"] = xi;
    j["vertices"] = c.vertices;
    j["t"] = c.t;
    j["arclen"] = c.arclen;
    s << j.dump() << '\n';
  }
  write_text_file(dir + "curves.jsonl", s.str());
  s.str("");
  const auto& sh = shadows();
  const auto& w = whitney();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (sh.shadow[i].empty()) continue;
    ojson j;
    j["cube"] = i;
    j["level"] = w.cube(static_cast<int>(i)).level;
    j["center"] = w.cube(static_cast<int>(i)).center;
    j["outer_radius"] = w.cube(static_cast<int>(i)).outer_radius;
    j["shadow_size"] = sh.shadow[i].size();
    j["shadow_diameter"] = d.space().diameter(sh.shadow[i]);
    s << j.dump() << '\n';
  }
  write_text_file(dir + "shadows.jsonl", s.str());
  write_text_file(dir + "levels.csv", levels_csv());
}

void Pipeline::write_figures() {
  const auto& d = domain();
  if (d.space().dim() != 2) return;
  const std::string dir = config_.out + "/";
  const auto& w = whitney();
  std::vector<CubeDisk> disks;
  for (const auto& q : w.cubes()) disks.push_back({q.center, q.outer_radius, q.level, 0.0});
  write_text_file(dir + "whitney.svg", render_cubes_svg(d, disks));
  std::vector<std::vector<Id>> lines;
  const auto& fam = curves();
  const std::size_t step = std::max<std::size_t>(1, fam.size() / 64);
  std::size_t i = 0;
  for (const auto& kv : fam)
    if (i++ % step == 0) lines.push_back(kv.second.vertices);
  write_text_file(dir + "curves.svg", render_curves_svg(d, lines));
  const auto& sh = shadows();
  std::vector<CubeDisk> heat;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (sh.shadow[k].empty()) continue;
    const auto& q = w.cube(static_cast<int>(k));
    heat.push_back({q.center, q.outer_radius, q.level, d.space().diameter(sh.shadow[k])});
  }
  write_text_file(dir + "shadows.svg", render_shadows_svg(d, heat));
}

}  // namespace bext
