#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bext/domain.hpp"

namespace bext {

/// Gauge phi with John constant c. Built-ins are scale * t^exponent; a
/// monotone table is interpolated linearly and extended with its last slope.
struct JohnProfile {
  double scale = 1.0;
  double exponent = 1.0;
  std::vector<double> table_t;    // ascending, starting at 0
  std::vector<double> table_phi;  // nondecreasing, table_phi[0] = 0
  double c = 1.0;

  static JohnProfile identity(double c) { return {1.0, 1.0, {}, {}, c}; }
  static JohnProfile power(double scale, double exponent, double c) { return {scale, exponent, {}, {}, c}; }
  // Throws "bad-profile" for unsorted or non-monotone tables.
  static JohnProfile from_table(std::vector<double> t, std::vector<double> phi, double c);

  double phi(double t) const;
  std::string formula() const;
};

// phi(0) = 0, phi increasing and phi(t) >= t on `samples` points of (0, t_max].
bool validate_profile(const JohnProfile& profile, double t_max, std::size_t samples = 256);

struct JohnCertificate {
  CurveModel curve;
  double margin = 0.0;      // min over vertices of phi(c d(v)) - arclen(v)
  std::size_t worst = 0;    // vertex attaining the margin
  bool pass = false;        // margin >= -2 eps
};

// Curve runs from gamma(0) (interior or boundary) to the center. Boundary
// vertices count with clearance 0. Throws "not-anchored" and "bad-curve"
// for vertices outside the domain samples.
JohnCertificate verify_john_curve(const DomainModel& domain, const CurveModel& curve, const JohnProfile& profile);

// Shortest path from `start` to the center whose running length L at every
// vertex v satisfies L <= phi(c d(v)) + 2 eps. Throws "no-john-curve".
CurveModel construct_john_curve(const DomainModel& domain, Id start, const JohnProfile& profile);
// Same, forced through an interior waypoint (start -> waypoint -> center).
CurveModel construct_john_curve(const DomainModel& domain, Id start, Id waypoint, const JohnProfile& profile);

struct QuasihyperbolicResult {
  double value = 0.0;
  std::vector<Id> path;
};

// Dijkstra on the neighbor graph with weight d(u,v) / min(d(u), d(v)).
// Throws "not-interior" and "no-path".
QuasihyperbolicResult quasihyperbolic_distance(const DomainModel& domain, Id x, Id y);

// One pair for the bound k <= C log+(C d / m) + 2.
struct QuasihyperbolicSample {
  double k = 0.0;
  double distance = 0.0;
  double min_clearance = 0.0;
};
double quasihyperbolic_bound(double C, const QuasihyperbolicSample& s);
// Smallest C making the bound hold on every sample.
double fit_quasihyperbolic_constant(const std::vector<QuasihyperbolicSample>& samples);

struct UniformPair {
  Id x1 = kNoId;
  Id x2 = kNoId;
  double distance = 0.0;
  double best_length = 0.0;  // shortest admissible curve, infinity if none
  bool pass = false;
};

struct UniformReport {
  double c = 0.0;
  std::size_t passed = 0;
  double pass_fraction = 1.0;
  std::vector<UniformPair> pairs;
  std::vector<UniformPair> witnesses;  // failing pairs, worst first (at most 8)
};

// Searches for curves with length <= c d(x1,x2) + 2 eps and, at every vertex,
// min(length from x1, length from x2) <= c d(v) + 2 eps.
UniformReport check_uniform(const DomainModel& domain, double c, const std::vector<std::pair<Id, Id>>& pairs);

// Random interior pairs, deterministic under seed.
std::vector<std::pair<Id, Id>> random_pairs(const DomainModel& domain, std::size_t count, std::uint64_t seed);

void write_curve_json(std::ostream& out, const CurveModel& curve);
// Throws "bad-curve" for malformed input.
CurveModel read_curve_json(std::istream& in);

}  // namespace bext
