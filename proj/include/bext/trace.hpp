#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bext/gauge.hpp"
#include "bext/john.hpp"
#include "bext/mapping.hpp"
#include "bext/whitney.hpp"

namespace bext {

// Boundary id -> John curve from that boundary sample to the center.
using CurveFamily = std::map<Id, CurveModel>;

// One curve per boundary sample (every `stride`-th), built with the profile.
// Boundary samples without an admissible curve are skipped and returned in `missing`.
CurveFamily construct_curve_family(const DomainModel& domain, const JohnProfile& profile, std::size_t stride,
                                   std::vector<Id>* missing = nullptr);

struct ShadowMap {
  double c = 1.0;
  double b = 0.0;  // a C1 / (c1 delta)
  double C = 0.0;  // c (b + 1) + 1
  std::string b_formula;
  std::string C_formula;
  std::vector<Id> sources;                                     // boundary ids with curves
  std::vector<std::vector<Id>> shadow;                         // per Whitney cube, ascending
  std::vector<std::vector<std::pair<int, std::size_t>>> hits;  // per source: (cube, first vertex meeting it)
};

// Throws "uncertified-curve" when a curve fails verification or does not start at its key.
ShadowMap compute_shadows(const WhitneyDecomposition& decomp, const DomainModel& domain, const JohnProfile& profile,
                          const CurveFamily& curves);

struct ShadowDiameterReport {
  std::size_t cubes = 0;  // cubes with nonempty shadow
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max diam S(Q) / bound
  int worst_cube = -1;
};
// diam S(Q) <= 3 phi(C D_Q) + 4 eps with D_Q = max(member diameter, c1 delta^k).
ShadowDiameterReport check_shadow_diameters(const ShadowMap& shadows, const WhitneyDecomposition& decomp,
                                            const DomainModel& domain, const JohnProfile& profile);

struct LevelRow {
  int level = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
  double slack() const { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0); }
};

// a_k = #{level-k cubes whose shadow contains xi} against C_q^2 (2 phi(2 C C1 delta^k) / (c1 delta^k))^q.
std::vector<LevelRow> shadow_level_counts(const ShadowMap& shadows, const WhitneyDecomposition& decomp, Id xi,
                                          const AhlforsProfile& ahlfors, const JohnProfile& profile);
// sum_Q mu(S_E(Q)) against C_q^2 (2 phi(C C1 delta^k) / (c1 delta^k))^q mu(E).
std::vector<LevelRow> shadow_measure_sums(const ShadowMap& shadows, const WhitneyDecomposition& decomp,
                                          const DomainModel& domain, const std::vector<Id>& E,
                                          const AhlforsProfile& ahlfors, const JohnProfile& profile);

// Image diameters per Whitney cube: members only, interior samples of the
// outer ball B^Q, and the closure (members plus their graph neighbors).
struct CubeDiameters {
  std::vector<double> members;
  std::vector<double> outer;
  std::vector<double> closure;
};
CubeDiameters cube_image_diameters(const MappingModel& f, const WhitneyDecomposition& decomp,
                                   const DomainModel& domain);

struct LevelSum {
  int level = 0;
  std::size_t cubes = 0;
  double members = 0.0;
  double outer = 0.0;
  double closure = 0.0;
};

struct DiscreteLengthReport {
  double total = 0.0;  // members column
  double total_outer = 0.0;
  double total_closure = 0.0;
  std::vector<LevelSum> levels;  // ascending level
  std::vector<int> cubes;        // cubes met, in order of first visit
};

DiscreteLengthReport discrete_length(const CubeDiameters& diams, const WhitneyDecomposition& decomp,
                                     const CurveModel& curve);
DiscreteLengthReport discrete_length(const MappingModel& f, const WhitneyDecomposition& decomp,
                                     const DomainModel& domain, const CurveModel& curve);

struct BoundaryLimit {
  bool converged = false;
  int level = 0;              // N: coarsest level with closure tail below tol
  double error_radius = 0.0;  // tail sum from N
  std::vector<double> value;  // f at the first interior vertex
  Id vertex = kNoId;
  int stuck_level = 0;        // deepest level when divergent
  double final_tail = 0.0;    // tail at the deepest level
};
BoundaryLimit boundary_limit(const MappingModel& f, const DiscreteLengthReport& length, const CurveModel& curve,
                             const DomainModel& domain, double tol);

enum class ClassTag { kA1, kA2 };
const char* class_name(ClassTag tag);

struct BallRow {
  Id center = kNoId;
  double r = 0.0;
  double image_diameter = 0.0;
  double integral = 0.0;  // int over sigma B of alpha d nu
  double log_factor = 1.0;
  double ratio = 0.0;
};

struct ClassEstimate {
  ClassTag tag = ClassTag::kA1;
  double sigma = 1.5;
  double C = 0.0;
  std::size_t tested = 0;
  std::size_t skipped = 0;
  std::vector<BallRow> rows;
};

// Balls with d(center) <= sigma r + 2 eps are skipped; A2 also skips 2r >= 1.
// Throws "no-admissible-balls" when every ball is skipped.
ClassEstimate estimate_class_constant(const MappingModel& f, const DomainModel& domain, const std::vector<double>& alpha,
                                      double sigma, ClassTag tag, const std::vector<std::pair<Id, double>>& balls);
std::vector<std::pair<Id, double>> random_balls(const DomainModel& domain, std::size_t count,
                                                const std::vector<double>& radii, std::uint64_t seed);

struct ExceptionalReport {
  double threshold = 0.0;
  std::vector<Id> ids;  // boundary ids with l_d >= threshold
  double content = 0.0; // greedy-cover upper bound for the h-content
  double scale = 0.0;   // cover radius attaining it
  std::string note;
};

// Lengths per boundary id (closure column). Thresholds are processed in
// ascending order and contents carried as a running minimum.
std::vector<ExceptionalReport> exceptional_content(const std::vector<std::pair<Id, double>>& lengths,
                                                   const DomainModel& domain, const GaugeFunction& h,
                                                   std::vector<double> thresholds);
std::vector<std::pair<Id, double>> curve_lengths(const CubeDiameters& diams, const WhitneyDecomposition& decomp,
                                                 const CurveFamily& curves);

struct UniquenessScale {
  double s = 0.0;
  Id y1 = kNoId;
  Id y2 = kNoId;
  bool clearance_ok = false;  // c d(y_i) >= s - 2 eps for both points
  std::vector<int> chain;
  double chain_estimate = 0.0;   // sum of image distances along the chain points
  double dominant = 0.0;         // max_i (int_{sigma B^Q_i} alpha)^(1/q) log(1/diam Q_i)^(1/q)
  double image_gap = 0.0;        // d2(f(y1), f(y2))
  std::size_t ball_misses = 0;   // consecutive chain points outside both sigma-balls
};

struct UniquenessOptions {
  double c = 2.0;  // John constant with phi(t) = t
  double sigma = 1.5;
  double tol = 1e-2;
  double uniform_c = 10.0;
  std::vector<std::pair<Id, Id>> uniform_pairs;
};

struct UniquenessReport {
  std::vector<UniquenessScale> scales;
  std::vector<double> limit1;
  std::vector<double> limit2;
  double gap = 0.0;
  bool unique = false;
  UniformReport uniform;
  bool uniform_hypothesis = false;
};

// Throws "uncertified-curve" and "no-chain".
UniquenessReport uniqueness_check(const MappingModel& f, const DomainModel& domain, const WhitneyDecomposition& decomp,
                                  Id xi, const CurveModel& gamma, const CurveModel& eta,
                                  const std::vector<double>& scales, const UniquenessOptions& options);

}  // namespace bext
