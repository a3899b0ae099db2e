#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bext/dyadic.hpp"
#include "bext/generators.hpp"
#include "bext/trace.hpp"
#include "bext/whitney.hpp"

namespace bext {

struct GaugeSelection {
  std::string variant = "A1";  // A1 | A2 | uniqueness
  std::string h = "power";     // power | log
  double exponent = 1.0;
  double q = 0.0;  // 0: the domain's q
};

struct RunConfig {
  std::string domain = "square";
  std::string eps = "1/128";
  std::string boundary_spacing = "0";
  double s = 2.0;
  std::string domain_file;  // loads a domain instead of generating one
  std::string points_file;  // coordinates for a domain file without points

  WhitneyParams whitney;
  std::optional<double> john_scale;  // unset: generator hint
  std::optional<double> john_exponent;
  std::optional<double> john_c;

  std::string map = "identity";
  std::vector<GaugeSelection> gauges;  // empty: A1, A2, uniqueness with h(t) = t
  std::size_t curve_stride = 1;
  std::vector<double> thresholds{0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  double limit_tol = 0.5;
  std::size_t limit_samples = 50;
  std::size_t class_balls = 200;
  std::vector<double> class_radii;  // empty: 4 eps, 8 eps, 16 eps
  double sigma = 1.5;
  std::size_t qh_pairs = 100;

  bool uniqueness = false;
  std::vector<double> uniqueness_scales{0.125, 0.0625, 0.03125, 0.015625};
  double uniqueness_tol = 1e-2;
  double uniform_c = 10.0;
  std::size_t uniform_pairs = 20;

  std::string out = "bext-out";
  std::string format = "json";
  std::uint64_t seed = 1;

  double epsilon() const;
};

// Throws "bad-parameter" (or "bad-number") for any invalid setting.
void validate_config(const RunConfig& config);
// Overrides fields present in `j`. Throws "bad-config" for unknown keys.
void apply_config_json(RunConfig& config, const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& config);

struct InvariantResult {
  std::string name;
  bool ok = true;
  std::string witness;
};

// Runs the stages on demand, caching artifacts. Reports are pure functions
// of the config, so repeated runs give identical JSON.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);

  const RunConfig& config() const { return config_; }
  const DomainModel& domain();
  const CubeSystem& cubes();
  const WhitneyDecomposition& whitney();
  JohnProfile profile();
  const CurveFamily& curves();
  const MappingModel& mapping();
  const CubeDiameters& diameters();
  const ShadowMap& shadows();
  const AhlforsProfile& ahlfors();

  nlohmann::ordered_json section_domain();
  nlohmann::ordered_json section_decomposition();
  nlohmann::ordered_json section_curves();
  nlohmann::ordered_json section_shadows();
  nlohmann::ordered_json section_trace();
  nlohmann::ordered_json section_gauges();
  nlohmann::ordered_json section_content();
  nlohmann::ordered_json section_quasihyperbolic();
  nlohmann::ordered_json section_uniqueness();
  nlohmann::ordered_json section_constants();

  // All sections plus the invariant list.
  nlohmann::ordered_json full_report();

  // Per-level sums of the discrete length over the curve family.
  std::string levels_csv();

  // Writes exports and figures into config().out.
  void write_exports();
  void write_figures();

  const std::vector<InvariantResult>& invariants() const { return invariants_; }
  bool ok() const;

 private:
  void check(const std::string& name, bool ok, const std::string& witness = {});

  RunConfig config_;
  std::optional<DomainModel> domain_;
  std::optional<CubeSystem> cubes_;
  std::optional<WhitneyDecomposition> whitney_;
  std::optional<CurveFamily> curves_;
  std::vector<Id> missing_curves_;
  std::optional<MappingModel> mapping_;
  std::optional<CubeDiameters> diameters_;
  std::optional<ShadowMap> shadows_;
  std::optional<AhlforsProfile> ahlfors_;
  std::vector<InvariantResult> invariants_;
};

nlohmann::ordered_json invariants_to_json(const std::vector<InvariantResult>& inv);

}  // namespace bext
