#pragma once

#include <span>
#include <string>
#include <vector>

#include "bext/domain.hpp"
#include "bext/kernels.hpp"

namespace bext {

/// A map sampled on every space id, with a default density alpha on the
/// interior (aligned with domain.interior()).
struct MappingModel {
  std::string name;
  std::string formula;
  kernels::ImageTable image;
  bool defined_on_boundary = true;  // false when boundary rows are placeholders
  std::vector<double> alpha;
  std::string alpha_formula;

  std::span<const double> value(Id id) const { return image.row(id); }
  int target_dim() const { return image.dim; }
};

// Zoo: constant, identity, square-z, angle, oscillate, radial-log.
// Throws "unknown-map", and "no-coordinates" for planar maps on other spaces.
MappingModel make_mapping(const DomainModel& domain, const std::string& name);
const std::vector<std::string>& mapping_names();

// Frequency of the oscillating map sin(w log(1/d)): one period per halving of d.
double oscillation_frequency();

// Exact diameter of the images of `ids` (hull-based for planar targets).
double image_diameter(const kernels::ImageTable& image, std::span<const Id> ids);

}  // namespace bext
