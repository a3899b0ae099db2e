#pragma once

#include <string>
#include <vector>

#include "bext/domain.hpp"

namespace bext {

struct CubeDisk {
  Id center = kNoId;
  double radius = 0.0;
  int level = 0;
  double value = 0.0;  // heatmap value, used by render_shadows_svg
};

// Planar figures with fixed formatting, so equal inputs give equal bytes.
// All throw "no-coordinates" for non-planar domains.
std::string render_cubes_svg(const DomainModel& domain, const std::vector<CubeDisk>& cubes);
std::string render_curves_svg(const DomainModel& domain, const std::vector<std::vector<Id>>& curves);
std::string render_shadows_svg(const DomainModel& domain, const std::vector<CubeDisk>& cubes);

}  // namespace bext
