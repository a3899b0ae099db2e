#pragma once

#include <string>
#include <vector>

#include "bext/domain.hpp"

namespace bext {

// Sampled model domains. Interior samples lie on the grid epsilon * Z^d,
// except for an off-grid sample added next to a boundary sample the grid
// leaves without an interior sample within the link radius. Boundary samples
// are placed separately with spacing `boundary_spacing` (0 means epsilon).
// Grids require 1/epsilon to be an integer.
DomainModel make_square(double epsilon, double boundary_spacing = 0.0);
DomainModel make_rectangle(double width, double height, double epsilon, double boundary_spacing = 0.0);
DomainModel make_disc(double epsilon, double boundary_spacing = 0.0);
// Unit disc minus the radial slit [0,1] x {0}; center (-1/2, 0).
DomainModel make_slit_disc(double epsilon, double boundary_spacing = 0.0);
// Outward cusp {0 < x < 1, |y| < x^s}, truncated where the aperture reaches
// 4 epsilon; the tip sample is the boundary point on the x-axis.
DomainModel make_cusp(double epsilon, double s, double boundary_spacing = 0.0);
// Annulus 1/2 < |z| < 1 with center (3/4, 0).
DomainModel make_annulus(double epsilon, double boundary_spacing = 0.0);
// Interval (0,1) with q = 1.
DomainModel make_segment(double epsilon);

struct GeneratorSpec {
  std::string name = "square";
  double epsilon = 1.0 / 128.0;
  double boundary_spacing = 0.0;
  double s = 2.0;  // cusp exponent
};

// Throws "unknown-generator".
DomainModel generate_domain(const GeneratorSpec& spec);
const std::vector<std::string>& generator_names();

// Profile phi(t) = scale * t^exponent with John constant c that the
// generator's domains are expected to satisfy.
struct JohnHint {
  double scale = 1.0;
  double exponent = 1.0;
  double c = 2.0;
};
JohnHint john_hint(const GeneratorSpec& spec);

// Boundary sample nearest to a coordinate tuple.
Id nearest_boundary(const DomainModel& domain, std::vector<double> p);
// Interior sample nearest to a coordinate tuple.
Id nearest_interior(const DomainModel& domain, std::vector<double> p);

}  // namespace bext
