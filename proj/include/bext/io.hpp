#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include <json.hpp>

#include "bext/domain.hpp"

namespace bext {

// "1/128", "0.25", "3". Throws "bad-number".
double parse_fraction(const std::string& text);

// Domain file: {name, epsilon, q, boundary_spacing, boundary_dim, center,
// interior, boundary, dim, points}. `points` (row-major coordinates) is
// written when the space has coordinates.
nlohmann::ordered_json domain_to_json(const DomainModel& domain, bool with_points = true);
void write_domain_json(std::ostream& out, const DomainModel& domain, bool with_points = true);

// Uses the embedded points when present, otherwise `space` (e.g. from a
// points CSV or a distance table). Throws "bad-domain-file".
DomainModel domain_from_json(const nlohmann::json& j, std::shared_ptr<const PointCloudSpace> space = nullptr);
DomainModel read_domain_json(std::istream& in, std::shared_ptr<const PointCloudSpace> space = nullptr);

// Writes `text` to `path`, creating parent directories. Throws "io-error".
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace bext
