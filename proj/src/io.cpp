#include "bext/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bext/error.hpp"

namespace bext {

namespace {

double parse_number(std::string_view s, const std::string& whole) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || s.empty())
    throw Error("bad-number", "cannot parse `" + whole + "`");
  return v;
}

}  // namespace

double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_number(text, text);
  const double num = parse_number(std::string_view(text).substr(0, slash), text);
  const double den = parse_number(std::string_view(text).substr(slash + 1), text);
  if (den == 0.0) throw Error("bad-number", "zero denominator in `" + text + "`");
  return num / den;
}

nlohmann::ordered_json domain_to_json(const DomainModel& domain, bool with_points) {
  nlohmann::ordered_json j;
  j["name"] = domain.name();
  j["epsilon"] = domain.epsilon();
  j["q"] = domain.q();
  j["boundary_spacing"] = domain.boundary_spacing();
  j["boundary_dim"] = domain.boundary_dim();
  j["center"] = domain.center();
  j["size"] = domain.space().size();
  j["interior"] = domain.interior();
  j["boundary"] = domain.boundary();
  const auto& space = domain.space();
  if (with_points && space.has_coordinates()) {
    j["dim"] = space.dim();
    j["points"] = space.coordinates();
  }
  return j;
}

void write_domain_json(std::ostream& out, const DomainModel& domain, bool with_points) {
  out << domain_to_json(domain, with_points).dump() << '\n';
}

DomainModel domain_from_json(const nlohmann::json& j, std::shared_ptr<const PointCloudSpace> space) {
  try {
    if (j.contains("points")) {
      space = std::make_shared<const PointCloudSpace>(
          PointCloudSpace::from_coordinates(j.at("points").get<std::vector<double>>(), j.at("dim").get<int>()));
    }
    if (!space) throw Error("bad-domain-file", "domain file has no points and no space was supplied");
    if (j.contains("size") && j.at("size").get<std::size_t>() != space->size())
      throw Error("bad-domain-file", "space size does not match the domain file");
    DomainModel::Options opt;
    opt.boundary_spacing = j.value("boundary_spacing", 0.0);
    opt.boundary_dim = j.value("boundary_dim", 1.0);
    opt.name = j.value("name", std::string());
    return DomainModel(std::move(space), j.at("interior").get<std::vector<Id>>(), j.at("boundary").get<std::vector<Id>>(),
                       j.at("center").get<Id>(), j.at("epsilon").get<double>(), j.at("q").get<double>(), opt);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-domain-file", e.what());
  }
}

DomainModel read_domain_json(std::istream& in, std::shared_ptr<const PointCloudSpace> space) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-domain-file", e.what());
  }
  return domain_from_json(j, std::move(space));
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("io-error", "cannot write " + path);
  out << text;
  if (!out) throw Error("io-error", "write failed for " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace bext
