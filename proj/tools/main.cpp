#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bext/error.hpp"
#include "bext/io.hpp"
#include "bext/pipeline.hpp"
#include "bext/render.hpp"

namespace {

using bext::Pipeline;
using bext::RunConfig;
using ojson = nlohmann::ordered_json;

struct Flags {
  RunConfig config;
  std::string config_file;
  std::string delta, c1, C1, a;
  std::string john_scale, john_exponent;
  double john_c = 0.0;
  std::vector<std::string> gauges;
  std::string render_dir;
};

void add_common(CLI::App* cmd, Flags& f) {
  auto& c = f.config;
  cmd->add_option("--config", f.config_file, "JSON config; its keys override flags");
  cmd->add_option("--domain", c.domain, "square | disc | slit-disc | cusp | annulus");
  cmd->add_option("--domain-file", c.domain_file, "load a domain JSON instead of generating");
  cmd->add_option("--points-file", c.points_file, "CSV coordinates for a domain file without points");
  cmd->add_option("--eps", c.eps, "sampling resolution, fractions allowed");
  cmd->add_option("--boundary-spacing", c.boundary_spacing, "boundary sample spacing (0: eps)");
  cmd->add_option("--s", c.s, "cusp exponent");
  cmd->add_option("--delta", f.delta, "Whitney delta");
  cmd->add_option("--c1", f.c1, "Whitney c1");
  cmd->add_option("--C1", f.C1, "Whitney C1");
  cmd->add_option("--a", f.a, "Whitney a");
  cmd->add_option("--john-scale", f.john_scale, "profile phi(t) = K t^e, K");
  cmd->add_option("--john-exponent", f.john_exponent, "profile exponent e");
  cmd->add_option("--john-c", f.john_c, "John constant c");
  cmd->add_option("--map", c.map, "constant | identity | square-z | angle | oscillate | radial-log");
  cmd->add_option("--stride", c.curve_stride, "build curves for every n-th boundary sample");
  cmd->add_option("--limit-tol", c.limit_tol, "boundary limit tolerance");
  cmd->add_option("--limit-samples", c.limit_samples, "curves sampled for boundary limits");
  cmd->add_option("--sigma", c.sigma, "class ball enlargement");
  cmd->add_option("--uniform-c", c.uniform_c, "uniform domain constant to test");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--format", c.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", c.seed, "random seed");
}

RunConfig resolve(Flags& f) {
  RunConfig c = f.config;
  if (!f.delta.empty()) c.whitney.delta = bext::parse_fraction(f.delta);
  if (!f.c1.empty()) c.whitney.c1 = bext::parse_fraction(f.c1);
  if (!f.C1.empty()) c.whitney.C1 = bext::parse_fraction(f.C1);
  if (!f.a.empty()) c.whitney.a = bext::parse_fraction(f.a);
  if (!f.john_scale.empty()) c.john_scale = bext::parse_fraction(f.john_scale);
  if (!f.john_exponent.empty()) c.john_exponent = bext::parse_fraction(f.john_exponent);
  if (f.john_c > 0.0) c.john_c = f.john_c;
  for (const auto& spec : f.gauges) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
    if (parts.size() < 3 || parts.size() > 4) throw bext::Error("bad-parameter", "gauge must be variant:h:exponent[:q]");
    bext::GaugeSelection g;
    g.variant = parts[0];
    g.h = parts[1];
    g.exponent = bext::parse_fraction(parts[2]);
    if (parts.size() == 4) g.q = bext::parse_fraction(parts[3]);
    c.gauges.push_back(g);
  }
  if (!f.config_file.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bext::read_text_file(f.config_file));
    } catch (const nlohmann::json::exception& e) {
      throw bext::Error("bad-config", e.what());
    }
    bext::apply_config_json(c, j);
  }
  bext::validate_config(c);
  return c;
}

std::string csv_rows(const ojson& rows) {
  if (!rows.is_array() || rows.empty()) return {};
  std::ostringstream s;
  bool first = true;
  for (const auto& [k, v] : rows.front().items()) {
    s << (first ? "" : ",") << k;
    first = false;
  }
  s << '\n';
  for (const auto& r : rows) {
    first = true;
    for (const auto& [k, v] : r.items()) {
      s << (first ? "" : ",") << (v.is_string() ? v.get<std::string>() : v.dump());
      first = false;
    }
    s << '\n';
  }
  return s.str();
}

int finish(Pipeline& p, const std::string& name, const ojson& section, const std::string& csv) {
  ojson out;
  out["command"] = name;
  out["config"] = bext::config_to_json(p.config());
  out[name] = section;
  out["invariants"] = bext::invariants_to_json(p.invariants());
  out["ok"] = p.ok();
  bext::write_text_file(p.config().out + "/" + name + ".json", out.dump(2) + "\n");
  if (p.config().format == "csv" && !csv.empty()) std::cout << csv;
  else std::cout << out.dump(2) << '\n';
  int bad = 0;
  for (const auto& r : p.invariants())
    if (!r.ok) {
      std::cerr << "invariant violated: " << r.name << ": " << r.witness << '\n';
      ++bad;
    }
  return bad == 0 ? 0 : 1;
}

int cmd_generate(const RunConfig& c) {
  Pipeline p(c);
  const auto& d = p.domain();
  std::ostringstream s;
  bext::write_domain_json(s, d);
  bext::write_text_file(c.out + "/domain.json", s.str());
  const auto& f = p.mapping();
  const auto prof = p.profile();
  ojson m;
  m["domain"] = d.name();
  m["q"] = d.q();
  m["samples"] = d.space().size();
  m["map"] = f.name;
  m["formula"] = f.formula;
  m["alpha"] = f.alpha_formula;
  m["defined_on_boundary"] = f.defined_on_boundary;
  m["john"] = {{"phi", prof.formula()},
               {"scale", prof.scale},
               {"exponent", prof.exponent},
               {"c", prof.c},
               {"length_john", prof.exponent < 1.0}};
  m["seed"] = c.seed;
  bext::write_text_file(c.out + "/map.json", m.dump(2) + "\n");
  std::cout << m.dump(2) << '\n';
  return 0;
}

int cmd_report(const RunConfig& c) {
  Pipeline p(c);
  const ojson r = p.full_report();
  bext::write_text_file(c.out + "/report.json", r.dump(2) + "\n");
  p.write_exports();
  p.write_figures();
  if (c.format == "csv") std::cout << p.levels_csv();
  else std::cout << ojson({{"ok", r["ok"]}, {"invariants", r["invariants"]}}).dump(2) << '\n';
  int bad = 0;
  for (const auto& inv : p.invariants())
    if (!inv.ok) {
      std::cerr << "invariant violated: " << inv.name << ": " << inv.witness << '\n';
      ++bad;
    }
  return bad == 0 ? 0 : 1;
}

std::vector<ojson> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bext::Error("io-error", "cannot read " + path);
  std::vector<ojson> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(ojson::parse(line));
  return rows;
}

int cmd_render(const std::string& dir, const std::string& out) {
  std::ifstream in(dir + "/domain.json");
  if (!in) throw bext::Error("io-error", "cannot read " + dir + "/domain.json");
  const auto d = bext::read_domain_json(in);
  if (d.space().dim() != 2) throw bext::Error("no-coordinates", "rendering needs planar coordinates");
  std::vector<std::string> written;
  auto disks = [](const std::vector<ojson>& rows, const char* value) {
    std::vector<bext::CubeDisk> v;
    for (const auto& r : rows)
      v.push_back({r.at("center").get<bext::Id>(), r.at("outer_radius").get<double>(), r.at("level").get<int>(),
                   value ? r.at(value).get<double>() : 0.0});
    return v;
  };
  std::error_code ec;
  if (std::filesystem::exists(dir + "/whitney.jsonl", ec)) {
    bext::write_text_file(out + "/whitney.svg", bext::render_cubes_svg(d, disks(read_jsonl(dir + "/whitney.jsonl"), nullptr)));
    written.push_back(out + "/whitney.svg");
  }
  if (std::filesystem::exists(dir + "/curves.jsonl", ec)) {
    std::vector<std::vector<bext::Id>> lines;
    for (const auto& r : read_jsonl(dir + "/curves.jsonl")) lines.push_back(r.at("vertices").get<std::vector<bext::Id>>());
    bext::write_text_file(out + "/curves.svg", bext::render_curves_svg(d, lines));
    written.push_back(out + "/curves.svg");
  }
  if (std::filesystem::exists(dir + "/shadows.jsonl", ec)) {
    bext::write_text_file(out + "/shadows.svg",
                          bext::render_shadows_svg(d, disks(read_jsonl(dir + "/shadows.jsonl"), "shadow_diameter")));
    written.push_back(out + "/shadows.svg");
  }
  std::cout << ojson({{"written", written}}).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary behavior toolkit on sampled metric domains"};
  app.require_subcommand(1);
  Flags f;
  if (const char* root = std::getenv("BEXT_OUTPUT_ROOT")) f.config.out = root;

  const char* names[] = {"generate", "decompose", "curves", "shadows", "trace",
                         "gauges",   "uniqueness", "report", "pipeline"};
  std::map<std::string, CLI::App*> cmds;
  for (const char* n : names) {
    auto* cmd = app.add_subcommand(n);
    add_common(cmd, f);
    cmds[n] = cmd;
  }
  cmds["generate"]->description("write domain.json and map.json");
  cmds["decompose"]->description("dyadic cubes and the Whitney decomposition");
  cmds["curves"]->description("John curves from every boundary sample");
  cmds["shadows"]->description("shadows and their level bounds");
  cmds["trace"]->description("discrete lengths, boundary limits, class constants");
  cmds["gauges"]->description("gauge integral verdicts");
  cmds["uniqueness"]->description("uniqueness of boundary limits along two curves");
  cmds["report"]->description("full pipeline with exports and figures");
  cmds["pipeline"]->description("alias of report");
  cmds["gauges"]->add_option("--gauge", f.gauges, "gauge as variant:h:exponent[:q], e.g. A1:power:1 or uniqueness:log:4:3");
  auto* render = app.add_subcommand("render", "SVG figures from an exported directory");
  render->add_option("dir", f.render_dir, "directory holding domain.json and *.jsonl exports")->required();
  render->add_option("--out", f.config.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed()) return cmd_render(f.render_dir, f.config.out);
    if (cmds["uniqueness"]->parsed()) f.config.uniqueness = true;
    const RunConfig c = resolve(f);
    if (cmds["generate"]->parsed()) return cmd_generate(c);
    if (cmds["report"]->parsed() || cmds["pipeline"]->parsed()) return cmd_report(c);
    Pipeline p(c);
    if (cmds["decompose"]->parsed()) {
      const auto s = p.section_decomposition();
      std::ostringstream cubes, whitney;
      bext::export_cubes_jsonl(cubes, p.cubes(), false);
      bext::export_whitney_jsonl(whitney, p.whitney());
      bext::write_text_file(c.out + "/cubes.jsonl", cubes.str());
      bext::write_text_file(c.out + "/whitney.jsonl", whitney.str());
      return finish(p, "decompose", s, csv_rows(s["whitney"]["levels"]));
    }
    if (cmds["curves"]->parsed()) return finish(p, "curves", p.section_curves(), {});
    if (cmds["shadows"]->parsed()) {
      const auto s = p.section_shadows();
      return finish(p, "shadows", s, csv_rows(s["level_sums"]["rows"]));
    }
    if (cmds["trace"]->parsed()) {
      const auto s = p.section_trace();
      bext::write_text_file(c.out + "/levels.csv", p.levels_csv());
      return finish(p, "trace", s, p.levels_csv());
    }
    if (cmds["gauges"]->parsed()) {
      const auto s = p.section_gauges();
      return finish(p, "gauges", s, csv_rows(s));
    }
    if (cmds["uniqueness"]->parsed()) {
      const auto s = p.section_uniqueness();
      return finish(p, "uniqueness", s, csv_rows(s.value("scales", ojson::array())));
    }
  } catch (const bext::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
