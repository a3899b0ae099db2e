#include "bext/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bext/error.hpp"

namespace bext {

namespace {

constexpr int kWidth = 800;
constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"};

class Canvas {
 public:
  explicit Canvas(const DomainModel& domain) : domain_(domain) {
    const auto& space = domain.space();
    if (space.dim() != 2) throw Error("no-coordinates", "rendering needs planar coordinates");
    double lo[2] = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    double hi[2] = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto p = space.point(static_cast<Id>(i));
      for (int d = 0; d < 2; ++d) {
        lo[d] = std::min(lo[d], p[d]);
        hi[d] = std::max(hi[d], p[d]);
      }
    }
    const double pad = 0.05 * std::max(hi[0] - lo[0], hi[1] - lo[1]);
    x0_ = lo[0] - pad;
    y1_ = hi[1] + pad;
    const double span = std::max(hi[0] - lo[0], hi[1] - lo[1]) + 2.0 * pad;
    scale_ = span > 0.0 ? kWidth / span : 1.0;
    height_ = static_cast<int>(std::ceil((hi[1] - lo[1] + 2.0 * pad) * scale_));
    width_ = static_cast<int>(std::ceil((hi[0] - lo[0] + 2.0 * pad) * scale_));
    emit("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n", width_, height_,
         width_, height_);
    emit("<rect width=\"%d\" height=\"%d\" fill=\"#ffffff\"/>\n", width_, height_);
  }

  double x(Id id) const { return (domain_.space().point(id)[0] - x0_) * scale_; }
  double y(Id id) const { return (y1_ - domain_.space().point(id)[1]) * scale_; }
  double len(double r) const { return r * scale_; }

  template <class... Args>
  void emit(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    out_ += buf;
  }

  void boundary() {
    out_ += "<g fill=\"#000000\">\n";
    for (Id b : domain_.boundary()) emit("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"1.2\"/>\n", x(b), y(b));
    out_ += "</g>\n";
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  const DomainModel& domain_;
  double x0_ = 0.0, y1_ = 0.0, scale_ = 1.0;
  int width_ = kWidth, height_ = kWidth;
  std::string out_;
};

}  // namespace

std::string render_cubes_svg(const DomainModel& domain, const std::vector<CubeDisk>& cubes) {
  Canvas c(domain);
  c.emit("<g fill=\"none\" stroke-width=\"0.6\">\n");
  for (const auto& q : cubes) {
    const char* color = kPalette[static_cast<std::size_t>(((q.level % 8) + 8) % 8)];
    c.emit("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\" stroke=\"%s\"/>\n", c.x(q.center), c.y(q.center),
           std::max(c.len(q.radius), 0.5), color);
  }
  c.emit("</g>\n");
  c.boundary();
  return c.finish();
}

std::string render_curves_svg(const DomainModel& domain, const std::vector<std::vector<Id>>& curves) {
  Canvas c(domain);
  c.boundary();
  c.emit("<g fill=\"none\" stroke=\"#3366cc\" stroke-width=\"0.8\" stroke-opacity=\"0.7\">\n");
  for (const auto& curve : curves) {
    if (curve.empty()) continue;
    c.emit("<polyline points=\"");
    for (std::size_t i = 0; i < curve.size(); ++i) c.emit(i ? " %.3f,%.3f" : "%.3f,%.3f", c.x(curve[i]), c.y(curve[i]));
    c.emit("\"/>\n");
  }
  c.emit("</g>\n");
  c.emit("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"#cc0000\"/>\n", c.x(domain.center()), c.y(domain.center()));
  return c.finish();
}

std::string render_shadows_svg(const DomainModel& domain, const std::vector<CubeDisk>& cubes) {
  Canvas c(domain);
  double top = 0.0;
  for (const auto& q : cubes) top = std::max(top, q.value);
  c.emit("<g stroke=\"none\">\n");
  for (const auto& q : cubes) {
    const double t = top > 0.0 ? q.value / top : 0.0;
    const int red = static_cast<int>(std::lround(255.0 * t));
    const int blue = 255 - red;
    c.emit("<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\" fill=\"#%02x40%02x\" fill-opacity=\"0.6\"/>\n", c.x(q.center),
           c.y(q.center), std::max(c.len(q.radius), 0.8), red, blue);
  }
  c.emit("</g>\n");
  c.boundary();
  return c.finish();
}

}  // namespace bext
