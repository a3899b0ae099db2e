#include "bext/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "bext/error.hpp"

namespace bext {

namespace {

constexpr double kTailPower = 1.05;
constexpr double kLogUMax = 27.631021115928547;  // log(1e12)

double log_phi(const JohnProfile& p, double lt) {
  if (p.table_t.empty()) return std::log(p.scale) + p.exponent * lt;
  return std::log(p.phi(std::exp(lt)));
}

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40);
}

}  // namespace

GaugeFunction GaugeFunction::table(std::vector<double> t, std::vector<double> h) {
  if (t.size() != h.size() || t.size() < 2 || t.front() != 0.0 || h.front() != 0.0)
    throw Error("bad-gauge", "table must start at (0, 0) and have at least two nodes");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]) || !(h[i] > h[i - 1])) throw Error("bad-gauge", "table must be increasing");
  return {Kind::kTable, 0.0, std::move(t), std::move(h)};
}

double GaugeFunction::value(double t) const {
  if (t <= 0.0) return 0.0;
  if (kind == Kind::kTable) {
    auto it = std::upper_bound(table_t.begin(), table_t.end(), t);
    std::size_t i = static_cast<std::size_t>(it - table_t.begin());
    if (i >= table_t.size()) i = table_t.size() - 1;
    return table_h[i - 1] + (table_h[i] - table_h[i - 1]) * (t - table_t[i - 1]) / (table_t[i] - table_t[i - 1]);
  }
  return std::exp(log_value(std::log(t)));
}

double GaugeFunction::log_value(double lt) const {
  switch (kind) {
    case Kind::kPower:
      return exponent * lt;
    case Kind::kLog:
      return -lt >= 1.0 ? -exponent * std::log(-lt) : 0.0;
    case Kind::kTable:
      break;
  }
  return std::log(value(std::exp(lt)));
}

std::string GaugeFunction::formula() const {
  std::ostringstream s;
  s.precision(17);
  switch (kind) {
    case Kind::kPower:
      s << "h(t) = t^" << exponent;
      break;
    case Kind::kLog:
      s << "h(t) = (log 1/t)^(-" << exponent << ") for t <= 1/e, 1 beyond";
      break;
    case Kind::kTable:
      s << "h = table(" << table_t.size() << " nodes)";
      break;
  }
  return s.str();
}

double gauge_doubling_constant(const GaugeFunction& h, double t_min, std::size_t samples) {
  double best = 1.0;
  const double lo = std::log(t_min), hi = std::log(0.5);
  for (std::size_t i = 0; i <= samples; ++i) {
    const double lt = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples);
    best = std::max(best, std::exp(h.log_value(lt + std::log(2.0)) - h.log_value(lt)));
  }
  return best;
}

const char* variant_name(GaugeVariant v) {
  switch (v) {
    case GaugeVariant::kA1:
      return "A1";
    case GaugeVariant::kA2:
      return "A2";
    case GaugeVariant::kUniqueness:
      return "uniqueness";
  }
  return "";
}

GaugeVariant parse_variant(const std::string& name) {
  if (name == "A1" || name == "a1") return GaugeVariant::kA1;
  if (name == "A2" || name == "a2") return GaugeVariant::kA2;
  if (name == "uniqueness" || name == "U" || name == "u") return GaugeVariant::kUniqueness;
  throw Error("unknown-variant", "unknown gauge variant `" + name + "`");
}

GaugeVerdict gauge_integral(const JohnProfile& phi, const GaugeFunction& h, double q, GaugeVariant variant) {
  if (!(q > 1.0)) throw Error("exponent-out-of-range", "q must exceed 1");
  const double r = 1.0 / (q - 1.0);
  // log of the integrand in u = log(1/t), so dt/t = du.
  auto log_g = [&](double u) {
    if (u <= 0.0) u = 0.0;
    const double lt = -u;
    if (variant == GaugeVariant::kUniqueness) {
      if (u == 0.0) return -std::numeric_limits<double>::infinity();
      return r * (h.log_value(lt) + std::log(u));
    }
    const double lp = log_phi(phi, lt);
    double v = q * (lp - lt) + r * h.log_value(lp);
    if (variant == GaugeVariant::kA2) v += u == 0.0 ? -std::numeric_limits<double>::infinity() : r * std::log(u);
    return v;
  };

  GaugeVerdict out;
  std::ostringstream name;
  name.precision(17);
  switch (variant) {
    case GaugeVariant::kA1:
      name << "int_0^1 [phi(t)/t]^q h(phi(t))^(1/(q-1)) dt/t";
      break;
    case GaugeVariant::kA2:
      name << "int_0^1 [phi(t)/t]^q h(phi(t))^(1/(q-1)) (log 1/t)^(1/(q-1)) dt/t";
      break;
    case GaugeVariant::kUniqueness:
      name << "int_0^1 [h(t) log 1/t]^(1/(q-1)) dt/t";
      break;
  }
  name << " with phi = " << phi.formula() << ", " << h.formula() << ", q = " << q;
  out.integral = name.str();

  const double U = std::exp(kLogUMax);
  const double a = log_g(0.5 * U), b = log_g(U);
  if (b == -std::numeric_limits<double>::infinity() || b < -700.0) {
    out.tail_power = std::numeric_limits<double>::infinity();
  } else {
    out.tail_power = -(b - a) / std::log(2.0);
  }
  out.finite = out.tail_power > kTailPower;
  if (!out.finite) {
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  auto g = [&](double u) { return std::exp(log_g(u)); };
  // u in [0, 1] directly, then u = e^s up to U, then the power tail.
  const double head = integrate(g, 0.0, 1.0, 1e-12);
  auto gs = [&](double s) { return g(std::exp(s)) * std::exp(s); };
  double body = 0.0;
  for (double s = 0.0; s < kLogUMax; s += 0.5) body += integrate(gs, s, std::min(s + 0.5, kLogUMax), 1e-13);
  double tail = 0.0;
  if (std::isfinite(out.tail_power)) tail = std::exp(b) * U / (out.tail_power - 1.0);
  out.value = head + body + tail;
  return out;
}

}  // namespace bext
