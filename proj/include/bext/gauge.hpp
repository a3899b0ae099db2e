#pragma once

#include <string>
#include <vector>

#include "bext/john.hpp"

namespace bext {

/// Increasing gauge h with h(0) = 0: t^alpha, the log gauge
/// (log 1/t)^(-beta) on (0, 1/e] and 1 beyond, or a monotone table.
struct GaugeFunction {
  enum class Kind { kPower, kLog, kTable };
  Kind kind = Kind::kPower;
  double exponent = 1.0;  // alpha or beta
  std::vector<double> table_t;
  std::vector<double> table_h;

  static GaugeFunction power(double alpha) { return {Kind::kPower, alpha, {}, {}}; }
  static GaugeFunction log(double beta) { return {Kind::kLog, beta, {}, {}}; }
  // Throws "bad-gauge" unless the table starts at (0, 0) and increases.
  static GaugeFunction table(std::vector<double> t, std::vector<double> h);

  double value(double t) const;
  // log h(e^lt), accurate far below the range of double t.
  double log_value(double lt) const;
  std::string formula() const;
};

// max h(2t) / h(t) over a geometric grid of (t_min, 1/2].
double gauge_doubling_constant(const GaugeFunction& h, double t_min = 1e-12, std::size_t samples = 256);

enum class GaugeVariant { kA1, kA2, kUniqueness };
const char* variant_name(GaugeVariant v);
// Throws "unknown-variant".
GaugeVariant parse_variant(const std::string& name);

struct GaugeVerdict {
  bool finite = false;
  double value = 0.0;       // quadrature value when finite
  double tail_power = 0.0;  // fitted p with integrand ~ u^(-p), u = log(1/t)
  std::string integral;
};

// Integrals over (0,1] in u = log(1/t):
//   A1: [phi(t)/t]^q h(phi(t))^(1/(q-1)) dt/t
//   A2: A1 integrand times (log 1/t)^(1/(q-1))
//   uniqueness: [h(t) log 1/t]^(1/(q-1)) dt/t
// Finite iff the fitted tail power exceeds 1.05. Throws "exponent-out-of-range" for q <= 1.
GaugeVerdict gauge_integral(const JohnProfile& phi, const GaugeFunction& h, double q, GaugeVariant variant);

}  // namespace bext
