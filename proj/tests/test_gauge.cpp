#include <doctest.h>

#include <cmath>

#include "bext/error.hpp"
#include "bext/gauge.hpp"
#include "gauge_cells.hpp"

using namespace bext;

TEST_SUITE("gauge") {
  TEST_CASE("gauge functions") {
    const auto p = GaugeFunction::power(1.5);
    CHECK(p.value(0.0) == 0.0);
    CHECK(p.value(0.25) == doctest::Approx(0.125));
    const auto l = GaugeFunction::log(2.0);
    CHECK(l.value(std::exp(-3.0)) == doctest::Approx(1.0 / 9.0));
    CHECK(l.value(0.5) == 1.0);
    CHECK(l.log_value(-1e6) == doctest::Approx(-2.0 * std::log(1e6)));
    const auto t = GaugeFunction::table({0.0, 1.0, 2.0}, {0.0, 0.5, 2.0});
    CHECK(t.value(0.5) == doctest::Approx(0.25));
    CHECK(t.value(1.5) == doctest::Approx(1.25));
    CHECK_THROWS_WITH_AS(GaugeFunction::table({0.0, 1.0}, {0.0, 0.0}), doctest::Contains("bad-gauge"), Error);
    CHECK_THROWS_WITH_AS(GaugeFunction::table({0.5, 1.0}, {0.0, 1.0}), doctest::Contains("bad-gauge"), Error);
  }

  TEST_CASE("doubling constants") {
    CHECK(gauge_doubling_constant(GaugeFunction::power(1.0)) == doctest::Approx(2.0));
    CHECK(gauge_doubling_constant(GaugeFunction::power(2.5)) == doctest::Approx(std::pow(2.0, 2.5)));
    // Log gauge: the supremum (1 + ln 2)^beta is approached at t = 1/(2e).
    const double sup = std::pow(1.0 + std::log(2.0), 2.0);
    const double c = gauge_doubling_constant(GaugeFunction::log(2.0), 1e-12, 4096);
    CHECK(c <= sup * (1.0 + 1e-9));
    CHECK(c >= 0.95 * sup);
  }

  TEST_CASE("variants") {
    CHECK(parse_variant("A1") == GaugeVariant::kA1);
    CHECK(parse_variant("a2") == GaugeVariant::kA2);
    CHECK(parse_variant("uniqueness") == GaugeVariant::kUniqueness);
    CHECK(std::string(variant_name(GaugeVariant::kA2)) == "A2");
    CHECK_THROWS_WITH_AS(parse_variant("A3"), doctest::Contains("unknown-variant"), Error);
  }

  TEST_CASE("integrals match closed forms on the analytic cells") {
    for (const auto& cell : testing::gauge_cells()) {
      CAPTURE(cell.label);
      const auto v = gauge_integral(cell.phi, cell.h, cell.q, cell.variant);
      CHECK(v.finite == std::isfinite(cell.value));
      if (std::isfinite(cell.value)) CHECK(std::abs(v.value / cell.value - 1.0) <= 0.01);
      CHECK_FALSE(v.integral.empty());
    }
  }

  TEST_CASE("exponent out of range") {
    CHECK_THROWS_WITH_AS(gauge_integral(JohnProfile::identity(1), GaugeFunction::power(1.0), 1.0, GaugeVariant::kA1),
                         doctest::Contains("exponent-out-of-range"), Error);
    CHECK_THROWS_WITH_AS(gauge_integral(JohnProfile::identity(1), GaugeFunction::power(1.0), 0.5, GaugeVariant::kA2),
                         doctest::Contains("exponent-out-of-range"), Error);
  }
}
