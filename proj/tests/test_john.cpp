#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bext/error.hpp"
#include "bext/generators.hpp"
#include "bext/john.hpp"
#include "bext/whitney.hpp"

using namespace bext;

namespace {

// Boundary sample of the cusp with the smallest x on the axis.
Id cusp_tip(const DomainModel& d) {
  Id tip = kNoId;
  for (Id b : d.boundary()) {
    const auto p = d.space().point(b);
    if (std::abs(p[1]) < 1e-12 && (tip == kNoId || p[0] < d.space().point(tip)[0])) tip = b;
  }
  return tip;
}

}  // namespace

TEST_SUITE("john") {
  TEST_CASE("profiles") {
    const auto id = JohnProfile::identity(2);
    CHECK(id.phi(0.0) == 0.0);
    CHECK(id.phi(0.3) == doctest::Approx(0.3));
    const auto root = JohnProfile::power(2.0, 0.5, 1);
    CHECK(root.phi(0.25) == doctest::Approx(1.0));
    CHECK(validate_profile(id, 1.0));
    CHECK(validate_profile(root, 1.0));
    CHECK_FALSE(validate_profile(JohnProfile::power(0.5, 1.0, 1), 1.0));  // phi(t) < t
    const auto tab = JohnProfile::from_table({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}, 1);
    CHECK(tab.phi(0.5) == doctest::Approx(1.0));
    CHECK(tab.phi(1.5) == doctest::Approx(2.5));
    CHECK(tab.phi(3.0) == doctest::Approx(4.0));
    CHECK_THROWS_WITH_AS(JohnProfile::from_table({0.0, 1.0}, {0.0, -1.0}, 1), doctest::Contains("bad-profile"), Error);
    CHECK_THROWS_WITH_AS(JohnProfile::from_table({1.0, 0.0}, {0.0, 1.0}, 1), doctest::Contains("bad-profile"), Error);
  }

  TEST_CASE("verification against hand-built curves") {
    const double eps = 1.0 / 64.0;
    const auto disc = make_disc(eps);
    SUBCASE("radial segment on the disc passes with phi(t) = t, c = 1") {
      std::vector<Id> v{nearest_boundary(disc, {1.0, 0.0})};
      for (int i = 63; i >= 0; --i) v.push_back(nearest_interior(disc, {i * eps, 0.0}));
      REQUIRE(v.back() == disc.center());
      const auto cert = verify_john_curve(disc, make_curve(disc.space(), v), JohnProfile::identity(1));
      CHECK(cert.margin >= -2 * eps);
      CHECK(cert.pass);
    }
    SUBCASE("constant curve at the center") {
      const auto cert = verify_john_curve(disc, make_curve(disc.space(), {disc.center()}), JohnProfile::identity(1));
      CHECK(cert.margin == doctest::Approx(disc.dist_to_boundary(disc.center())));
      CHECK(cert.pass);
    }
    SUBCASE("a curve hugging the boundary fails") {
      const auto sq = make_square(eps);
      std::vector<Id> v;
      for (int j = 1; j <= 63; ++j) v.push_back(nearest_interior(sq, {eps, j * eps}));
      for (int i = 2; i <= 32; ++i) v.push_back(nearest_interior(sq, {i * eps, 63 * eps}));
      for (int j = 62; j >= 32; --j) v.push_back(nearest_interior(sq, {32 * eps, j * eps}));
      REQUIRE(v.back() == sq.center());
      const auto cert = verify_john_curve(sq, make_curve(sq.space(), v), JohnProfile::identity(1));
      CHECK_FALSE(cert.pass);
      CHECK(cert.margin < -0.5);
    }
    SUBCASE("curves must end at the center") {
      const auto c = make_curve(disc.space(), {disc.interior()[0], disc.interior()[1]});
      CHECK_THROWS_WITH_AS(verify_john_curve(disc, c, JohnProfile::identity(1)), doctest::Contains("not-anchored"), Error);
    }
  }

  TEST_CASE("constructed curves verify and stay valid for larger c") {
    const auto disc = make_disc(1.0 / 64.0);
    const auto p3 = JohnProfile::identity(3);
    for (std::size_t i = 0; i < disc.boundary().size(); i += 17) {
      const Id xi = disc.boundary()[i];
      const auto curve = construct_john_curve(disc, xi, p3);
      CHECK(curve.vertices.front() == xi);
      CHECK(curve.vertices.back() == disc.center());
      for (std::size_t j = 1; j < curve.size(); ++j) {
        CHECK(curve.arclen[j] >= curve.arclen[j - 1]);
        CHECK(disc.space().distance(curve.vertices[j - 1], curve.vertices[j]) <= 2 * disc.epsilon());
      }
      CHECK(curve.length() == doctest::Approx(curve.arclen.back()));
      const auto cert = verify_john_curve(disc, curve, p3);
      CHECK(cert.pass);
      CHECK(verify_john_curve(disc, curve, JohnProfile::identity(6)).margin >= cert.margin);
    }
  }

  TEST_CASE("slit disc: the tip is reachable with a large enough c") {
    const auto slit = make_slit_disc(1.0 / 64.0);
    const Id tip = nearest_boundary(slit, {0.0, 0.0});
    const auto p = JohnProfile::identity(4);
    const auto curve = construct_john_curve(slit, tip, p);
    CHECK(verify_john_curve(slit, curve, p).pass);
    // The slit starts at the origin and the center is (-1/2, 0).
    CHECK(curve.length() == doctest::Approx(0.5).epsilon(0.1));
  }

  TEST_CASE("cusp tip needs the square-root profile") {
    const auto cusp = make_cusp(1.0 / 128.0, 2.0);
    const Id tip = cusp_tip(cusp);
    REQUIRE(tip != kNoId);
    const auto root = JohnProfile::power(2.0, 0.5, 1);
    const auto curve = construct_john_curve(cusp, tip, root);
    CHECK(verify_john_curve(cusp, curve, root).pass);
    CHECK_THROWS_WITH_AS(construct_john_curve(cusp, tip, JohnProfile::identity(1)), doctest::Contains("no-john-curve"),
                         Error);
  }

  TEST_CASE("waypoint curves pass through the waypoint") {
    const auto disc = make_disc(1.0 / 64.0);
    const Id xi = nearest_boundary(disc, {1.0, 0.0});
    const Id w = nearest_interior(disc, {0.6, 0.3});
    const auto p = JohnProfile::identity(4);
    const auto curve = construct_john_curve(disc, xi, w, p);
    CHECK(std::find(curve.vertices.begin(), curve.vertices.end(), w) != curve.vertices.end());
    CHECK(verify_john_curve(disc, curve, p).pass);
  }

  TEST_CASE("quasihyperbolic distance") {
    const auto disc = make_disc(1.0 / 128.0);
    const Id x = disc.center();
    CHECK(quasihyperbolic_distance(disc, x, x).value == 0.0);
    const Id y = nearest_interior(disc, {0.5, 0.0});
    // Oracle: int_0^{1/2} dt / (1 - t) by the midpoint rule.
    double oracle = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) oracle += (0.5 / n) / (1.0 - (i + 0.5) * 0.5 / n);
    CHECK(oracle == doctest::Approx(std::log(2.0)).epsilon(1e-8));
    const auto r = quasihyperbolic_distance(disc, x, y);
    CHECK(std::abs(r.value / oracle - 1.0) <= 0.1);
    CHECK(r.path.front() == x);
    CHECK(r.path.back() == y);
    CHECK(quasihyperbolic_distance(disc, y, x).value == r.value);
    CHECK_THROWS_WITH_AS(quasihyperbolic_distance(disc, x, disc.boundary().front()), doctest::Contains("not-interior"),
                         Error);

    // Triangle inequality on sampled triples.
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> pick(0, disc.interior().size() - 1);
    for (int t = 0; t < 10; ++t) {
      const Id a = disc.interior()[pick(rng)], b = disc.interior()[pick(rng)], c = disc.interior()[pick(rng)];
      CHECK(quasihyperbolic_distance(disc, a, c).value <=
            quasihyperbolic_distance(disc, a, b).value + quasihyperbolic_distance(disc, b, c).value + 1e-9);
    }
  }

  TEST_CASE("quasihyperbolic growth bound with one fitted constant on the square") {
    const auto sq = make_square(1.0 / 64.0);
    std::vector<QuasihyperbolicSample> samples;
    for (const auto& [x, y] : random_pairs(sq, 100, 5))
      samples.push_back({quasihyperbolic_distance(sq, x, y).value, sq.space().distance(x, y),
                         std::min(sq.dist_to_boundary(x), sq.dist_to_boundary(y))});
    const double C = fit_quasihyperbolic_constant(samples);
    CHECK(C >= 1.0);
    CHECK(std::isfinite(C));
    for (const auto& s : samples) CHECK(s.k <= quasihyperbolic_bound(C, s));
    // Hand value of the bound.
    const QuasihyperbolicSample s{0.0, 0.5, 0.25};
    CHECK(quasihyperbolic_bound(2.0, s) == doctest::Approx(2.0 * std::log(4.0) + 2.0));
    CHECK(quasihyperbolic_bound(0.25, s) == doctest::Approx(2.0));
  }

  TEST_CASE("chain length is comparable to quasihyperbolic distance on the disc") {
    const auto disc = make_disc(1.0 / 64.0);
    const WhitneyParams wp;
    const auto np = net_params_for(wp);
    const auto cs = build_cubes(disc.space(), build_nets(disc.space(), disc.interior(), np), np);
    const auto w = build_whitney(disc, cs, wp);
    double lo = 1e300, hi = 0.0;
    for (const auto& [x, y] : random_pairs(disc, 100, 12)) {
      const double ratio = static_cast<double>(cube_chain(w, x, y).size()) / (quasihyperbolic_distance(disc, x, y).value + 1.0);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    MESSAGE("chain / (k + 1) in [" << lo << ", " << hi << "]");
    CHECK(lo > 0.0);
    CHECK(std::isfinite(hi));
  }

  TEST_CASE("uniformity checks") {
    const auto disc = make_disc(1.0 / 64.0);
    const auto rep = check_uniform(disc, 10.0, random_pairs(disc, 30, 3));
    CHECK(rep.pass_fraction == 1.0);
    CHECK(rep.witnesses.empty());
    const Id x = disc.interior()[100];
    CHECK(check_uniform(disc, 1.0, {{x, x}}).pass_fraction == 1.0);

    const double eps = 1.0 / 64.0;
    const auto slit = make_slit_disc(eps);
    const Id above = nearest_interior(slit, {0.5, eps}), below = nearest_interior(slit, {0.5, -eps});
    const auto srep = check_uniform(slit, 10.0, {{above, below}});
    CHECK(srep.pass_fraction == 0.0);
    REQUIRE(srep.witnesses.size() == 1);
    CHECK(srep.witnesses[0].x1 == above);
    CHECK_FALSE(srep.witnesses[0].pass);
    // Near the tip the detour is short and the pair passes.
    const Id ta = nearest_interior(slit, {eps, eps}), tb = nearest_interior(slit, {eps, -eps});
    CHECK(check_uniform(slit, 10.0, {{ta, tb}}).pass_fraction == 1.0);
  }

  TEST_CASE("curve JSON round trip") {
    const auto disc = make_disc(1.0 / 32.0);
    const auto curve = construct_john_curve(disc, disc.boundary()[3], JohnProfile::identity(3));
    std::stringstream s;
    write_curve_json(s, curve);
    const auto back = read_curve_json(s);
    CHECK(back.vertices == curve.vertices);
    CHECK(back.t == curve.t);
    CHECK(back.arclen == curve.arclen);
    std::istringstream bad("{\"vertices\": [1, 2]}");
    CHECK_THROWS_WITH_AS(read_curve_json(bad), doctest::Contains("bad-curve"), Error);
  }
}
