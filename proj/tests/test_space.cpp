#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bext/error.hpp"
#include "bext/generators.hpp"
#include "bext/john.hpp"

using namespace bext;

namespace {

PointCloudSpace grid_1d(int n) {
  std::vector<double> xs;
  for (int i = 0; i <= n; ++i) xs.push_back(static_cast<double>(i) / n);
  return PointCloudSpace::from_coordinates(xs, 1);
}

PointCloudSpace grid_2d(int n) {
  std::vector<double> xs;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      xs.push_back(static_cast<double>(i) / n);
      xs.push_back(static_cast<double>(j) / n);
    }
  return PointCloudSpace::from_coordinates(xs, 2);
}

std::vector<Id> all_ids(const PointCloudSpace& s) {
  std::vector<Id> ids(s.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<Id>(i);
  return ids;
}

// Fewest open intervals of radius r/2 centered at samples covering the
// samples of B(x, r) on a sorted 1D grid: left-to-right greedy is optimal.
std::size_t optimal_cover_1d(const PointCloudSpace& s, Id x, double r) {
  std::vector<double> pts, centers;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s.point(static_cast<Id>(i))[0];
    if (std::abs(v - s.point(x)[0]) < r) pts.push_back(v);
    if (std::abs(v - s.point(x)[0]) < 1.5 * r) centers.push_back(v);
  }
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < pts.size()) {
    // Rightmost center still covering pts[i].
    double best = -1e300;
    for (double c : centers)
      if (std::abs(c - pts[i]) < 0.5 * r) best = std::max(best, c);
    ++n;
    while (i < pts.size() && std::abs(pts[i] - best) < 0.5 * r) ++i;
  }
  return n;
}

}  // namespace

TEST_SUITE("metric-core") {
  TEST_CASE("metric axioms hold on sampled triples for every metric kind") {
    const auto sq = make_square(1.0 / 64.0);
    CHECK(sq.space().check_metric_axioms(10000, 7) == 0);
    const auto g = grid_1d(32);
    std::vector<double> table(g.size() * g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) table[i * g.size() + j] = g.distance(static_cast<Id>(i), static_cast<Id>(j));
    const auto t = PointCloudSpace::from_table(table, g.size());
    CHECK(t.check_metric_axioms(10000, 3) == 0);
    const auto c = PointCloudSpace::from_callable(50, [](Id a, Id b) { return std::abs(std::sqrt(a) - std::sqrt(b)); });
    CHECK(c.check_metric_axioms(10000, 5) == 0);
    const auto bad = PointCloudSpace::from_callable(20, [](Id a, Id b) { return a == b ? 0.0 : (a + b == 3 ? 10.0 : 1.0); });
    CHECK(bad.check_metric_axioms(10000, 5) > 0);
  }

  TEST_CASE("diameter agrees with the all-pairs oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> xs;
    for (int i = 0; i < 400; ++i) xs.push_back(u(rng));
    const auto s = PointCloudSpace::from_coordinates(xs, 2);
    double oracle = 0.0;
    for (int i = 0; i < 200; ++i)
      for (int j = 0; j < 200; ++j)
        oracle = std::max(oracle, std::hypot(xs[2 * i] - xs[2 * j], xs[2 * i + 1] - xs[2 * j + 1]));
    CHECK(s.diameter() == doctest::Approx(oracle).epsilon(1e-14));
    std::vector<Id> sub{3, 17, 99};
    double o2 = 0.0;
    for (Id a : sub)
      for (Id b : sub) o2 = std::max(o2, std::hypot(xs[2 * a] - xs[2 * b], xs[2 * a + 1] - xs[2 * b + 1]));
    CHECK(s.diameter(sub) == doctest::Approx(o2).epsilon(1e-14));
  }

  TEST_CASE("grid index matches brute-force ball queries") {
    const auto s = grid_2d(40);
    const GridIndex index(s, all_ids(s), 0.05);
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<Id> pick(0, static_cast<Id>(s.size() - 1));
    for (int t = 0; t < 50; ++t) {
      const Id x = pick(rng);
      const double r = 0.01 + 0.3 * (t % 7) / 7.0;
      std::vector<Id> oracle;
      for (Id y = 0; y < static_cast<Id>(s.size()); ++y)
        if (s.distance(x, y) < r) oracle.push_back(y);
      CHECK(index.within(x, r) == oracle);
      CHECK(index.count_within(x, r) == oracle.size());
    }
  }

  TEST_CASE("doubling estimate") {
    SUBCASE("single point space has M = 1") {
      const auto s = PointCloudSpace::from_coordinates({0.5, 0.5}, 2);
      CHECK(estimate_doubling(s, 10, 1) == 1);
    }
    SUBCASE("empty space is an error") {
      const auto s = PointCloudSpace::from_coordinates({}, 2);
      CHECK_THROWS_WITH_AS(estimate_doubling(s, 10, 1), doctest::Contains("empty-space"), Error);
    }
    SUBCASE("1D grid: covers are valid and at most 3 at every point and dyadic radius") {
      const auto s = grid_1d(256);
      const GridIndex index(s, all_ids(s), 1.0 / 16.0);
      std::size_t worst = 0;
      for (Id x = 0; x < static_cast<Id>(s.size()); x += 5)
        for (int k = 0; k <= 8; ++k) {
          const double r = std::ldexp(1.0, -k);
          const auto m = doubling_cover_size(index, x, r);
          CHECK(m >= optimal_cover_1d(s, x, r));
          worst = std::max(worst, m);
        }
      CHECK(worst <= 3);
      CHECK(estimate_doubling(s, 64, 9) <= 3);
    }
    SUBCASE("2D grid: M at most 9") {
      const auto s = grid_2d(64);
      CHECK(estimate_doubling(s, 48, 4) <= 9);
    }
  }

  TEST_CASE("Ahlfors exponent from grid ball counts") {
    const auto sq = make_square(1.0 / 128.0);
    const auto a = estimate_ahlfors(sq, {1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0}, 1);
    // Oracle: lattice points of a disc deep in the square, counted directly.
    auto count = [](double r, double eps) {
      const int n = static_cast<int>(r / eps) + 1;
      std::size_t c = 0;
      for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) c += std::hypot(i * eps, j * eps) < r ? 1 : 0;
      return static_cast<double>(c);
    };
    const double oracle_q = std::log(count(0.25, 1.0 / 128) / count(1.0 / 16, 1.0 / 128)) / std::log(4.0);
    CHECK(oracle_q == doctest::Approx(2.0).epsilon(0.02));
    CHECK(a.fitted_q >= 1.9);
    CHECK(a.fitted_q <= 2.1);
    CHECK(std::abs(a.fitted_q - 2.0) <= 0.1);
    CHECK(a.c_q >= 1.0);

    const auto seg = make_segment(1.0 / 256.0);
    const auto s = estimate_ahlfors(seg, {1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0}, 1);
    CHECK(s.fitted_q >= 0.9);
    CHECK(s.fitted_q <= 1.1);

    CHECK_THROWS_WITH_AS(estimate_ahlfors(sq, {0.125}, 1), doctest::Contains("need-2-radii"), Error);
    CHECK_THROWS_WITH_AS(estimate_ahlfors(sq, {1.0 / 128.0, 0.25}, 1), doctest::Contains("sub-resolution"), Error);
  }

  TEST_CASE("Ahlfors two-sided bound holds on the tested balls") {
    const auto sq = make_square(1.0 / 64.0);
    const std::vector<double> radii{1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0};
    const auto a = estimate_ahlfors(sq, radii, 3, 64);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> pick(0, sq.interior().size() - 1);
    // Replays the same centers the estimator drew.
    for (int i = 0; i < 64; ++i) {
      const Id x = sq.interior()[pick(rng)];
      for (double r : radii) {
        const double nu = static_cast<double>(sq.interior_index().count_within(x, r)) * sq.point_measure();
        CHECK(nu <= a.c_q * std::pow(r, a.q) * (1 + 1e-12));
        CHECK(nu * (1 + 1e-12) >= std::pow(r, a.q) / a.c_q);
      }
    }
  }

  TEST_CASE("distance to boundary") {
    const double eps = 1.0 / 64.0;
    const auto sq = make_square(eps);
    CHECK(std::abs(sq.dist_to_boundary(sq.center()) - 0.5) <= eps);
    const Id near = nearest_interior(sq, {eps, 0.5});
    CHECK(sq.dist_to_boundary(near) >= eps / 2);
    CHECK(sq.dist_to_boundary(near) <= 2 * eps);
    const auto disc = make_disc(eps);
    CHECK(std::abs(disc.dist_to_boundary(disc.center()) - 1.0) <= eps);
    CHECK_THROWS_WITH_AS(sq.dist_to_boundary(sq.boundary().front()), doctest::Contains("not-interior"), Error);
    for (double d : disc.boundary_distances()) CHECK(d >= eps / 2);
  }

  TEST_CASE("distance to boundary is 1-Lipschitz along curves") {
    const auto disc = make_disc(1.0 / 64.0);
    const auto curve = construct_john_curve(disc, nearest_boundary(disc, {0.0, 1.0}), JohnProfile::identity(3));
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
      const Id a = curve.vertices[i], b = curve.vertices[i + 1];
      CHECK(std::abs(disc.dist_to_boundary(a) - disc.dist_to_boundary(b)) <= disc.space().distance(a, b) + 1e-12);
    }
  }

  TEST_CASE("reparameterize by arclength") {
    const auto s = PointCloudSpace::from_coordinates({0.0, 1.0, 4.0}, 1);
    CurveModel c{{0, 1, 2}, {0.0, 0.9, 1.0}, {0.0, 1.0, 4.0}};
    const auto r = reparameterize_by_arclength(s, c);
    CHECK(r.t == std::vector<double>{0.0, 0.25, 1.0});
    CHECK(r.vertices == c.vertices);
    CHECK(r.length() == 4.0);
    const auto again = reparameterize_by_arclength(s, r);
    CHECK(again.t == r.t);
    CHECK(again.arclen == r.arclen);
    const auto two = reparameterize_by_arclength(s, make_curve(s, {0, 2}));
    CHECK(two.t == std::vector<double>{0.0, 1.0});
    CHECK_THROWS_WITH_AS(reparameterize_by_arclength(s, make_curve(s, {1})), doctest::Contains("degenerate-curve"), Error);
    CHECK_THROWS_WITH_AS(reparameterize_by_arclength(s, make_curve(s, {1, 1})), doctest::Contains("degenerate-curve"),
                         Error);
  }

  TEST_CASE("points CSV round trip and distance tables") {
    const auto s = grid_2d(4);
    std::stringstream buf;
    write_points_csv(buf, s);
    const auto back = read_points_csv(buf);
    REQUIRE(back.size() == s.size());
    for (Id i = 0; i < static_cast<Id>(s.size()); ++i)
      for (Id j = 0; j < static_cast<Id>(s.size()); ++j) CHECK(back.distance(i, j) == s.distance(i, j));
    std::istringstream ids("id\n0\n1\n2\n"), table("0 1 2\n1 0 1\n2 1 0\n");
    const auto t = read_distance_table(ids, table);
    CHECK(t.size() == 3);
    CHECK(t.distance(0, 2) == 2.0);
    std::istringstream bad("x,y\n0,0\n");
    CHECK_THROWS_AS(read_points_csv(bad), Error);
  }

  TEST_CASE("generators satisfy the domain contract") {
    for (const auto& name : generator_names()) {
      GeneratorSpec spec;
      spec.name = name;
      spec.epsilon = 1.0 / 64.0;
      const auto d = generate_domain(spec);
      CAPTURE(name);
      CHECK_FALSE(d.boundary().empty());
      CHECK(d.is_interior(d.center()));
      CHECK(d.connected());
      CHECK(d.q() == 2.0);
      for (double v : d.boundary_distances()) CHECK(v >= d.epsilon() / 2);
    }
  }

  TEST_CASE("boundary samples have an interior sample within the link radius") {
    // Everywhere except the acute corners (1, +-1) of the cusp, where no
    // sample at clearance eps/2 fits inside the link radius.
    for (const auto& name : generator_names())
      for (double eps : {1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0}) {
        CAPTURE(name);
        CAPTURE(eps);
        GeneratorSpec spec;
        spec.name = name;
        spec.epsilon = eps;
        const auto d = generate_domain(spec);
        for (Id b : d.boundary()) {
          if (!d.interior_near(b).empty()) continue;
          const auto p = d.space().point(b);
          CHECK(name == "cusp");
          CHECK(std::hypot(p[0] - 1.0, std::abs(p[1]) - 1.0) <= 3.0 * eps);
        }
      }
  }

  TEST_CASE("unknown generators are rejected") {
    GeneratorSpec bad;
    bad.name = "torus";
    CHECK_THROWS_WITH_AS(generate_domain(bad), doctest::Contains("unknown-generator"), Error);
  }
}
