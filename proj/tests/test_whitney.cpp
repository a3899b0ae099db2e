#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <sstream>

#include "bext/error.hpp"
#include "bext/generators.hpp"
#include "bext/whitney.hpp"

using namespace bext;

namespace {

struct Built {
  DomainModel domain;
  CubeSystem cubes;
  WhitneyDecomposition whitney;
};

Built build(DomainModel d, WhitneyParams wp = {}) {
  const auto np = net_params_for(wp);
  auto cs = build_cubes(d.space(), build_nets(d.space(), d.interior(), np), np);
  auto w = build_whitney(d, cs, wp);
  return {std::move(d), std::move(cs), std::move(w)};
}

double dist_to_set(const PointCloudSpace& s, Id x, const std::vector<Id>& set) {
  double best = 1e300;
  for (Id y : set) best = std::min(best, s.distance(x, y));
  return best;
}

}  // namespace

TEST_SUITE("whitney") {
  TEST_CASE("parameter validation") {
    CHECK(validate_whitney_params({1.0 / 12.0, 1.0 / 3.0, 2.0, 4.0}));
    CHECK_FALSE(validate_whitney_params({1.0 / 12.0, 1.0 / 3.0, 1.0, 4.0}));
    CHECK_FALSE(validate_whitney_params({1.0 / 12.0, 1.0 / 3.0, 2.0, 3.0}));
    CHECK_FALSE(validate_whitney_params({0.5, 1.0 / 3.0, 2.0, 4.0}));
    CHECK_THROWS_WITH_AS(validate_whitney_params({1.0 / 12.0, -1.0, 2.0, 4.0}), doctest::Contains("bad-parameter"), Error);
    const auto np = net_params_for({});
    CHECK(np.c0 == doctest::Approx(1.0));
    CHECK(np.C0 == doctest::Approx(1.0));
  }

  TEST_CASE("layer index brackets the distance") {
    const WhitneyParams p;
    for (double d : {0.9, 0.5, 0.2, 0.05, 0.01, 0.003}) {
      const int k = whitney_layer(d, p);
      CHECK(p.a * p.C1 * std::pow(p.delta, k) < d);
      CHECK(d <= p.a * p.C1 * std::pow(p.delta, k - 1));
    }
  }

  TEST_CASE("decomposition invariants by brute force on every generator") {
    for (const auto& name : generator_names()) {
      CAPTURE(name);
      GeneratorSpec spec;
      spec.name = name;
      spec.epsilon = 1.0 / 64.0;
      const auto b = build(generate_domain(spec));
      const auto& d = b.domain;
      const auto& w = b.whitney;
      const auto& p = w.params();
      const double eps = d.epsilon();
      std::vector<int> owner(d.space().size(), -1);
      for (std::size_t i = 0; i < w.size(); ++i) {
        const auto& q = w.cube(static_cast<int>(i));
        const double dk = std::pow(p.delta, q.level);
        double dq = 1e300;
        for (Id m : q.members) {
          REQUIRE(owner[static_cast<std::size_t>(m)] == -1);
          owner[static_cast<std::size_t>(m)] = static_cast<int>(i);
          dq = std::min(dq, dist_to_set(d.space(), m, d.boundary()));
          CHECK(d.space().distance(m, q.center) < p.C1 * dk);
        }
        CHECK(dq >= (p.a - 2.0) * p.C1 * dk);
        CHECK(dq <= p.a * p.C1 * dk / p.delta + 2.0 * eps);
        // No boundary sample in (3/2) B^Q.
        CHECK(dist_to_set(d.space(), q.center, d.boundary()) >= 1.5 * p.C1 * dk - eps);
        CHECK(q.dist_to_boundary == doctest::Approx(dq));
      }
      for (Id x : d.interior()) CHECK(owner[static_cast<std::size_t>(x)] >= 0);
      CHECK(check_whitney(w, d, b.cubes).total() == 0);
    }
  }

  TEST_CASE("adjacency graph is connected on connected domains") {
    const auto b = build(make_disc(1.0 / 64.0));
    const auto& w = b.whitney;
    std::vector<char> seen(w.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    std::size_t n = 1;
    while (!queue.empty()) {
      const int c = queue.front();
      queue.pop_front();
      for (int m : w.neighbors(c))
        if (!seen[static_cast<std::size_t>(m)]) {
          seen[static_cast<std::size_t>(m)] = 1;
          ++n;
          queue.push_back(m);
        }
    }
    CHECK(n == w.size());
    for (const auto& e : w.edges()) CHECK((e.members_linked || e.outer_balls_meet));
  }

  TEST_CASE("thin rectangle: layers stay above resolution and cubes stay thin") {
    const double eps = 1.0 / 128.0;
    const auto b = build(make_rectangle(1.0, 1.0 / 16.0, eps));
    const auto& p = b.whitney.params();
    CHECK(b.whitney.size() > 0);
    for (const auto& q : b.whitney.cubes()) {
      CHECK(p.a * p.C1 * std::pow(p.delta, q.level - 1) >= eps / 2);
      CHECK(q.member_diameter <= 1.0 / 16.0);
    }
  }

  TEST_CASE("overlap counts") {
    const auto b = build(make_square(1.0 / 64.0));
    const auto& d = b.domain;
    const auto& w = b.whitney;
    const auto& q = w.cube(static_cast<int>(w.size() / 2));
    CHECK(overlap_count(w, d, 1.0, q.center) >= 1);
    const auto c1 = overlap_counts(w, d, 1.0);
    const auto c32 = overlap_counts(w, d, 1.5);
    for (std::size_t i = 0; i < c1.size(); ++i) {
      CHECK(c1[i] >= 1);
      CHECK(c32[i] >= c1[i]);
    }
    // Oracle: count balls directly for a few samples.
    for (std::size_t i = 0; i < d.interior().size(); i += 301) {
      const Id x = d.interior()[i];
      std::size_t n = 0;
      for (const auto& c : w.cubes()) n += d.space().distance(x, c.center) < 1.5 * c.outer_radius ? 1 : 0;
      CHECK(c32[i] == n);
      CHECK(overlap_count(w, d, 1.5, x) == n);
    }
    CHECK_THROWS_WITH_AS(overlap_count(w, d, 2.0, q.center), doctest::Contains("lambda-out-of-range"), Error);
    CHECK_THROWS_WITH_AS(overlap_count(w, d, 0.5, q.center), doctest::Contains("lambda-out-of-range"), Error);
  }

  TEST_CASE("cube chains") {
    const auto b = build(make_square(1.0 / 64.0));
    const auto& d = b.domain;
    const auto& w = b.whitney;
    const Id x = d.center();
    CHECK(cube_chain(w, x, x).size() == 1);
    const int cx = w.cube_of(x);
    REQUIRE(!w.neighbors(cx).empty());
    const Id y = w.cube(w.neighbors(cx).front()).members.front();
    CHECK(cube_chain(w, x, y).size() == 2);

    // Chains are adjacency paths between the right cubes. At this resolution
    // every Whitney cube is a single sample, so chain length tracks the
    // number of eps-steps between the points.
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<std::size_t> pick(0, d.interior().size() - 1);
    for (double s : {0.25, 0.125, 0.0625}) {
      std::size_t n = 0, longest = 0;
      while (n < 100) {
        const Id a = d.interior()[pick(rng)], c = d.interior()[pick(rng)];
        if (d.dist_to_boundary(a) < s || d.dist_to_boundary(c) < s || d.space().distance(a, c) > s) continue;
        ++n;
        const auto chain = cube_chain(w, a, c);
        CHECK(chain.front() == w.cube_of(a));
        CHECK(chain.back() == w.cube_of(c));
        for (std::size_t i = 1; i < chain.size(); ++i) {
          const auto nb = w.neighbors(chain[i - 1]);
          CHECK(std::binary_search(nb.begin(), nb.end(), chain[i]));
        }
        longest = std::max(longest, chain.size());
      }
      CHECK(static_cast<double>(longest) <= 2.0 * s / d.epsilon() + 2.0);
    }
    CHECK_THROWS_WITH_AS(cube_chain(w, x, d.boundary().front()), doctest::Contains("not-interior"), Error);
  }

  TEST_CASE("disconnected domains have no chain across components") {
    std::vector<double> xs;
    std::vector<Id> interior, boundary;
    const double eps = 1.0 / 16.0;
    // Two 1D-like strips in the plane, each with boundary samples around it.
    for (int part = 0; part < 2; ++part) {
      const double x0 = part * 5.0;
      for (int i = 0; i <= 16; ++i) {
        interior.push_back(static_cast<Id>(xs.size() / 2));
        xs.push_back(x0 + i * eps);
        xs.push_back(0.0);
      }
      for (int i = -2; i <= 18; ++i)
        for (double y : {-1.0, 1.0}) {
          boundary.push_back(static_cast<Id>(xs.size() / 2));
          xs.push_back(x0 + i * eps);
          xs.push_back(y);
        }
    }
    auto space = std::make_shared<const PointCloudSpace>(PointCloudSpace::from_coordinates(xs, 2));
    DomainModel d(space, interior, boundary, interior[8], eps, 2.0);
    CHECK_FALSE(d.connected());
    const auto b = build(std::move(d));
    CHECK_THROWS_WITH_AS(cube_chain(b.whitney, interior.front(), interior.back()), doctest::Contains("no-chain"), Error);
  }

  TEST_CASE("improper domains and bad parameters are rejected") {
    auto space = std::make_shared<const PointCloudSpace>(PointCloudSpace::from_coordinates({0.0, 0.0, 0.1, 0.0}, 2));
    DomainModel d(space, {0, 1}, {}, 0, 0.1, 2.0);
    const auto np = net_params_for({});
    const auto cs = build_cubes(d.space(), build_nets(d.space(), d.interior(), np), np);
    CHECK_THROWS_WITH_AS(build_whitney(d, cs, {}), doctest::Contains("improper-domain"), Error);
    const auto sq = make_square(1.0 / 16.0);
    const auto cs2 = build_cubes(sq.space(), build_nets(sq.space(), sq.interior(), np), np);
    CHECK_THROWS_WITH_AS(build_whitney(sq, cs2, {1.0 / 12.0, 1.0 / 3.0, 2.0, 3.0}), doctest::Contains("bad-parameter"),
                         Error);
  }

  TEST_CASE("export is one JSON object per cube") {
    const auto b = build(make_square(1.0 / 32.0));
    std::ostringstream out;
    export_whitney_jsonl(out, b.whitney);
    const std::string s = out.str();
    CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == b.whitney.size());
    for (const char* key : {"level", "center", "inner_radius", "outer_radius", "dist_to_boundary", "members_count"})
      CHECK(s.find(std::string("\"") + key + "\"") != std::string::npos);
  }
}
