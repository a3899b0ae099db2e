#pragma once

#include <algorithm>
#include <vector>

#include "bext/space.hpp"

namespace bext {

// Vertices of the planar convex hull (monotone chain), counterclockwise.
// `row(id)` returns the coordinates of id. Farthest pairs are hull vertices.
template <class Row>
std::vector<Id> planar_hull(std::vector<Id> pts, Row&& row) {
  std::sort(pts.begin(), pts.end(), [&](Id a, Id b) {
    const auto pa = row(a), pb = row(b);
    return pa[0] != pb[0] ? pa[0] < pb[0] : (pa[1] != pb[1] ? pa[1] < pb[1] : a < b);
  });
  if (pts.size() < 3) return pts;
  auto cross = [&](Id o, Id a, Id b) {
    const auto po = row(o), pa = row(a), pb = row(b);
    return (pa[0] - po[0]) * (pb[1] - po[1]) - (pa[1] - po[1]) * (pb[0] - po[0]);
  };
  std::vector<Id> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  return hull;
}

}  // namespace bext
