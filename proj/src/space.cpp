#include "bext/space.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "bext/error.hpp"
#include "bext/hull.hpp"

namespace bext {

PointCloudSpace PointCloudSpace::from_coordinates(std::vector<double> coords, int dim) {
  if (dim < 1 || dim > 3) throw Error("bad-parameter", "coordinate dimension must be 1, 2 or 3");
  if (coords.size() % static_cast<std::size_t>(dim) != 0)
    throw Error("bad-parameter", "coordinate array is not a multiple of the dimension");
  PointCloudSpace s;
  s.kind_ = Kind::kEuclidean;
  s.dim_ = dim;
  s.n_ = coords.size() / static_cast<std::size_t>(dim);
  s.coords_ = std::move(coords);
  for (double v : s.coords_)
    if (!std::isfinite(v)) throw Error("bad-parameter", "non-finite coordinate");
  return s;
}

PointCloudSpace PointCloudSpace::from_table(std::vector<double> table, std::size_t n,
                                            std::vector<double> coords, int dim) {
  if (table.size() != n * n) throw Error("bad-parameter", "distance table is not square");
  for (double v : table)
    if (!std::isfinite(v) || v < 0) throw Error("bad-parameter", "distance table entry not finite and nonnegative");
  PointCloudSpace s;
  s.kind_ = Kind::kTable;
  s.n_ = n;
  s.table_ = std::move(table);
  if (dim > 0 && coords.size() == n * static_cast<std::size_t>(dim)) {
    s.dim_ = dim;
    s.coords_ = std::move(coords);
  }
  return s;
}

PointCloudSpace PointCloudSpace::from_callable(std::size_t n, DistanceFn fn,
                                               std::vector<double> coords, int dim) {
  PointCloudSpace s;
  s.kind_ = Kind::kCallable;
  s.n_ = n;
  s.fn_ = std::move(fn);
  if (dim > 0 && coords.size() == n * static_cast<std::size_t>(dim)) {
    s.dim_ = dim;
    s.coords_ = std::move(coords);
  }
  return s;
}

double PointCloudSpace::distance(Id a, Id b) const {
  switch (kind_) {
    case Kind::kEuclidean: {
      const double* pa = coords_.data() + static_cast<std::size_t>(a) * dim_;
      const double* pb = coords_.data() + static_cast<std::size_t>(b) * dim_;
      double s = 0.0;
      for (int d = 0; d < dim_; ++d) {
        const double t = pa[d] - pb[d];
        s += t * t;
      }
      return std::sqrt(s);
    }
    case Kind::kTable:
      return table_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)];
    case Kind::kCallable:
      return fn_(a, b);
  }
  return 0.0;
}

double PointCloudSpace::distance_to_point(Id a, std::span<const double> p) const {
  const double* pa = coords_.data() + static_cast<std::size_t>(a) * dim_;
  double s = 0.0;
  for (int d = 0; d < dim_; ++d) {
    const double t = pa[d] - p[d];
    s += t * t;
  }
  return std::sqrt(s);
}

double PointCloudSpace::diameter(std::span<const Id> ids) const {
  std::vector<Id> all;
  if (ids.empty()) {
    all.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) all[i] = static_cast<Id>(i);
    ids = all;
  }
  std::vector<Id> hull;
  if (euclidean() && dim_ == 2 && ids.size() > 32) {
    hull = planar_hull(std::vector<Id>(ids.begin(), ids.end()), [&](Id i) { return point(i); });
    ids = hull;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t j = i + 1; j < ids.size(); ++j) best = std::max(best, distance(ids[i], ids[j]));
  return best;
}

std::size_t PointCloudSpace::check_metric_axioms(std::size_t triples, std::uint64_t seed,
                                                 double tolerance) const {
  if (n_ == 0) return 0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Id> pick(0, static_cast<Id>(n_ - 1));
  std::size_t bad = 0;
  for (std::size_t t = 0; t < triples; ++t) {
    const Id x = pick(rng), y = pick(rng), z = pick(rng);
    const double xy = distance(x, y), yx = distance(y, x);
    const double xz = distance(x, z), zy = distance(z, y);
    if (distance(x, x) != 0.0) ++bad;
    if (!std::isfinite(xy) || xy < 0.0) ++bad;
    if (std::abs(xy - yx) > tolerance) ++bad;
    if (xy > xz + zy + tolerance) ++bad;
  }
  return bad;
}

GridIndex::GridIndex(const PointCloudSpace& space, std::vector<Id> ids, double cell)
    : space_(&space), ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  if (!space.euclidean() || ids_.empty() || !(cell > 0.0)) return;
  dim_ = space.dim();
  lo_.assign(3, 0.0);
  std::vector<double> hi(3, 0.0);
  for (int d = 0; d < dim_; ++d) {
    lo_[d] = std::numeric_limits<double>::max();
    hi[d] = std::numeric_limits<double>::lowest();
  }
  for (Id id : ids_) {
    auto p = space.point(id);
    for (int d = 0; d < dim_; ++d) {
      lo_[d] = std::min(lo_[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  // Keep the cell count within a small multiple of the point count.
  const double budget = 4.0 * static_cast<double>(ids_.size()) + 64.0;
  for (;;) {
    double cells = 1.0;
    for (int d = 0; d < dim_; ++d) cells *= std::floor((hi[d] - lo_[d]) / cell) + 1.0;
    if (cells <= budget) break;
    cell *= 2.0;
  }
  cell_ = cell;
  extent_.assign(3, 1);
  for (int d = 0; d < dim_; ++d) extent_[d] = static_cast<std::int64_t>(std::floor((hi[d] - lo_[d]) / cell_)) + 1;
  const std::size_t ncells = static_cast<std::size_t>(extent_[0] * extent_[1] * extent_[2]);
  std::vector<std::size_t> cell_of_id(ids_.size());
  cell_start_.assign(ncells + 1, 0);
  for (std::size_t s = 0; s < ids_.size(); ++s) {
    auto p = space.point(ids_[s]);
    std::int64_t c[3] = {0, 0, 0};
    for (int d = 0; d < dim_; ++d) c[d] = std::clamp<std::int64_t>(cell_of(p[d], d), 0, extent_[d] - 1);
    cell_of_id[s] = flat(c[0], c[1], c[2]);
    ++cell_start_[cell_of_id[s] + 1];
  }
  for (std::size_t c = 0; c < ncells; ++c) cell_start_[c + 1] += cell_start_[c];
  cell_ids_.resize(ids_.size());
  std::vector<std::size_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t s = 0; s < ids_.size(); ++s) cell_ids_[fill[cell_of_id[s]]++] = ids_[s];
  bucketed_ = true;
}

std::vector<Id> GridIndex::within(Id center, double r) const {
  std::vector<Id> out;
  for_each_within(center, r, [&](Id id, double) { out.push_back(id); });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t GridIndex::count_within(Id center, double r) const {
  std::size_t n = 0;
  for_each_within(center, r, [&](Id, double) { ++n; });
  return n;
}

Id GridIndex::nearest(Id center, double* distance) const {
  Id best = kNoId;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](Id id, double d) {
    if (d < best_d || (d == best_d && id < best)) {
      best_d = d;
      best = id;
    }
  };
  if (bucketed_) {
    double r = cell_;
    for (;;) {
      for_each_within(center, r, consider);
      if (best != kNoId) break;
      r *= 2.0;
    }
  } else {
    for (Id id : ids_) consider(id, space_->distance(center, id));
  }
  if (distance) *distance = best_d;
  return best;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == ';') {
      if (!field.empty()) out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  if (!field.empty()) out.push_back(field);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error("bad-input", "not a number: " + s);
  }
  if (pos != s.size()) throw Error("bad-input", "not a number: " + s);
  return v;
}

}  // namespace

PointCloudSpace read_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("bad-input", "empty points file");
  const auto header = split_fields(line);
  if (header.empty() || header[0] != "id") throw Error("bad-input", "points header must start with `id`");
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1 || dim > 3) throw Error("bad-input", "points header must be id,x[,y[,z]]");
  std::vector<double> coords;
  Id expected = 0;
  while (std::getline(in, line)) {
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (static_cast<int>(f.size()) != dim + 1) throw Error("bad-input", "wrong field count: " + line);
    if (static_cast<Id>(parse_double(f[0])) != expected)
      throw Error("bad-input", "ids must be dense and ascending from 0");
    ++expected;
    for (int d = 0; d < dim; ++d) coords.push_back(parse_double(f[1 + d]));
  }
  return PointCloudSpace::from_coordinates(std::move(coords), dim);
}

PointCloudSpace read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  return read_points_csv(in);
}

PointCloudSpace read_distance_table(std::istream& ids_csv, std::istream& table) {
  std::string line;
  if (!std::getline(ids_csv, line)) throw Error("bad-input", "empty id file");
  const auto header = split_fields(line);
  if (header.size() != 1 || header[0] != "id") throw Error("bad-input", "id file header must be `id`");
  std::size_t n = 0;
  while (std::getline(ids_csv, line)) {
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (static_cast<std::size_t>(parse_double(f[0])) != n) throw Error("bad-input", "ids must be dense and ascending");
    ++n;
  }
  std::vector<double> values;
  values.reserve(n * n);
  while (std::getline(table, line)) {
    const auto f = split_fields(line);
    if (f.empty()) continue;
    if (f.size() != n) throw Error("bad-input", "distance table row has wrong length");
    for (const auto& s : f) values.push_back(parse_double(s));
  }
  if (values.size() != n * n) throw Error("bad-input", "distance table is not square");
  return PointCloudSpace::from_table(std::move(values), n);
}

void write_points_csv(std::ostream& out, const PointCloudSpace& space) {
  static const char* names[] = {"x", "y", "z"};
  out << "id";
  for (int d = 0; d < space.dim(); ++d) out << ',' << names[d];
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << i;
    for (double v : space.point(static_cast<Id>(i))) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace bext
