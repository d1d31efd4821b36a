#include "hjtlt/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "json.hpp"

#include "hjtlt/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "field export assumes a little-endian host");

namespace hjtlt {

Grid::Grid(std::vector<double> lo, std::vector<double> hi,
           std::vector<int> counts, std::vector<bool> periodic)
    : lo_(std::move(lo)), hi_(std::move(hi)),
      counts_(std::move(counts)), periodic_(std::move(periodic)) {
  const std::size_t n = counts_.size();
  if (n == 0) throw ValidationError("grid must have at least one dimension");
  if (lo_.size() != n || hi_.size() != n || periodic_.size() != n)
    throw ValidationError("grid lo/hi/counts/periodic must have equal lengths");
  spacing_.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    if (counts_[d] < 3)
      throw ValidationError("grid dimension " + std::to_string(d) +
                            ": point count must be at least 3");
    if (!(hi_[d] > lo_[d]))
      throw ValidationError("grid dimension " + std::to_string(d) + ": hi must exceed lo");
    spacing_[d] = (hi_[d] - lo_[d]) / (periodic_[d] ? counts_[d] : counts_[d] - 1);
  }
  strides_.resize(n);
  std::size_t stride = 1;
  for (std::size_t d = n; d-- > 0;) {
    strides_[d] = stride;
    stride *= static_cast<std::size_t>(counts_[d]);
  }
  size_ = stride;
}

double Grid::max_spacing() const {
  return *std::max_element(spacing_.begin(), spacing_.end());
}

std::size_t Grid::flat_index(std::span<const int> idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim(); ++d) flat += static_cast<std::size_t>(idx[d]) * strides_[d];
  return flat;
}

void Grid::unflatten(std::size_t flat, std::span<int> idx) const {
  for (int d = 0; d < dim(); ++d) {
    idx[d] = static_cast<int>(flat / strides_[d]);
    flat %= strides_[d];
  }
}

void Grid::point(std::size_t flat, std::span<double> z) const {
  for (int d = 0; d < dim(); ++d) {
    const int i = static_cast<int>(flat / strides_[d] % static_cast<std::size_t>(counts_[d]));
    z[d] = coordinate(d, i);
  }
}

std::size_t Grid::shifted(std::size_t flat, int dim, int delta, bool& clamped) const {
  const int n = counts_[dim];
  const int i = static_cast<int>(flat / strides_[dim] % static_cast<std::size_t>(n));
  int j = i + delta;
  clamped = false;
  if (periodic_[dim]) {
    j = ((j % n) + n) % n;
  } else if (j < 0 || j >= n) {
    clamped = true;
    return flat;
  }
  return flat + (static_cast<std::size_t>(j) - static_cast<std::size_t>(i)) * strides_[dim];
}

bool Grid::operator==(const Grid& other) const {
  return lo_ == other.lo_ && hi_ == other.hi_ && counts_ == other.counts_ &&
         periodic_ == other.periodic_;
}

ValueField::ValueField(std::shared_ptr<const Grid> grid, double fill)
    : grid_(std::move(grid)), data_(grid_->size(), fill) {}

ValueField::ValueField(std::shared_ptr<const Grid> grid, std::vector<double> data)
    : grid_(std::move(grid)), data_(std::move(data)) {
  if (data_.size() != grid_->size())
    throw ValidationError("field data size does not match grid size");
}

double left_diff(const ValueField& v, std::size_t i, int dim) {
  bool clamped = false;
  const std::size_t j = v.grid().shifted(i, dim, -1, clamped);
  if (clamped) return right_diff(v, i, dim);
  return (v[i] - v[j]) / v.grid().spacing()[dim];
}

double right_diff(const ValueField& v, std::size_t i, int dim) {
  bool clamped = false;
  const std::size_t j = v.grid().shifted(i, dim, +1, clamped);
  if (clamped) return left_diff(v, i, dim);
  return (v[j] - v[i]) / v.grid().spacing()[dim];
}

UpwindGradients upwind_gradients(const ValueField& v) {
  UpwindGradients g;
  const int dims = v.grid().dim();
  g.left.reserve(dims);
  g.right.reserve(dims);
  for (int d = 0; d < dims; ++d) {
    ValueField l(v.grid_ptr()), r(v.grid_ptr());
    for (std::size_t i = 0; i < v.data().size(); ++i) {
      l[i] = left_diff(v, i, d);
      r[i] = right_diff(v, i, d);
    }
    g.left.push_back(std::move(l));
    g.right.push_back(std::move(r));
  }
  return g;
}

namespace {

struct CellLocation {
  // Per dimension: lower corner index, index step to the upper corner
  // (in flat units; 0 when the dimension collapses), and fraction.
  int i0[8];
  std::ptrdiff_t up[8];
  double frac[8];
};

CellLocation locate(const Grid& g, std::span<const double> z) {
  if (static_cast<int>(z.size()) != g.dim())
    throw ValidationError("query point dimension does not match grid");
  CellLocation c;
  // Strides recomputed back-to-front (row-major, matching Grid).
  std::size_t strides[8];
  std::size_t s = 1;
  for (int d = g.dim(); d-- > 0;) {
    strides[d] = s;
    s *= static_cast<std::size_t>(g.counts()[d]);
  }
  for (int d = 0; d < g.dim(); ++d) {
    const int n = g.counts()[d];
    double x = (z[d] - g.lo()[d]) / g.spacing()[d];
    if (g.periodic()[d]) {
      x = std::fmod(x, static_cast<double>(n));
      if (x < 0) x += n;
      int i0 = static_cast<int>(x);
      if (i0 >= n) i0 = n - 1;
      c.i0[d] = i0;
      c.frac[d] = x - i0;
      const int i1 = (i0 + 1) % n;
      c.up[d] = (static_cast<std::ptrdiff_t>(i1) - i0) * static_cast<std::ptrdiff_t>(strides[d]);
    } else {
      const double tol = 1e-9 * std::max(1.0, std::abs(x));
      if (x < -tol || x > (n - 1) + tol)
        throw ValidationError("query point outside grid bounds in dimension " +
                              std::to_string(d));
      x = std::clamp(x, 0.0, static_cast<double>(n - 1));
      int i0 = static_cast<int>(x);
      if (i0 > n - 2) i0 = n - 2;
      c.i0[d] = i0;
      c.frac[d] = x - i0;
      c.up[d] = static_cast<std::ptrdiff_t>(strides[d]);
    }
  }
  return c;
}

}  // namespace

double interpolate(const ValueField& v, std::span<const double> z) {
  const Grid& g = v.grid();
  const int dims = g.dim();
  if (dims > 8) throw ValidationError("interpolation supports at most 8 dimensions");
  const CellLocation c = locate(g, z);
  std::size_t base = 0;
  {
    int idx[8];
    for (int d = 0; d < dims; ++d) idx[d] = c.i0[d];
    base = g.flat_index(std::span<const int>(idx, static_cast<std::size_t>(dims)));
  }
  double acc = 0.0;
  const unsigned corners = 1u << dims;
  for (unsigned m = 0; m < corners; ++m) {
    double w = 1.0;
    std::ptrdiff_t off = 0;
    for (int d = 0; d < dims; ++d) {
      if (m & (1u << d)) {
        w *= c.frac[d];
        off += c.up[d];
      } else {
        w *= 1.0 - c.frac[d];
      }
    }
    if (w != 0.0) acc += w * v[base + off];
  }
  return acc;
}

std::vector<double> interpolate_gradient(const ValueField& v, std::span<const double> z) {
  const Grid& g = v.grid();
  const int dims = g.dim();
  if (dims > 8) throw ValidationError("interpolation supports at most 8 dimensions");
  const CellLocation c = locate(g, z);
  std::size_t base = 0;
  {
    int idx[8];
    for (int d = 0; d < dims; ++d) idx[d] = c.i0[d];
    base = g.flat_index(std::span<const int>(idx, static_cast<std::size_t>(dims)));
  }
  std::vector<double> grad(dims, 0.0);
  const unsigned corners = 1u << dims;
  for (unsigned m = 0; m < corners; ++m) {
    double w = 1.0;
    std::ptrdiff_t off = 0;
    for (int d = 0; d < dims; ++d) {
      if (m & (1u << d)) {
        w *= c.frac[d];
        off += c.up[d];
      } else {
        w *= 1.0 - c.frac[d];
      }
    }
    if (w == 0.0) continue;
    const std::size_t i = base + off;
    for (int d = 0; d < dims; ++d)
      grad[d] += w * 0.5 * (left_diff(v, i, d) + right_diff(v, i, d));
  }
  return grad;
}

TimedValueField::TimedValueField(std::vector<double> times, std::vector<ValueField> slices)
    : times_(std::move(times)), slices_(std::move(slices)) {
  if (times_.empty() || times_.size() != slices_.size())
    throw ValidationError("timed field needs matching, non-empty times and slices");
  if (std::abs(times_.front()) > 1e-12)
    throw ValidationError("timed field must start at backward time 0");
  if (times_.size() >= 2) {
    const double step = times_[0] - times_[1];
    if (!(step > 0)) throw ValidationError("timed field times must be strictly decreasing");
    for (std::size_t k = 1; k < times_.size(); ++k) {
      const double s = times_[k - 1] - times_[k];
      if (std::abs(s - step) > 1e-9 * std::max(1.0, std::abs(step)))
        throw ValidationError("timed field times must be uniformly spaced");
    }
  }
  for (const auto& s : slices_)
    if (s.grid() != slices_.front().grid())
      throw ValidationError("timed field slices must share one grid");
}

std::size_t TimedValueField::slice_index(double s) const {
  const double step = dt();
  if (step == 0.0) return 0;
  const double x = -s / step;  // 0 at t'=0, k at t'=-T
  const double hi = static_cast<double>(times_.size() - 1);
  if (x < -0.5 - 1e-9 || x > hi + 0.5 + 1e-9)
    throw ValidationError("time outside stored range");
  // Ties round toward the more negative time sample.
  double k = std::floor(x + 0.5);
  k = std::clamp(k, 0.0, hi);
  return static_cast<std::size_t>(k);
}

double interpolate_timed(const TimedValueField& v, std::span<const double> z, double t) {
  const double s = -v.horizon() + t;
  return interpolate(v.slices()[v.slice_index(s)], z);
}

namespace {

nlohmann::json sidecar_json(const Grid& g, const std::vector<double>& times) {
  nlohmann::json j;
  j["dtype"] = "float64";
  j["order"] = "C";
  j["lo"] = g.lo();
  j["hi"] = g.hi();
  j["counts"] = g.counts();
  std::vector<bool> p(g.periodic().begin(), g.periodic().end());
  j["periodic"] = p;
  j["times"] = times;
  return j;
}

void write_binary_impl(const std::string& path, const Grid& g,
                       const std::vector<double>& times,
                       const std::vector<const ValueField*>& slices) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const ValueField* s : slices)
    out.write(reinterpret_cast<const char*>(s->data().data()),
              static_cast<std::streamsize>(s->data().size() * sizeof(double)));
  if (!out) throw Error("short write to '" + path + "'");
  out.close();

  std::ofstream meta(path + ".json", std::ios::trunc);
  if (!meta) throw Error("cannot open '" + path + ".json' for writing");
  meta << sidecar_json(g, times).dump(2) << "\n";
}

}  // namespace

void write_field_binary(const std::string& path, const TimedValueField& v) {
  std::vector<const ValueField*> slices;
  slices.reserve(v.slices().size());
  for (const auto& s : v.slices()) slices.push_back(&s);
  write_binary_impl(path, v.grid(), v.times(), slices);
}

void write_field_binary(const std::string& path, const ValueField& v) {
  write_binary_impl(path, v.grid(), {0.0}, {&v});
}

TimedValueField read_field_binary(const std::string& path) {
  std::ifstream meta(path + ".json");
  if (!meta) throw Error("cannot open '" + path + ".json'");
  nlohmann::json j;
  meta >> j;
  auto grid = std::make_shared<Grid>(
      j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>(),
      j.at("counts").get<std::vector<int>>(), j.at("periodic").get<std::vector<bool>>());
  auto times = j.at("times").get<std::vector<double>>();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::vector<ValueField> slices;
  slices.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> data(grid->size());
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw Error("'" + path + "' is shorter than its sidecar promises");
    slices.emplace_back(grid, std::move(data));
  }
  char extra;
  if (in.read(&extra, 1)) throw Error("'" + path + "' is longer than its sidecar promises");
  return TimedValueField(std::move(times), std::move(slices));
}

void write_field_csv(const std::string& path, const ValueField& v) {
  const Grid& g = v.grid();
  if (g.dim() > 2)
    throw ValidationError("CSV export handles 1- or 2-dimensional slices only");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.precision(17);
  if (g.dim() == 1) {
    out << "x,value\n";
    for (int i = 0; i < g.counts()[0]; ++i)
      out << g.coordinate(0, i) << "," << v[static_cast<std::size_t>(i)] << "\n";
  } else {
    out << "x,y,value\n";
    std::size_t flat = 0;
    for (int i = 0; i < g.counts()[0]; ++i)
      for (int j = 0; j < g.counts()[1]; ++j, ++flat)
        out << g.coordinate(0, i) << "," << g.coordinate(1, j) << "," << v[flat] << "\n";
  }
}

}  // namespace hjtlt
