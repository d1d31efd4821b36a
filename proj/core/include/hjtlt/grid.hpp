#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hjtlt {

// Uniform rectilinear grid. Non-periodic dimensions place points at both
// ends of [lo, hi] with spacing (hi-lo)/(count-1); periodic dimensions
// treat hi as identified with lo and use spacing (hi-lo)/count, so the
// last point sits one spacing short of hi.
class Grid {
 public:
  Grid(std::vector<double> lo, std::vector<double> hi,
       std::vector<int> counts, std::vector<bool> periodic);

  int dim() const { return static_cast<int>(counts_.size()); }
  std::size_t size() const { return size_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<int>& counts() const { return counts_; }
  const std::vector<bool>& periodic() const { return periodic_; }
  const std::vector<double>& spacing() const { return spacing_; }
  double max_spacing() const;

  // Row-major (C order): the last dimension is contiguous.
  std::size_t flat_index(std::span<const int> idx) const;
  void unflatten(std::size_t flat, std::span<int> idx) const;
  double coordinate(int dim, int i) const { return lo_[dim] + spacing_[dim] * i; }
  void point(std::size_t flat, std::span<double> z) const;

  // Flat index shifted one step along `dim`. Periodic dimensions wrap;
  // at a non-periodic boundary `clamped` is set and the index returned
  // unchanged.
  std::size_t shifted(std::size_t flat, int dim, int delta, bool& clamped) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  std::vector<double> lo_, hi_;
  std::vector<int> counts_;
  std::vector<bool> periodic_;
  std::vector<double> spacing_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

// Dense scalar field sampled on a grid.
class ValueField {
 public:
  ValueField() = default;
  ValueField(std::shared_ptr<const Grid> grid, double fill = 0.0);
  ValueField(std::shared_ptr<const Grid> grid, std::vector<double> data);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> data_;
};

// One-sided difference along `dim` at the flat index `i`. At non-periodic
// boundaries the missing side copies the other (one-sided copy); periodic
// dimensions wrap around.
double left_diff(const ValueField& v, std::size_t i, int dim);
double right_diff(const ValueField& v, std::size_t i, int dim);

// Full left/right difference fields, one pair per dimension.
struct UpwindGradients {
  std::vector<ValueField> left;
  std::vector<ValueField> right;
};
UpwindGradients upwind_gradients(const ValueField& v);

// Multilinear interpolation. Periodic dimensions wrap; non-periodic
// queries outside [lo, hi] throw ValidationError.
double interpolate(const ValueField& v, std::span<const double> z);

// Spatial gradient at z: central average of the upwind pair at each cell
// corner, multilinearly interpolated.
std::vector<double> interpolate_gradient(const ValueField& v, std::span<const double> z);

// Value function slices over backward time: times[0] = 0 > times[1] > ... >
// times.back() = -T, uniformly spaced, one field per sample.
class TimedValueField {
 public:
  TimedValueField() = default;
  TimedValueField(std::vector<double> times, std::vector<ValueField> slices);

  const std::vector<double>& times() const { return times_; }
  const std::vector<ValueField>& slices() const { return slices_; }
  std::vector<ValueField>& slices() { return slices_; }
  const Grid& grid() const { return slices_.front().grid(); }
  const std::shared_ptr<const Grid>& grid_ptr() const { return slices_.front().grid_ptr(); }
  double horizon() const { return -times_.back(); }
  // Uniform slice spacing (positive).
  double dt() const { return times_.size() > 1 ? times_[0] - times_[1] : 0.0; }

  // Stored slice nearest to backward time s (ties toward the more negative
  // sample). s must lie within [-T, 0] up to a half step.
  std::size_t slice_index(double s) const;

 private:
  std::vector<double> times_;
  std::vector<ValueField> slices_;
};

// Interpolate at deployment time t in [0, T]: selects the stored slice
// nearest to s = -T + t, then interpolates spatially.
double interpolate_timed(const TimedValueField& v, std::span<const double> z, double t);

// Flat little-endian float64 dump plus a JSON sidecar describing grid
// bounds, shape, periodicity, and time samples. `path` is the binary file;
// the sidecar is written next to it as path + ".json".
void write_field_binary(const std::string& path, const TimedValueField& v);
void write_field_binary(const std::string& path, const ValueField& v);
TimedValueField read_field_binary(const std::string& path);

// CSV export of a single slice; only grids with dim <= 2 are accepted.
void write_field_csv(const std::string& path, const ValueField& v);

}  // namespace hjtlt
