#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace gwbec {

using complex = std::complex<double>;

class FftEngine;

/// Periodic Cartesian grid in one to three dimensions, centred on the origin:
/// axis `a` carries the points -L_a/2 + i * L_a/N_a for i in [0, N_a).
///
/// Grids are immutable and always handled through `GridPtr`. FFT plans are
/// created lazily and cached per grid; transforms are unnormalised forward and
/// 1/N-normalised backward.
class Grid {
 public:
  static std::shared_ptr<const Grid> create(std::vector<std::size_t> points,
                                            std::vector<double> extents);
  /// Square/cubic convenience: `dim` axes of `n` points over length `length`.
  static std::shared_ptr<const Grid> uniform(int dim, std::size_t n, double length);

  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  int dim() const { return dim_; }
  std::size_t points(int axis) const { return points_[axis]; }
  double extent(int axis) const { return extents_[axis]; }
  double spacing(int axis) const { return extents_[axis] / static_cast<double>(points_[axis]); }
  std::size_t size() const { return size_; }
  double volume() const;
  double cell_volume() const;
  /// Row-major stride of `axis` in the flat value array.
  std::size_t stride(int axis) const { return strides_[axis]; }

  /// Centred coordinate of index `i` along `axis`.
  double coordinate(int axis, std::size_t i) const;
  /// Coordinate of every flat index along `axis`.
  const std::vector<double>& coordinates(int axis) const { return coords_[axis]; }
  /// Wavenumbers along `axis` in FFT order: 2*pi*n/L for n = 0..N/2-1, then
  /// -N/2..-1 (the Nyquist bin is negative for even N).
  const std::vector<double>& wavenumbers(int axis) const { return k_[axis]; }
  /// Per-flat-index k_axis^2 table.
  const std::vector<double>& k_squared(int axis) const { return ksq_[axis]; }
  /// True when bin `n` of `axis` is the unpaired Nyquist bin (even N only).
  bool is_nyquist(int axis, std::size_t n) const;

  /// Index along `axis` of a flat index.
  std::size_t axis_index(std::size_t flat, int axis) const {
    return (flat / strides_[axis]) % points_[axis];
  }

  bool same_shape(const Grid& other) const;
  /// True when every axis has a power-of-two point count.
  bool powers_of_two() const;
  std::string describe() const;

  void forward(std::span<complex> data) const;
  void backward(std::span<complex> data) const;
  /// One-dimensional transforms along a single axis, batched over the others.
  void forward_axis(std::span<complex> data, int axis) const;
  void backward_axis(std::span<complex> data, int axis) const;

 private:
  Grid(std::vector<std::size_t> points, std::vector<double> extents);
  FftEngine& engine() const;

  int dim_ = 0;
  std::array<std::size_t, 3> points_{1, 1, 1};
  std::array<double, 3> extents_{1, 1, 1};
  std::array<std::size_t, 3> strides_{1, 1, 1};
  std::size_t size_ = 1;
  std::array<std::vector<double>, 3> k_;
  std::array<std::vector<double>, 3> ksq_;
  std::array<std::vector<double>, 3> coords_;
  mutable std::once_flag engine_once_;
  mutable std::unique_ptr<FftEngine> engine_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Value-semantic field on a shared grid. Mutation needs exclusive access to
/// the field; the grid itself is never modified.
template <class T>
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, T fill = T{}) : grid_(std::move(grid)), values_(grid_->size(), fill) {}
  Field(GridPtr grid, std::vector<T> values);

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  std::vector<T>& data() { return values_; }
  const std::vector<T>& data() const { return values_; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(T factor);

 private:
  GridPtr grid_;
  std::vector<T> values_;
};

using RealField = Field<double>;
using ComplexField = Field<complex>;

/// Throws `grid_mismatch` unless both grids have identical shape and extents.
void check_same_grid(const Grid& a, const Grid& b);

namespace spectral {

/// Spectral first derivative along `axis`. The Nyquist bin is dropped so real
/// input gives real output.
RealField gradient(const RealField& f, int axis);
ComplexField gradient(const ComplexField& f, int axis);

/// Spectral second derivative along `axis` (multiplies by -k^2, Nyquist kept).
RealField second_derivative(const RealField& f, int axis);
ComplexField second_derivative(const ComplexField& f, int axis);

/// [1+h] d_x^2 + [1-h] d_y^2 + d_z^2. Rejects |h| >= 1.
RealField laplacian_strained(const RealField& f, double h);
ComplexField laplacian_strained(const ComplexField& f, double h);
inline RealField laplacian(const RealField& f) { return laplacian_strained(f, 0.0); }
inline ComplexField laplacian(const ComplexField& f) { return laplacian_strained(f, 0.0); }

/// Riemann sum times cell volume (exact trapezoid on the periodic grid).
double integrate(const RealField& f);
complex integrate(const ComplexField& f);

/// Integral of |f|^2 evaluated from the Fourier coefficients (Parseval).
double integrate_abs2_spectral(const ComplexField& f);

/// Fourier coefficients of a real field, unnormalised.
std::vector<complex> forward(const RealField& f);
std::vector<complex> forward(const ComplexField& f);

}  // namespace spectral

}  // namespace gwbec
