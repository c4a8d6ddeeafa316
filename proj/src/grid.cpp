#include "gwbec/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "gwbec/error.hpp"

namespace gwbec {

namespace {

// The FFTW planner is not re-entrant; execution of existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

class FftEngine {
 public:
  explicit FftEngine(const Grid& grid) {
    std::lock_guard lock(planner_mutex());
    const int d = grid.dim();
    std::vector<complex> scratch(grid.size());
    auto* buf = as_fftw(scratch.data());
    // FFTW_ESTIMATE keeps plan selection deterministic between runs;
    // FFTW_UNALIGNED lets plans execute on any std::vector buffer.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::vector<int> n(d);
    for (int a = 0; a < d; ++a) n[a] = static_cast<int>(grid.points(a));
    full_fwd_ = fftw_plan_dft(d, n.data(), buf, buf, FFTW_FORWARD, flags);
    full_bwd_ = fftw_plan_dft(d, n.data(), buf, buf, FFTW_BACKWARD, flags);
    for (int a = 0; a < d; ++a) {
      fftw_iodim dims{static_cast<int>(grid.points(a)), static_cast<int>(grid.stride(a)),
                      static_cast<int>(grid.stride(a))};
      std::vector<fftw_iodim> loops;
      for (int b = 0; b < d; ++b) {
        if (b == a) continue;
        loops.push_back({static_cast<int>(grid.points(b)), static_cast<int>(grid.stride(b)),
                         static_cast<int>(grid.stride(b))});
      }
      axis_fwd_[a] = fftw_plan_guru_dft(1, &dims, static_cast<int>(loops.size()), loops.data(), buf,
                                        buf, FFTW_FORWARD, flags);
      axis_bwd_[a] = fftw_plan_guru_dft(1, &dims, static_cast<int>(loops.size()), loops.data(), buf,
                                        buf, FFTW_BACKWARD, flags);
    }
    if (!full_fwd_ || !full_bwd_) fail(ErrorKind::numerical, "FFTW planning failed");
  }

  ~FftEngine() {
    std::lock_guard lock(planner_mutex());
    for (auto* p : {full_fwd_, full_bwd_, axis_fwd_[0], axis_fwd_[1], axis_fwd_[2], axis_bwd_[0],
                    axis_bwd_[1], axis_bwd_[2]}) {
      if (p) fftw_destroy_plan(p);
    }
  }

  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  void run(fftw_plan plan, std::span<complex> data) const {
    fftw_execute_dft(plan, as_fftw(data.data()), as_fftw(data.data()));
  }

  fftw_plan full_fwd_ = nullptr;
  fftw_plan full_bwd_ = nullptr;
  std::array<fftw_plan, 3> axis_fwd_{nullptr, nullptr, nullptr};
  std::array<fftw_plan, 3> axis_bwd_{nullptr, nullptr, nullptr};
};

Grid::Grid(std::vector<std::size_t> points, std::vector<double> extents) {
  require(points.size() == extents.size(), "grid needs one extent per axis");
  require(points.size() >= 1 && points.size() <= 3, "grid dimension must be 1, 2 or 3");
  dim_ = static_cast<int>(points.size());
  for (int a = 0; a < dim_; ++a) {
    require(points[a] >= 4, "grid needs at least 4 points per axis");
    require(std::isfinite(extents[a]) && extents[a] > 0, "grid extents must be positive");
    points_[a] = points[a];
    extents_[a] = extents[a];
  }
  size_ = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    strides_[a] = size_;
    size_ *= points_[a];
  }
  for (int a = 0; a < dim_; ++a) {
    const std::size_t n = points_[a];
    const double dk = 2.0 * std::numbers::pi / extents_[a];
    k_[a].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto signed_i = static_cast<long long>(i);
      const long long half = static_cast<long long>(n) / 2;
      // Even n: bins 0..n/2-1 positive, n/2..n-1 map to -n/2..-1.
      // Odd n:  bins 0..(n-1)/2 positive.
      const long long m = (n % 2 == 0) ? (signed_i < half ? signed_i : signed_i - static_cast<long long>(n))
                                       : (signed_i <= half ? signed_i : signed_i - static_cast<long long>(n));
      k_[a][i] = dk * static_cast<double>(m);
    }
    ksq_[a].resize(size_);
    coords_[a].resize(size_);
    for (std::size_t f = 0; f < size_; ++f) {
      const std::size_t i = axis_index(f, a);
      ksq_[a][f] = k_[a][i] * k_[a][i];
      coords_[a][f] = coordinate(a, i);
    }
  }
}

Grid::~Grid() = default;

std::shared_ptr<const Grid> Grid::create(std::vector<std::size_t> points,
                                         std::vector<double> extents) {
  return std::shared_ptr<const Grid>(new Grid(std::move(points), std::move(extents)));
}

std::shared_ptr<const Grid> Grid::uniform(int dim, std::size_t n, double length) {
  require(dim >= 1 && dim <= 3, "grid dimension must be 1, 2 or 3");
  return create(std::vector<std::size_t>(dim, n), std::vector<double>(dim, length));
}

double Grid::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= extents_[a];
  return v;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= spacing(a);
  return v;
}

double Grid::coordinate(int axis, std::size_t i) const {
  return -0.5 * extents_[axis] + static_cast<double>(i) * spacing(axis);
}

bool Grid::is_nyquist(int axis, std::size_t n) const {
  return points_[axis] % 2 == 0 && n == points_[axis] / 2;
}

bool Grid::same_shape(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (points_[a] != other.points_[a] || extents_[a] != other.extents_[a]) return false;
  }
  return true;
}

bool Grid::powers_of_two() const {
  for (int a = 0; a < dim_; ++a) {
    if ((points_[a] & (points_[a] - 1)) != 0) return false;
  }
  return true;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << dim_ << "D ";
  for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << points_[a];
  os << " points over ";
  for (int a = 0; a < dim_; ++a) os << (a ? "x" : "") << extents_[a];
  return os.str();
}

FftEngine& Grid::engine() const {
  std::call_once(engine_once_, [this] { engine_ = std::make_unique<FftEngine>(*this); });
  return *engine_;
}

void Grid::forward(std::span<complex> data) const {
  require(data.size() == size_, "FFT buffer size does not match grid");
  auto& e = engine();
  e.run(e.full_fwd_, data);
}

void Grid::backward(std::span<complex> data) const {
  require(data.size() == size_, "FFT buffer size does not match grid");
  auto& e = engine();
  e.run(e.full_bwd_, data);
  const double norm = 1.0 / static_cast<double>(size_);
  for (auto& v : data) v *= norm;
}

void Grid::forward_axis(std::span<complex> data, int axis) const {
  require(data.size() == size_, "FFT buffer size does not match grid");
  require(axis >= 0 && axis < dim_, "axis out of range");
  auto& e = engine();
  e.run(e.axis_fwd_[axis], data);
}

void Grid::backward_axis(std::span<complex> data, int axis) const {
  require(data.size() == size_, "FFT buffer size does not match grid");
  require(axis >= 0 && axis < dim_, "axis out of range");
  auto& e = engine();
  e.run(e.axis_bwd_[axis], data);
  const double norm = 1.0 / static_cast<double>(points_[axis]);
  for (auto& v : data) v *= norm;
}

// ---------------------------------------------------------------------------

template <class T>
Field<T>::Field(GridPtr grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
  require(grid_ != nullptr, "field needs a grid");
  require(values_.size() == grid_->size(), "field value count must equal the grid size");
}

template <class T>
Field<T>& Field<T>::operator+=(const Field& other) {
  check_same_grid(*grid_, *other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

template <class T>
Field<T>& Field<T>::operator-=(const Field& other) {
  check_same_grid(*grid_, *other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

template <class T>
Field<T>& Field<T>::operator*=(T factor) {
  for (auto& v : values_) v *= factor;
  return *this;
}

template class Field<double>;
template class Field<complex>;

void check_same_grid(const Grid& a, const Grid& b) {
  if (&a != &b && !a.same_shape(b)) {
    fail(ErrorKind::grid_mismatch, "grid mismatch: " + a.describe() + " vs " + b.describe());
  }
}

namespace spectral {

namespace {

template <class T>
bool is_constant(const Field<T>& f) {
  const auto v = f.values();
  for (const auto& x : v) {
    if (!(x == v[0])) return false;
  }
  return true;
}

std::vector<complex> to_complex(const RealField& f) {
  return std::vector<complex>(f.values().begin(), f.values().end());
}

std::vector<complex> to_complex(const ComplexField& f) { return f.data(); }

RealField from_complex(const GridPtr& g, const std::vector<complex>& c, const RealField*) {
  RealField out(g);
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

ComplexField from_complex(const GridPtr& g, std::vector<complex> c, const ComplexField*) {
  return ComplexField(g, std::move(c));
}

// Applies a diagonal multiplier in wavenumber space. `mult(flat_index)`.
template <class T, class Mult>
Field<T> apply_multiplier(const Field<T>& f, Mult&& mult) {
  const Grid& g = *f.grid();
  if (is_constant(f)) return Field<T>(f.grid());  // derivative of a constant is exactly zero
  auto c = to_complex(f);
  g.forward(c);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= mult(i);
  g.backward(c);
  return from_complex(f.grid(), std::move(c), static_cast<const Field<T>*>(nullptr));
}

template <class T>
Field<T> gradient_impl(const Field<T>& f, int axis) {
  const Grid& g = *f.grid();
  if (axis < 0 || axis >= g.dim()) fail(ErrorKind::invalid_argument, "gradient axis out of range");
  const auto& k = g.wavenumbers(axis);
  return apply_multiplier(f, [&](std::size_t i) {
    const std::size_t n = g.axis_index(i, axis);
    return g.is_nyquist(axis, n) ? complex(0.0, 0.0) : complex(0.0, k[n]);
  });
}

template <class T>
Field<T> second_impl(const Field<T>& f, int axis) {
  const Grid& g = *f.grid();
  if (axis < 0 || axis >= g.dim()) fail(ErrorKind::invalid_argument, "derivative axis out of range");
  const auto& ksq = g.k_squared(axis);
  return apply_multiplier(f, [&](std::size_t i) { return complex(-ksq[i], 0.0); });
}

template <class T>
Field<T> laplacian_impl(const Field<T>& f, double h) {
  if (!(std::abs(h) < 1.0)) fail(ErrorKind::invalid_argument, "strain |h| must be < 1");
  const Grid& g = *f.grid();
  const int d = g.dim();
  const double cx = 1.0 + h, cy = 1.0 - h;
  return apply_multiplier(f, [&](std::size_t i) {
    double s = cx * g.k_squared(0)[i];
    if (d > 1) s += cy * g.k_squared(1)[i];
    if (d > 2) s += g.k_squared(2)[i];
    return complex(-s, 0.0);
  });
}

}  // namespace

RealField gradient(const RealField& f, int axis) { return gradient_impl(f, axis); }
ComplexField gradient(const ComplexField& f, int axis) { return gradient_impl(f, axis); }
RealField second_derivative(const RealField& f, int axis) { return second_impl(f, axis); }
ComplexField second_derivative(const ComplexField& f, int axis) { return second_impl(f, axis); }
RealField laplacian_strained(const RealField& f, double h) { return laplacian_impl(f, h); }
ComplexField laplacian_strained(const ComplexField& f, double h) { return laplacian_impl(f, h); }

double integrate(const RealField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid()->cell_volume();
}

complex integrate(const ComplexField& f) {
  complex s = 0.0;
  for (const auto& v : f.values()) s += v;
  return s * f.grid()->cell_volume();
}

double integrate_abs2_spectral(const ComplexField& f) {
  auto c = forward(f);
  double s = 0.0;
  for (const auto& v : c) s += std::norm(v);
  const double n = static_cast<double>(f.size());
  return s * f.grid()->volume() / (n * n);
}

std::vector<complex> forward(const RealField& f) {
  auto c = to_complex(f);
  f.grid()->forward(c);
  return c;
}

std::vector<complex> forward(const ComplexField& f) {
  auto c = f.data();
  f.grid()->forward(c);
  return c;
}

}  // namespace spectral

}  // namespace gwbec
