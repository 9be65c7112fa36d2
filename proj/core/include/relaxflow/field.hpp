#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaxflow {

/// Raised for invalid arguments or states that violate a documented
/// precondition (negative density, mismatched grids, bad parameters).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation produces non-finite values or a numerical
/// check fails in a way the caller cannot recover from.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Periodic box [0, L)^dim sampled on N equispaced nodes per axis.
class TorusGrid {
 public:
  TorusGrid(int dim, int points_per_axis, double length_per_axis = kTwoPi);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double length_per_axis() const { return length_; }

  std::size_t size() const;
  double spacing() const { return length_ / n_; }
  double cell_volume() const;
  double measure() const;

  /// Node coordinate along one axis, x_i = i L / N.
  double coordinate(int index) const { return index * spacing(); }

  /// Signed integer mode index for storage slot j in FFT order:
  /// 0, 1, ..., N/2, -(N/2 - 1), ..., -1. Slot N/2 is the Nyquist mode.
  int mode_index(int slot) const { return slot <= n_ / 2 ? slot : slot - n_; }
  double wavenumber(int slot) const { return kTwoPi * mode_index(slot) / length_; }
  std::vector<double> wavenumbers() const;

  /// Largest |mode index| kept by the 2/3 rule.
  int dealias_cutoff() const { return n_ / 3; }

  bool operator==(const TorusGrid& other) const = default;

 private:
  int dim_;
  int n_;
  double length_;
};

class ScalarField {
 public:
  explicit ScalarField(const TorusGrid& grid, double value = 0.0);
  ScalarField(const TorusGrid& grid, std::vector<double> values);

  /// Samples f(x) (1D) or f(x, y) (2D) at the grid nodes.
  static ScalarField from_function(const TorusGrid& grid,
                                   const std::function<double(double, double)>& f);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const;
  double max() const;
  double min() const;
  double max_abs() const;

  template <class F>
  ScalarField map(F&& f) const {
    ScalarField out(grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = f(values_[i]);
    return out;
  }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double s);

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator/(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator*(ScalarField a, double s);
ScalarField operator+(ScalarField a, double s);
ScalarField operator-(ScalarField a);

/// dim components sharing one grid.
class VectorField {
 public:
  explicit VectorField(const TorusGrid& grid);
  explicit VectorField(std::vector<ScalarField> components);

  const TorusGrid& grid() const { return components_.front().grid(); }
  int dim() const { return static_cast<int>(components_.size()); }
  const ScalarField& operator[](int axis) const { return components_[axis]; }
  ScalarField& operator[](int axis) { return components_[axis]; }

  bool all_finite() const;
  /// Pointwise |v|^2.
  ScalarField norm_squared() const;

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);

 private:
  std::vector<ScalarField> components_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);
/// Scales every component pointwise by f.
VectorField operator*(const ScalarField& f, VectorField v);
ScalarField dot(const VectorField& a, const VectorField& b);

/// Symmetric dim x dim tensor of scalar fields, stored in full.
class TensorField {
 public:
  explicit TensorField(const TorusGrid& grid);

  const TorusGrid& grid() const { return entries_.front().grid(); }
  int dim() const { return dim_; }
  const ScalarField& operator()(int i, int j) const { return entries_[i * dim_ + j]; }
  ScalarField& operator()(int i, int j) { return entries_[i * dim_ + j]; }

  /// Adds s * I.
  TensorField& add_isotropic(const ScalarField& s);
  /// Adds c * (a (x) b).
  TensorField& add_outer(const VectorField& a, const VectorField& b, double c = 1.0);

  TensorField& operator+=(const TensorField& other);
  TensorField& operator-=(const TensorField& other);
  TensorField& operator*=(double s);

  double max_abs() const;

 private:
  int dim_;
  std::vector<ScalarField> entries_;
};

TensorField operator-(TensorField a, const TensorField& b);
/// Pointwise A : B = sum_ij A_ij B_ij.
ScalarField contract(const TensorField& a, const TensorField& b);

// Quadrature on the collocation nodes (trapezoid rule, spectrally exact for
// smooth periodic integrands).
double integral(const ScalarField& f);
double mean(const ScalarField& f);
double lq_norm(const ScalarField& f, double q);
double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where);

/// FFT plans and buffers for one grid. Not thread-safe: each concurrent run
/// owns its own workspace.
class Spectral {
 public:
  using Complex = std::complex<double>;

  explicit Spectral(const TorusGrid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;
  Spectral(Spectral&&) noexcept;
  Spectral& operator=(Spectral&&) noexcept;

  const TorusGrid& grid() const;

  /// Number of stored half-spectrum coefficients (N/2+1 or N*(N/2+1)).
  std::size_t spectrum_size() const;
  /// Unnormalised forward r2c transform.
  std::vector<Complex> forward(const ScalarField& f);
  /// Inverse c2r transform including the 1/N^dim normalisation.
  ScalarField inverse(std::span<const Complex> coefficients);

  /// Calls visit(slot, kx_index, ky_index) for every stored coefficient;
  /// ky_index is 0 in 1D. Indices are signed mode numbers.
  void for_each_mode(const std::function<void(std::size_t, int, int)>& visit) const;

  ScalarField partial(const ScalarField& f, int axis);
  VectorField gradient(const ScalarField& f);
  ScalarField divergence(const VectorField& v);
  ScalarField laplacian(const ScalarField& f);
  /// Zeroes every mode with any |index| > N/3.
  ScalarField dealias(const ScalarField& f);
  VectorField dealias(const VectorField& v);

  /// Multiplies every mode by symbol(kx, ky) given in physical wavenumbers.
  ScalarField apply_symbol(const ScalarField& f,
                           const std::function<Complex(double, double)>& symbol);

  /// Sum over modes of |f_hat|^2 weighted so that it equals l2_norm(f)^2.
  double parseval_l2_squared(const ScalarField& f);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Field dump: header "# grid dim=<d> n=<N> L=<L>", then one value per line in
// row-major order.
void write_field_csv(std::ostream& out, const ScalarField& f);
void write_field_csv(const std::string& path, const ScalarField& f);
ScalarField read_field_csv(std::istream& in);
ScalarField read_field_csv(const std::string& path);

}  // namespace relaxflow
