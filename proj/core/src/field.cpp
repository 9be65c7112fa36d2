#include "relaxflow/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>

namespace relaxflow {

// ---------------------------------------------------------------- TorusGrid

TorusGrid::TorusGrid(int dim, int points_per_axis, double length_per_axis)
    : dim_(dim), n_(points_per_axis), length_(length_per_axis) {
  if (dim != 1 && dim != 2) throw DomainError("TorusGrid: dim must be 1 or 2");
  if (points_per_axis < 8 || points_per_axis % 2 != 0)
    throw DomainError("TorusGrid: points_per_axis must be even and >= 8");
  if (!(length_per_axis > 0.0) || !std::isfinite(length_per_axis))
    throw DomainError("TorusGrid: length_per_axis must be positive");
}

std::size_t TorusGrid::size() const {
  return dim_ == 1 ? static_cast<std::size_t>(n_) : static_cast<std::size_t>(n_) * n_;
}

double TorusGrid::cell_volume() const { return std::pow(spacing(), dim_); }

double TorusGrid::measure() const { return std::pow(length_, dim_); }

std::vector<double> TorusGrid::wavenumbers() const {
  std::vector<double> k(n_);
  for (int j = 0; j < n_; ++j) k[j] = wavenumber(j);
  return k;
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b, const char* where) {
  if (!(a == b)) throw DomainError(std::string(where) + ": fields live on different grids");
}

// -------------------------------------------------------------- ScalarField

ScalarField::ScalarField(const TorusGrid& grid, double value)
    : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw DomainError("ScalarField: value count does not match grid");
}

ScalarField ScalarField::from_function(const TorusGrid& grid,
                                       const std::function<double(double, double)>& f) {
  ScalarField out(grid);
  const int n = grid.points_per_axis();
  if (grid.dim() == 1) {
    for (int i = 0; i < n; ++i) out.values_[i] = f(grid.coordinate(i), 0.0);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.values_[static_cast<std::size_t>(i) * n + j] = f(grid.coordinate(i), grid.coordinate(j));
  }
  return out;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::operator*=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator/(ScalarField a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "ScalarField::operator/");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] /= b[i];
  return a;
}
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }
ScalarField operator+(ScalarField a, double s) { return a += s; }
ScalarField operator-(ScalarField a) { return a *= -1.0; }

// -------------------------------------------------------------- VectorField

VectorField::VectorField(const TorusGrid& grid)
    : components_(static_cast<std::size_t>(grid.dim()), ScalarField(grid)) {}

VectorField::VectorField(std::vector<ScalarField> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("VectorField: no components");
  const TorusGrid& g = components_.front().grid();
  if (static_cast<int>(components_.size()) != g.dim())
    throw DomainError("VectorField: component count must equal grid dimension");
  for (const auto& c : components_) require_same_grid(g, c.grid(), "VectorField");
}

bool VectorField::all_finite() const {
  return std::all_of(components_.begin(), components_.end(),
                     [](const ScalarField& c) { return c.all_finite(); });
}

ScalarField VectorField::norm_squared() const { return dot(*this, *this); }

VectorField& VectorField::operator+=(const VectorField& other) {
  for (int a = 0; a < dim(); ++a) components_[a] += other.components_[a];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  for (int a = 0; a < dim(); ++a) components_[a] -= other.components_[a];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

VectorField operator*(const ScalarField& f, VectorField v) {
  for (int a = 0; a < v.dim(); ++a) v[a] *= f;
  return v;
}

ScalarField dot(const VectorField& a, const VectorField& b) {
  ScalarField out(a.grid());
  for (int k = 0; k < a.dim(); ++k) out += a[k] * b[k];
  return out;
}

// -------------------------------------------------------------- TensorField

TensorField::TensorField(const TorusGrid& grid)
    : dim_(grid.dim()),
      entries_(static_cast<std::size_t>(grid.dim() * grid.dim()), ScalarField(grid)) {}

TensorField& TensorField::add_isotropic(const ScalarField& s) {
  for (int i = 0; i < dim_; ++i) (*this)(i, i) += s;
  return *this;
}

TensorField& TensorField::add_outer(const VectorField& a, const VectorField& b, double c) {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) += c * (a[i] * b[j]);
  return *this;
}

TensorField& TensorField::operator+=(const TensorField& other) {
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += other.entries_[k];
  return *this;
}

TensorField& TensorField::operator-=(const TensorField& other) {
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= other.entries_[k];
  return *this;
}

TensorField& TensorField::operator*=(double s) {
  for (auto& e : entries_) e *= s;
  return *this;
}

double TensorField::max_abs() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, e.max_abs());
  return m;
}

TensorField operator-(TensorField a, const TensorField& b) { return a -= b; }

ScalarField contract(const TensorField& a, const TensorField& b) {
  ScalarField out(a.grid());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) out += a(i, j) * b(i, j);
  return out;
}

// --------------------------------------------------------------- quadrature

double integral(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.grid().cell_volume();
}

double mean(const ScalarField& f) { return integral(f) / f.grid().measure(); }

double lq_norm(const ScalarField& f, double q) {
  if (!(q >= 1.0)) throw DomainError("lq_norm: q must be >= 1");
  if (std::isinf(q)) return f.max_abs();
  const double scale = f.max_abs();
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v) / scale, q);
  return scale * std::pow(s * f.grid().cell_volume(), 1.0 / q);
}

double l2_norm(const ScalarField& f) { return lq_norm(f, 2.0); }

double l2_norm(const VectorField& v) { return std::sqrt(integral(v.norm_squared())); }

// ----------------------------------------------------------------- Spectral

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Spectral::Impl {
  TorusGrid grid;
  std::size_t real_size;
  std::size_t half_size;
  double* real_buf = nullptr;
  fftw_complex* spec_buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Impl(const TorusGrid& g) : grid(g) {
    const int n = g.points_per_axis();
    real_size = g.size();
    half_size = g.dim() == 1 ? static_cast<std::size_t>(n / 2 + 1)
                             : static_cast<std::size_t>(n) * (n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    real_buf = fftw_alloc_real(real_size);
    spec_buf = fftw_alloc_complex(half_size);
    if (g.dim() == 1) {
      fwd = fftw_plan_dft_r2c_1d(n, real_buf, spec_buf, FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_1d(n, spec_buf, real_buf, FFTW_ESTIMATE);
    } else {
      fwd = fftw_plan_dft_r2c_2d(n, n, real_buf, spec_buf, FFTW_ESTIMATE);
      inv = fftw_plan_dft_c2r_2d(n, n, spec_buf, real_buf, FFTW_ESTIMATE);
    }
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real_buf);
    fftw_free(spec_buf);
  }

  // Leaves the spectrum of f in spec_buf.
  void load_forward(const ScalarField& f) {
    require_same_grid(grid, f.grid(), "Spectral");
    std::copy(f.values().begin(), f.values().end(), real_buf);
    fftw_execute(fwd);
  }

  ScalarField unload_inverse() {
    fftw_execute(inv);
    const double norm = 1.0 / static_cast<double>(real_size);
    std::vector<double> out(real_buf, real_buf + real_size);
    for (double& v : out) v *= norm;
    return ScalarField(grid, std::move(out));
  }

  std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec_buf); }

  template <class Visit>
  void modes(Visit&& visit) const {
    const int n = grid.points_per_axis();
    const int half = n / 2 + 1;
    if (grid.dim() == 1) {
      for (int j = 0; j < half; ++j) visit(static_cast<std::size_t>(j), j, 0);
    } else {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < half; ++j)
          visit(static_cast<std::size_t>(i) * half + j, grid.mode_index(i), j);
    }
  }
};

Spectral::Spectral(const TorusGrid& grid) : impl_(std::make_unique<Impl>(grid)) {}
Spectral::~Spectral() = default;
Spectral::Spectral(Spectral&&) noexcept = default;
Spectral& Spectral::operator=(Spectral&&) noexcept = default;

const TorusGrid& Spectral::grid() const { return impl_->grid; }

std::size_t Spectral::spectrum_size() const { return impl_->half_size; }

std::vector<Spectral::Complex> Spectral::forward(const ScalarField& f) {
  impl_->load_forward(f);
  return {impl_->spectrum(), impl_->spectrum() + impl_->half_size};
}

ScalarField Spectral::inverse(std::span<const Complex> coefficients) {
  if (coefficients.size() != impl_->half_size)
    throw DomainError("Spectral::inverse: coefficient count does not match grid");
  std::copy(coefficients.begin(), coefficients.end(), impl_->spectrum());
  return impl_->unload_inverse();
}

void Spectral::for_each_mode(const std::function<void(std::size_t, int, int)>& visit) const {
  impl_->modes(visit);
}

ScalarField Spectral::partial(const ScalarField& f, int axis) {
  if (axis < 0 || axis >= impl_->grid.dim()) throw DomainError("Spectral::partial: bad axis");
  impl_->load_forward(f);
  const int nyquist = impl_->grid.points_per_axis() / 2;
  const double unit = kTwoPi / impl_->grid.length_per_axis();
  auto* s = impl_->spectrum();
  impl_->modes([&](std::size_t slot, int kx, int ky) {
    const int m = axis == 0 ? kx : ky;
    if (m == nyquist || m == -nyquist) {
      s[slot] = 0.0;
    } else {
      s[slot] *= Complex(0.0, unit * m);
    }
  });
  return impl_->unload_inverse();
}

VectorField Spectral::gradient(const ScalarField& f) {
  std::vector<ScalarField> comps;
  comps.reserve(impl_->grid.dim());
  for (int a = 0; a < impl_->grid.dim(); ++a) comps.push_back(partial(f, a));
  return VectorField(std::move(comps));
}

ScalarField Spectral::divergence(const VectorField& v) {
  ScalarField out = partial(v[0], 0);
  for (int a = 1; a < v.dim(); ++a) out += partial(v[a], a);
  return out;
}

ScalarField Spectral::laplacian(const ScalarField& f) {
  const double unit = kTwoPi / impl_->grid.length_per_axis();
  impl_->load_forward(f);
  auto* s = impl_->spectrum();
  impl_->modes([&](std::size_t slot, int kx, int ky) {
    s[slot] *= -unit * unit * static_cast<double>(kx * kx + ky * ky);
  });
  return impl_->unload_inverse();
}

ScalarField Spectral::dealias(const ScalarField& f) {
  const int cut = impl_->grid.dealias_cutoff();
  impl_->load_forward(f);
  auto* s = impl_->spectrum();
  impl_->modes([&](std::size_t slot, int kx, int ky) {
    if (std::abs(kx) > cut || std::abs(ky) > cut) s[slot] = 0.0;
  });
  return impl_->unload_inverse();
}

VectorField Spectral::dealias(const VectorField& v) {
  VectorField out(v.grid());
  for (int a = 0; a < v.dim(); ++a) out[a] = dealias(v[a]);
  return out;
}

ScalarField Spectral::apply_symbol(const ScalarField& f,
                                   const std::function<Complex(double, double)>& symbol) {
  const double unit = kTwoPi / impl_->grid.length_per_axis();
  impl_->load_forward(f);
  auto* s = impl_->spectrum();
  impl_->modes([&](std::size_t slot, int kx, int ky) { s[slot] *= symbol(unit * kx, unit * ky); });
  return impl_->unload_inverse();
}

double Spectral::parseval_l2_squared(const ScalarField& f) {
  impl_->load_forward(f);
  const auto* s = impl_->spectrum();
  const int nyquist = impl_->grid.points_per_axis() / 2;
  double sum = 0.0;
  // The half-spectrum axis is the last one; its interior slots stand for a
  // conjugate pair.
  impl_->modes([&](std::size_t slot, int kx, int ky) {
    const int last = impl_->grid.dim() == 1 ? kx : ky;
    const bool paired = last != 0 && last != nyquist;
    sum += (paired ? 2.0 : 1.0) * std::norm(s[slot]);
  });
  const double m = static_cast<double>(impl_->real_size);
  return sum * impl_->grid.cell_volume() / m;
}

// ------------------------------------------------------------------ CSV I/O

void write_field_csv(std::ostream& out, const ScalarField& f) {
  const auto& g = f.grid();
  std::ostringstream header;
  header.precision(17);
  header << "# grid dim=" << g.dim() << " n=" << g.points_per_axis()
         << " L=" << g.length_per_axis();
  out << header.str() << '\n';
  char buf[32];
  for (double v : f.values()) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
}

void write_field_csv(const std::string& path, const ScalarField& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_field_csv(out, f);
}

ScalarField read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("field csv: empty input");
  int dim = 0, n = 0;
  double length = 0.0;
  if (std::sscanf(line.c_str(), "# grid dim=%d n=%d L=%lf", &dim, &n, &length) != 3)
    throw DomainError("field csv: malformed header '" + line + "'");
  TorusGrid grid(dim, n, length);
  std::vector<double> values;
  values.reserve(grid.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(std::stod(line));
  }
  return ScalarField(grid, std::move(values));
}

ScalarField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_field_csv(in);
}

}  // namespace relaxflow
