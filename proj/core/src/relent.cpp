#include "relaxflow/relent.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "relaxflow/elliptic.hpp"

namespace relaxflow {

double phi(const ScalarField& rho, const VectorField& m, const ScalarField& rho_bar,
           const VectorField& m_bar, const GammaLaw& law, double rho_min) {
  for (double v : rho_bar.values()) {
    if (!(v > 0.0)) throw DomainError("phi: reference density must be positive");
  }
  return integrated_relative_internal_energy(law, rho, rho_bar) +
         relative_kinetic(rho, m, rho_bar, m_bar, rho_min);
}

double psi(const ScalarField& rho, const VectorField& m, const ScalarField& rho_bar,
           const VectorField& m_bar, const GammaLaw& law, double capillarity, Spectral& ops,
           double rho_min) {
  if (!(capillarity >= 0.0)) throw DomainError("psi: capillarity must be non-negative");
  const double base = phi(rho, m, rho_bar, m_bar, law, rho_min);
  return base + 0.5 * capillarity * integral(ops.gradient(rho - rho_bar).norm_squared());
}

double ep_relative_total(const ScalarField& rho, const VectorField& m, const ScalarField& c,
                         const ScalarField& rho_bar, const VectorField& m_bar,
                         const ScalarField& c_bar, const GammaLaw& law, double chemosensitivity,
                         double screening, Spectral& ops, double rho_min) {
  if (solver_residual(rho, c, screening, ops) > 1e-8 ||
      solver_residual(rho_bar, c_bar, screening, ops) > 1e-8)
    throw DomainError("ep_relative_total: chemoattractant does not solve the elliptic problem");
  const double base = phi(rho, m, rho_bar, m_bar, law, rho_min);
  return base - 0.5 * chemosensitivity * integral((rho - rho_bar) * (c - c_bar));
}

double model_relative_energy(const EnergyModel& model, const ScalarField& rho,
                             const VectorField& m, const ScalarField& rho_bar,
                             const VectorField& m_bar, Spectral& ops, double rho_min) {
  return relative_potential_energy(model, rho, rho_bar, ops) +
         relative_kinetic(rho, m, rho_bar, m_bar, rho_min);
}

namespace {

// -p(rho|rho_bar) I plus the Euler-Poisson closed form when applicable
TensorField closed_form_stress(const EnergyModel& model, const ScalarField& rho,
                               const ScalarField& rho_bar, Spectral& ops) {
  TensorField s(rho.grid());
  ScalarField iso = -relative_pressure(model.law(), rho, rho_bar);
  if (model.kind() == ModelKind::EulerPoisson) {
    const double cx = model.chemosensitivity();
    const ScalarField d = rho - rho_bar;
    const ScalarField dc = solve_screened_poisson(d, model.screening(), ops);
    const VectorField gdc = ops.gradient(dc);
    iso += cx * (0.5 * model.screening() * (dc * dc) + 0.5 * gdc.norm_squared() + mean(d) * dc);
    s.add_outer(gdc, gdc, -cx);
  }
  s.add_isotropic(iso);
  return s;
}

// Korteweg part of the stress: (|grad r|^2/2 + r lap r) I - grad r (x) grad r
TensorField korteweg_part(const ScalarField& r, double ck, Spectral& ops) {
  TensorField s(r.grid());
  const VectorField g = ops.gradient(r);
  s.add_isotropic(ck * (0.5 * g.norm_squared() + r * ops.laplacian(r)));
  s.add_outer(g, g, -ck);
  return s;
}

}  // namespace

TensorField relative_stress(const EnergyModel& model, const ScalarField& rho,
                            const ScalarField& rho_bar, Spectral& ops) {
  require_same_grid(rho.grid(), rho_bar.grid(), "relative_stress");
  if (model.kind() != ModelKind::EulerKorteweg) return closed_form_stress(model, rho, rho_bar, ops);

  // pressure part through the stable relative pressure, capillary part as
  // S(rho) - S(rho_bar) - dS(rho_bar)[psi] with the derivative of each term
  const double ck = model.capillarity();
  const ScalarField d = rho - rho_bar;
  const VectorField gb = ops.gradient(rho_bar);
  const VectorField gd = ops.gradient(d);
  TensorField s = korteweg_part(rho, ck, ops);
  s -= korteweg_part(rho_bar, ck, ops);
  TensorField ds(rho.grid());
  ds.add_isotropic(ck * (dot(gb, gd) + d * ops.laplacian(rho_bar) + rho_bar * ops.laplacian(d)));
  ds.add_outer(gb, gd, -ck);
  ds.add_outer(gd, gb, -ck);
  s -= ds;
  s.add_isotropic(-relative_pressure(model.law(), rho, rho_bar));
  return s;
}

TensorField relative_stress_quadratic(const EnergyModel& model, const ScalarField& rho,
                                      const ScalarField& rho_bar, Spectral& ops) {
  require_same_grid(rho.grid(), rho_bar.grid(), "relative_stress_quadratic");
  if (model.kind() != ModelKind::EulerKorteweg) return closed_form_stress(model, rho, rho_bar, ops);
  const double ck = model.capillarity();
  const ScalarField d = rho - rho_bar;
  const VectorField gd = ops.gradient(d);
  TensorField s(rho.grid());
  s.add_isotropic(-relative_pressure(model.law(), rho, rho_bar) +
                  ck * (0.5 * gd.norm_squared() + d * ops.laplacian(d)));
  s.add_outer(gd, gd, -ck);
  return s;
}

double IdentityResidual::max_abs() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, std::abs(r));
  return m;
}

double IdentityResidual::integrated_abs() const {
  double s = 0.0;
  for (std::size_t i = 0; i < residual.size(); ++i) s += std::abs(residual[i]) * dt[i];
  return s;
}

double IdentityResidual::integrated_scale() const {
  double s = 0.0;
  for (std::size_t i = 0; i < scale.size(); ++i) s += scale[i] * dt[i];
  return s;
}

namespace {

// grad v as J(i, j) = d_j v_i
TensorField jacobian(const VectorField& v, Spectral& ops) {
  TensorField j(v.grid());
  for (int a = 0; a < v.dim(); ++a)
    for (int b = 0; b < v.dim(); ++b) j(a, b) = ops.partial(v[a], b);
  return j;
}

TensorField hessian(const ScalarField& f, Spectral& ops) {
  return jacobian(ops.gradient(f), ops);
}

struct PairTerms {
  double q = 0.0;           // relative energy
  double dissipation = 0.0; // eps^-2 int rho |u - u_bar|^2
  double stress = 0.0;
  double convection = 0.0;
  double error = 0.0;
};

PairTerms relax_pair_terms(const EnergyModel& model, const ScalarField& rho, const VectorField& m,
                           const ScalarField& rho_bar, const VectorField& m_bar, double eps,
                           Spectral& ops, const VectorField* e_bar) {
  PairTerms t;
  const VectorField u = velocity(rho, m);
  const VectorField u_bar = velocity(rho_bar, m_bar);
  const VectorField w = u - u_bar;
  t.q = relative_potential_energy(model, rho, rho_bar, ops) + 0.5 * integral(rho * w.norm_squared());
  t.dissipation = integral(rho * w.norm_squared()) / (eps * eps);
  const TensorField grad_u_bar = jacobian(u_bar, ops);
  t.stress = integral(contract(grad_u_bar, relative_stress(model, rho, rho_bar, ops))) / eps;
  TensorField ww(rho.grid());
  ww.add_outer(w, w);
  t.convection = -integral(rho * contract(grad_u_bar, ww)) / eps;
  if (e_bar) t.error = -integral((rho / rho_bar) * dot(*e_bar, w));
  return t;
}

void require_matching(const Trajectory& a, const Trajectory& b, bool relaxation,
                      const char* where) {
  const auto ta = a.snapshot_times();
  const auto tb = b.snapshot_times();
  if (ta.size() != tb.size() || ta.size() < 2)
    throw DomainError(std::string(where) + ": trajectories have different snapshot counts");
  const double span = std::max(1.0, std::abs(ta.back()));
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (std::abs(ta[i] - tb[i]) > 1e-9 * span)
      throw DomainError(std::string(where) + ": snapshot times differ");
  }
  if (relaxation && (!a.is_relaxation() || !b.is_relaxation()))
    throw DomainError(std::string(where) + ": relaxation trajectories required");
  if (!relaxation && (a.is_relaxation() || b.is_relaxation()))
    throw DomainError(std::string(where) + ": limit trajectories required");
}

}  // namespace

IdentityResidual reltote_residual(const Trajectory& a, const Trajectory& b,
                                  const EnergyModel& model, double eps, Spectral& ops) {
  require_matching(a, b, true, "reltote_residual");
  std::vector<PairTerms> terms;
  for (std::size_t i = 0; i < a.relax_snapshots.size(); ++i) {
    const RelaxState& sa = a.relax_snapshots[i];
    const RelaxState& sb = b.relax_snapshots[i];
    require_same_grid(sa.rho.grid(), sb.rho.grid(), "reltote_residual");
    terms.push_back(relax_pair_terms(model, sa.rho, sa.m, sb.rho, sb.m, eps, ops, nullptr));
  }
  IdentityResidual out;
  for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
    const double dt = a.relax_snapshots[i + 1].time - a.relax_snapshots[i].time;
    const double dq = (terms[i + 1].q - terms[i].q) / dt;
    const double d = 0.5 * (terms[i].dissipation + terms[i + 1].dissipation);
    const double r = 0.5 * (terms[i].stress + terms[i + 1].stress + terms[i].convection +
                            terms[i + 1].convection);
    out.t.push_back(a.relax_snapshots[i].time + 0.5 * dt);
    out.dt.push_back(dt);
    out.residual.push_back(dq + d - r);
    out.scale.push_back(std::max({std::abs(dq), d, std::abs(r)}));
  }
  return out;
}

bool InequalityReport::holds() const {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (imbalance[i] > tolerance[i]) return false;
  }
  return true;
}

bool InequalityReport::ablation_violates(double factor) const {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(ablated_imbalance[i]) > factor * tolerance[i]) return true;
  }
  return false;
}

void InequalityReport::write_csv(const std::string& path) const {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path);
  out << std::setprecision(17);
  out << "t,lhs,rhs,dissipation,stress_term,convection_term,error_term,imbalance,tolerance,"
         "ablated_imbalance\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t[i] << ',' << lhs[i] << ',' << rhs[i] << ',' << dissipation[i] << ','
        << stress_term[i] << ',' << convection_term[i] << ',' << error_term[i] << ','
        << imbalance[i] << ',' << tolerance[i] << ',' << ablated_imbalance[i] << '\n';
  }
}

InequalityReport relax_limit_inequality_residual(const Trajectory& relax, const Trajectory& limit,
                                                 const EnergyModel& model, double eps,
                                                 Spectral& ops) {
  if (!relax.is_relaxation() || limit.is_relaxation())
    throw DomainError("relax_limit_inequality_residual: expects a relaxation and a limit run");
  const auto ta = relax.snapshot_times();
  const auto tb = limit.snapshot_times();
  if (ta.size() != tb.size() || ta.size() < 2)
    throw DomainError("relax_limit_inequality_residual: snapshot counts differ");
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (std::abs(ta[i] - tb[i]) > 1e-9 * std::max(1.0, ta.back()))
      throw DomainError("relax_limit_inequality_residual: snapshot times differ");
  }

  InequalityReport rep;
  std::vector<double> rate;     // full integrand
  std::vector<double> abl_rate; // integrand without dissipation
  std::vector<double> mag;      // sum of term magnitudes
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const RelaxState& s = relax.relax_snapshots[i];
    const ScalarField& rho_bar = limit.limit_snapshots[i].rho;
    require_same_grid(s.rho.grid(), rho_bar.grid(), "relax_limit_inequality_residual");
    const VectorField m_bar = equilibrium_momentum(model, rho_bar, eps, ops);
    const VectorField e_bar = error_term(model, rho_bar, eps, ops);
    const PairTerms p = relax_pair_terms(model, s.rho, s.m, rho_bar, m_bar, eps, ops, &e_bar);
    rep.t.push_back(ta[i]);
    rep.lhs.push_back(p.q);
    rep.dissipation.push_back(p.dissipation);
    rep.stress_term.push_back(p.stress);
    rep.convection_term.push_back(p.convection);
    rep.error_term.push_back(p.error);
    abl_rate.push_back(p.stress + p.convection + p.error);
    rate.push_back(abl_rate.back() - p.dissipation);
    mag.push_back(p.dissipation + std::abs(p.stress) + std::abs(p.convection) +
                  std::abs(p.error));
  }

  // trapezoid with every snapshot and with every other one; their gap is the
  // quadrature error estimate used as tolerance
  const std::size_t n = rep.t.size();
  std::vector<double> fine(n, 0.0), coarse(n, 0.0), abl(n, 0.0), mag_int(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double dt = rep.t[i] - rep.t[i - 1];
    fine[i] = fine[i - 1] + 0.5 * dt * (rate[i - 1] + rate[i]);
    abl[i] = abl[i - 1] + 0.5 * dt * (abl_rate[i - 1] + abl_rate[i]);
    mag_int[i] = mag_int[i - 1] + 0.5 * dt * (mag[i - 1] + mag[i]);
  }
  for (std::size_t i = 2; i < n; i += 2) {
    const double dt = rep.t[i] - rep.t[i - 2];
    coarse[i] = coarse[i - 2] + 0.5 * dt * (rate[i - 2] + rate[i]);
  }
  std::vector<double> richardson(n, 0.0);
  for (std::size_t i = 2; i < n; i += 2) richardson[i] = std::abs(fine[i] - coarse[i]);
  for (std::size_t i = 1; i < n; i += 2) {
    const double next = (i + 1 < n) ? richardson[i + 1] : richardson[i - 1];
    richardson[i] = std::max(richardson[i - 1], next);
  }

  for (std::size_t i = 0; i < n; ++i) {
    rep.rhs.push_back(rep.lhs[0] + fine[i]);
    rep.imbalance.push_back(rep.lhs[i] - rep.rhs[i]);
    const double floor = 1e-9 * (std::abs(rep.lhs[0]) + mag_int[i]) + 1e-15;
    rep.tolerance.push_back(richardson[i] + floor);
    rep.ablated_imbalance.push_back(rep.lhs[i] - (rep.lhs[0] + abl[i]));
  }
  return rep;
}

namespace {

struct FlowTerms {
  double q = 0.0;
  double dissipation = 0.0;
  double stress = 0.0;  // -int S(rho|rho_bar) : grad^2 mu_bar
};

FlowTerms flow_terms(const EnergyModel& model, const ScalarField& rho, const ScalarField& rho_bar,
                     Spectral& ops) {
  FlowTerms t;
  t.q = relative_potential_energy(model, rho, rho_bar, ops);
  const ScalarField mu = variational_derivative(model, rho, ops);
  const ScalarField mu_bar = variational_derivative(model, rho_bar, ops);
  t.dissipation = integral(rho * ops.gradient(mu - mu_bar).norm_squared());
  t.stress = -integral(contract(relative_stress(model, rho, rho_bar, ops), hessian(mu_bar, ops)));
  return t;
}

std::vector<FlowTerms> flow_series(const Trajectory& a, const Trajectory& b,
                                   const EnergyModel& model, Spectral& ops) {
  require_matching(a, b, false, "gradflow_relent_residual");
  std::vector<FlowTerms> terms;
  for (std::size_t i = 0; i < a.limit_snapshots.size(); ++i) {
    require_same_grid(a.limit_snapshots[i].rho.grid(), b.limit_snapshots[i].rho.grid(),
                      "gradflow_relent_residual");
    terms.push_back(flow_terms(model, a.limit_snapshots[i].rho, b.limit_snapshots[i].rho, ops));
  }
  return terms;
}

}  // namespace

IdentityResidual gradflow_relent_residual(const Trajectory& a, const Trajectory& b,
                                          const EnergyModel& model, Spectral& ops) {
  const std::vector<FlowTerms> terms = flow_series(a, b, model, ops);
  IdentityResidual out;
  for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
    const double dt = a.limit_snapshots[i + 1].time - a.limit_snapshots[i].time;
    const double dq = (terms[i + 1].q - terms[i].q) / dt;
    const double d = 0.5 * (terms[i].dissipation + terms[i + 1].dissipation);
    const double r = 0.5 * (terms[i].stress + terms[i + 1].stress);
    out.t.push_back(a.limit_snapshots[i].time + 0.5 * dt);
    out.dt.push_back(dt);
    out.residual.push_back(dq + d - r);
    out.scale.push_back(std::max({std::abs(dq), d, std::abs(r)}));
  }
  return out;
}

std::vector<double> gradflow_dissipation(const Trajectory& a, const Trajectory& b,
                                         const EnergyModel& model, Spectral& ops) {
  const std::vector<FlowTerms> terms = flow_series(a, b, model, ops);
  std::vector<double> d;
  for (std::size_t i = 0; i + 1 < terms.size(); ++i)
    d.push_back(0.5 * (terms[i].dissipation + terms[i + 1].dissipation));
  return d;
}

namespace {

// quantile of a cell density: on [s0, s1] it runs linearly from x0 to x1
struct Segment {
  double s0, s1, x0, x1;
  double at(double s) const {
    if (s1 == s0) return x0;
    return x0 + (x1 - x0) * (s - s0) / (s1 - s0);
  }
};

std::vector<Segment> quantile_segments(const ScalarField& rho, double mass) {
  const double h = rho.grid().spacing();
  std::vector<Segment> segs;
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double w = rho[i] * h / mass;
    if (w <= 0.0) continue;
    const double x0 = static_cast<double>(i) * h;
    segs.push_back({s, s + w, x0, x0 + h});
    s += w;
  }
  segs.back().s1 = 1.0;  // absorb rounding in the last cumulative sum
  return segs;
}

}  // namespace

double wasserstein2_1d(const ScalarField& rho, const ScalarField& rho_bar) {
  require_same_grid(rho.grid(), rho_bar.grid(), "wasserstein2_1d");
  if (rho.grid().dim() != 1) throw DomainError("wasserstein2_1d: one-dimensional grid required");
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0) || !(rho_bar[i] >= 0.0))
      throw DomainError("wasserstein2_1d: negative density");
  }
  const double ma = integral(rho);
  const double mb = integral(rho_bar);
  if (!(ma > 0.0) || !(mb > 0.0)) throw DomainError("wasserstein2_1d: zero mass");
  if (std::abs(ma - mb) > 1e-8 * std::max(ma, mb))
    throw DomainError("wasserstein2_1d: masses differ");

  const auto qa = quantile_segments(rho, ma);
  const auto qb = quantile_segments(rho_bar, mb);
  // exact integral of the squared gap of two piecewise-linear quantiles
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < qa.size() && j < qb.size()) {
    const double e = std::min(qa[i].s1, qb[j].s1);
    if (e > s) {
      const double d0 = qa[i].at(s) - qb[j].at(s);
      const double d1 = qa[i].at(e) - qb[j].at(e);
      sum += (e - s) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
      s = e;
    }
    if (qa[i].s1 <= e) ++i;
    if (j < qb.size() && qb[j].s1 <= e) ++j;
  }
  return std::sqrt(std::max(sum, 0.0));
}

}  // namespace relaxflow
