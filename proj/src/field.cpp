#include "tetra/field.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "tetra/errors.hpp"
#include "tetra/symmetry.hpp"

namespace tetra {

std::string to_string(PotentialProfile p) {
  return p == PotentialProfile::algebraic ? "algebraic" : "gaussian_cutoff";
}

PotentialProfile potential_profile_from_string(const std::string &s) {
  if (s == "algebraic") return PotentialProfile::algebraic;
  if (s == "gaussian_cutoff") return PotentialProfile::gaussian_cutoff;
  throw parameter_error("config", "unknown potential profile '" + s + "'");
}

double V1(const PotentialSpec &spec, double r) {
  switch (spec.profile) {
    case PotentialProfile::algebraic:
      return spec.a * std::pow(1.0 + r * r, -0.5 * spec.m);
    case PotentialProfile::gaussian_cutoff:
      if (r < 1e-6) return spec.a;
      return spec.a * std::pow(-std::expm1(-r * r), 0.5 * spec.m) * std::pow(r, -spec.m);
  }
  return 0.0;
}

double eval_potential(const PotentialSpec &spec, double r) { return spec.eps * V1(spec, r); }

double AnsatzConfig::gamma() const { return 0.5 - std::sqrt(2.0) * beta0; }

std::pair<double, double> S_eps(double eps, double beta0) {
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  const double L = std::log(1.0 / eps);
  return {(c - beta0) * L, (c + beta0) * L};
}

void check_bumps_inside(double h, const Grid &grid) {
  if (!(std::sqrt(3.0) * h + 5.0 < grid.R))
    throw geometry_error("field", "bumps too close to the box boundary");
}

namespace {

inline double dist(const Vec3 &y, const Vec3 &c) {
  const double a = y[0] - c[0], b = y[1] - c[1], d = y[2] - c[2];
  return std::sqrt(a * a + b * b + d * d);
}

std::array<Vec3, 4> centres(double h) {
  std::array<Vec3, 4> c;
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 3; ++a) c[i][a] = h * vertices()[i][a];
  return c;
}

}  // namespace

std::array<Field, 4> bump_fields(const RadialProfile &prof, double h, const Grid &grid) {
  const auto c = centres(h);
  std::array<Field, 4> out;
  for (int i = 0; i < 4; ++i)
    out[i] = Field::sample(grid, [&](const Vec3 &y) { return eval_U0(prof, dist(y, c[i])); });
  return out;
}

Field assemble_W(const RadialProfile &prof, const AnsatzConfig &cfg, const Grid &grid) {
  check_bumps_inside(cfg.h, grid);
  const auto c = centres(cfg.h);
  return Field::sample(grid, [&](const Vec3 &y) {
    double s = 0.0;
    for (const auto &ci : c) s += eval_U0(prof, dist(y, ci));
    return s;
  });
}

Field dW_dh(const RadialProfile &prof, const AnsatzConfig &cfg, const Grid &grid) {
  check_bumps_inside(cfg.h, grid);
  const auto c = centres(cfg.h);
  const auto &t = vertices();
  return Field::sample(grid, [&](const Vec3 &y) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double rho = dist(y, c[i]);
      if (rho == 0.0) continue;
      const double proj = (y[0] - c[i][0]) * t[i][0] + (y[1] - c[i][1]) * t[i][1] +
                          (y[2] - c[i][2]) * t[i][2];
      s -= eval_dU0(prof, rho) * proj / rho;
    }
    return s;
  });
}

Field phi_star(const RadialProfile &prof, const AnsatzConfig &cfg, const Grid &grid) {
  check_bumps_inside(cfg.h, grid);
  const auto c = centres(cfg.h);
  const auto &t = vertices();
  return Field::sample(grid, [&](const Vec3 &y) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double proj = (y[0] - c[i][0]) * t[i][0] + (y[1] - c[i][1]) * t[i][1] +
                          (y[2] - c[i][2]) * t[i][2];
      s += f_weight(prof, dist(y, c[i])) * proj;
    }
    return s;
  });
}

Field potential_field(const PotentialSpec &spec, const Grid &grid) {
  return Field::sample(grid, [&](const Vec3 &y) {
    return eval_potential(spec, std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]));
  });
}

namespace {

// one axis of the fourth-order stencil (-1, 16, -30, 16, -1) / 12 at interior
// node i, Dirichlet data zero and the odd reflection u_{-1} = -u_1 outside
inline double axis_term(const double *a, std::size_t q, std::size_t st, int i, int n) {
  const double c = a[q];
  const double m1 = i > 1 ? a[q - st] : 0.0;
  const double p1 = i < n - 2 ? a[q + st] : 0.0;
  const double m2 = i > 2 ? a[q - 2 * st] : (i == 2 ? 0.0 : -c);
  const double p2 = i < n - 3 ? a[q + 2 * st] : (i == n - 3 ? 0.0 : -c);
  return (16.0 * (m1 + p1) - (m2 + p2) - 30.0 * c) / 12.0;
}

}  // namespace

Field laplacian(const Field &u) {
  const Grid &g = u.grid();
  const int n = g.n;
  const double inv = 1.0 / (g.delta() * g.delta());
  const std::size_t sy = n, sz = static_cast<std::size_t>(n) * n;
  Field out(g);
  const double *a = u.data();
  double *o = out.data();
  for (int k = 1; k < n - 1; ++k)
    for (int j = 1; j < n - 1; ++j) {
      const std::size_t base = g.index(0, j, k);
      for (int i = 1; i < n - 1; ++i) {
        const std::size_t q = base + i;
        o[q] = (axis_term(a, q, 1, i, n) + axis_term(a, q, sy, j, n) + axis_term(a, q, sz, k, n)) * inv;
      }
    }
  return out;
}

struct HelmholtzSolver::Impl {
  int m = 0;
  fftw_plan plan = nullptr;
  std::vector<double> lam;  // per-axis symbol of -Delta_h
  double norm = 1.0;
};

HelmholtzSolver::HelmholtzSolver(const Grid &g) : grid_(g), impl_(std::make_unique<Impl>()) {
  const int m = g.n - 2;
  impl_->m = m;
  double *buf = fftw_alloc_real(static_cast<std::size_t>(m) * m * m);
  // FFTW_ESTIMATE keeps the plan (and therefore the rounding) identical run to run
  impl_->plan = fftw_plan_r2r_3d(m, m, m, buf, buf, FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00,
                                 FFTW_ESTIMATE);
  fftw_free(buf);
  if (!impl_->plan) throw numerical_error("field", "sine transform planning failed");
  const double d = g.delta();
  impl_->lam.resize(m);
  for (int a = 0; a < m; ++a) {
    const double s2 = std::pow(std::sin(M_PI * (a + 1) / (2.0 * (g.n - 1))), 2);
    impl_->lam[a] = 4.0 / (d * d) * (s2 + s2 * s2 / 3.0);
  }
  const double L = 2.0 * (g.n - 1);
  impl_->norm = 1.0 / (L * L * L);
}

HelmholtzSolver::~HelmholtzSolver() {
  if (impl_ && impl_->plan) fftw_destroy_plan(impl_->plan);
}

Field HelmholtzSolver::solve(const Field &f) const {
  if (f.grid() != grid_) throw geometry_error("field", "solver built for another grid");
  const int n = grid_.n, m = impl_->m;
  const std::size_t total = static_cast<std::size_t>(m) * m * m;
  double *buf = fftw_alloc_real(total);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      std::memcpy(buf + static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k),
                  f.data() + grid_.index(1, j + 1, k + 1), sizeof(double) * m);
  fftw_execute_r2r(impl_->plan, buf, buf);
  const auto &lam = impl_->lam;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) {
      double *row = buf + static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k);
      const double base = 1.0 + lam[j] + lam[k];
      for (int i = 0; i < m; ++i) row[i] *= impl_->norm / (base + lam[i]);
    }
  fftw_execute_r2r(impl_->plan, buf, buf);
  Field out(grid_);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      std::memcpy(out.data() + grid_.index(1, j + 1, k + 1),
                  buf + static_cast<std::size_t>(m) * (j + static_cast<std::size_t>(m) * k),
                  sizeof(double) * m);
  fftw_free(buf);
  (void)n;
  return out;
}

const HelmholtzSolver &helmholtz(const Grid &g) {
  static std::mutex mu;
  static std::map<std::pair<double, int>, std::unique_ptr<HelmholtzSolver>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto &slot = cache[{g.R, g.n}];
  if (!slot) slot = std::make_unique<HelmholtzSolver>(g);
  return *slot;
}

namespace {

// trapezoid weights along one axis (1/2 on the two end nodes)
std::vector<double> axis_weights(int n) {
  std::vector<double> w(n, 1.0);
  w.front() = w.back() = 0.5;
  return w;
}

}  // namespace

double inner_L2(const Field &u, const Field &v) {
  require_same_grid(u, v, "field");
  const Grid &g = u.grid();
  const int n = g.n;
  const auto w = axis_weights(n);
  double s = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const std::size_t base = g.index(0, j, k);
      double row = 0.0;
      for (int i = 0; i < n; ++i) row += w[i] * u[base + i] * v[base + i];
      s += w[j] * w[k] * row;
    }
  return s * g.cell_volume();
}

namespace {

// 4/3 of the nearest-neighbour energy minus 1/12 of the next-nearest one; the
// two next-nearest pairs straddling the surface (half weight: each is its own
// mirror image) use the odd reflection
// u_{-1} = 2 u_0 - u_1, which makes the form <(1 - Delta_h) u, v> for Dirichlet
// fields and zero on constants
double line_energy(const double *u, const double *v, std::size_t st, int n) {
  double near = 0.0, far = 0.0;
  for (int i = 0; i + 1 < n; ++i) near += (u[(i + 1) * st] - u[i * st]) * (v[(i + 1) * st] - v[i * st]);
  for (int i = 0; i + 2 < n; ++i) far += (u[(i + 2) * st] - u[i * st]) * (v[(i + 2) * st] - v[i * st]);
  far += 2.0 * (u[st] - u[0]) * (v[st] - v[0]);
  far += 2.0 * (u[(n - 1) * st] - u[(n - 2) * st]) * (v[(n - 1) * st] - v[(n - 2) * st]);
  return 4.0 / 3.0 * near - far / 12.0;
}

}  // namespace

double inner_H1(const Field &u, const Field &v) {
  require_same_grid(u, v, "field");
  const Grid &g = u.grid();
  const int n = g.n;
  const auto w = axis_weights(n);
  const double *a = u.data(), *b = v.data();
  double grad = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      grad += w[j] * w[k] * line_energy(a + g.index(0, j, k), b + g.index(0, j, k), 1, n);
      grad += w[j] * w[k] * line_energy(a + g.index(j, 0, k), b + g.index(j, 0, k), n, n);
      grad += w[j] * w[k] * line_energy(a + g.index(j, k, 0), b + g.index(j, k, 0), static_cast<std::size_t>(n) * n, n);
    }
  const double d = g.delta();
  return inner_L2(u, v) + g.cell_volume() * grad / (d * d);
}

double norm_L2(const Field &u) { return std::sqrt(inner_L2(u, u)); }
double norm_H1(const Field &u) { return std::sqrt(inner_H1(u, u)); }

Field apply_M(const Field &u) {
  Field out = laplacian(u);
  out *= -1.0;
  const Grid &g = u.grid();
  for (int k = 1; k < g.n - 1; ++k)
    for (int j = 1; j < g.n - 1; ++j)
      for (int i = 1; i < g.n - 1; ++i) out.at(i, j, k) += u.at(i, j, k);
  return out;
}

Field apply_L_coef(const Field &u, const Field &coef) {
  require_same_grid(u, coef, "field");
  Field out = laplacian(u);
  const Grid &g = u.grid();
  for (int k = 1; k < g.n - 1; ++k)
    for (int j = 1; j < g.n - 1; ++j) {
      const std::size_t base = g.index(0, j, k);
      for (int i = 1; i < g.n - 1; ++i) {
        const std::size_t q = base + i;
        out[q] = -out[q] + coef[q] * u[q];
      }
    }
  return out;
}

Field apply_L(const Field &u, const Field &W, const PotentialSpec &spec, double p) {
  require_same_grid(u, W, "field");
  Field coef = potential_field(spec, W.grid());
  for (std::size_t q = 0; q < coef.size(); ++q)
    coef[q] += 1.0 - p * std::pow(std::abs(W[q]), p - 1.0);
  return apply_L_coef(u, coef);
}

Projector::Projector(const Field &dir) : dir_(dir), Mdir_(dir) {
  dir_.zero_boundary();
  Mdir_ = apply_M(dir_);
  nrm2_ = inner_L2(Mdir_, dir_);
  if (!(nrm2_ > 0.0)) throw numerical_error("field", "degenerate projection direction");
}

double Projector::coefficient(const Field &u) const { return inner_L2(u, Mdir_) / nrm2_; }

Field Projector::operator()(const Field &u) const {
  Field out = u;
  out.axpy(-coefficient(u), dir_);
  return out;
}

Field project_Eh(const Field &u, const Field &dW) {
  const double nrm2 = inner_H1(dW, dW);
  if (!(nrm2 > 0.0)) throw numerical_error("field", "degenerate projection direction");
  Field out = u;
  out.axpy(-inner_H1(u, dW) / nrm2, dW);
  return out;
}

KsumRatios ksum_ratios(const RadialProfile &prof, double h, double eta, double M, const Grid &grid) {
  const auto c = centres(h);
  KsumRatios r;
  const double e = 0.5 * (prof.N - 1);
  for (int k = 0; k < grid.n; ++k)
    for (int j = 0; j < grid.n; ++j)
      for (int i = 0; i < grid.n; ++i) {
        const Vec3 y = grid.point(i, j, k);
        if (!in_cone(1, y)) continue;
        const double rho1 = dist(y, c[0]);
        const double m = rho1 > 0 ? std::min(std::pow(rho1, -e), 1.0) : 1.0;
        double tail = 0.0;
        for (int b = 1; b < 4; ++b) tail += eval_U0(prof, dist(y, c[b]));
        const double full = tail + eval_U0(prof, rho1);
        const double b1 = 3.0 * M * std::exp(-std::sqrt(2.0) * eta * h) * std::exp(-(1.0 - eta) * rho1) * m;
        const double b2 = 4.0 * M * std::exp(-rho1) * m;
        r.tail_sum = std::max(r.tail_sum, tail / b1);
        r.full_sum = std::max(r.full_sum, full / b2);
      }
  return r;
}

}  // namespace tetra
