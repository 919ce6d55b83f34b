#include "tetra/reduction.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <random>
#include <sstream>

#include "tetra/errors.hpp"
#include "tetra/krylov.hpp"
#include "tetra/symmetry.hpp"

namespace tetra {

namespace {

Field boundary_free(Field f) {
  f.zero_boundary();
  return f;
}

inline double spow(double x, double p) { return std::pow(std::abs(x), p - 1.0) * x; }

std::vector<Field> random_block(const Grid &g, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Field> out;
  for (int j = 0; j < k; ++j) {
    Field u(g);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = nd(rng);
    u.zero_boundary();
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace

double box_for(double h_max) { return std::sqrt(3.0) * h_max + 8.0; }

Ansatz::Ansatz(const RadialProfile &prof_, const PotentialSpec &spec_, const AnsatzConfig &cfg_, const Grid &grid_)
    : prof(&prof_),
      spec(spec_),
      cfg(cfg_),
      grid(grid_),
      p(prof_.p),
      W(assemble_W(prof_, cfg_, grid_)),
      sum_Up(grid_),
      potential(potential_field(spec_, grid_)),
      coef(grid_),
      dW(boundary_free(dW_dh(prof_, cfg_, grid_))),
      phistar(phi_star(prof_, cfg_, grid_)),
      projector(dW) {
  for (const auto &b : bump_fields(prof_, cfg_.h, grid_))
    for (std::size_t q = 0; q < b.size(); ++q) sum_Up[q] += spow(b[q], p);
  for (std::size_t q = 0; q < W.size(); ++q)
    coef[q] = 1.0 + potential[q] - p * std::pow(std::abs(W[q]), p - 1.0);
}

Field g_eps(const Field &phi, const Ansatz &a) {
  require_same_grid(phi, a.W, "reduction");
  Field out(a.grid);
  const double p = a.p;
  for (std::size_t q = 0; q < out.size(); ++q) {
    const double w = a.W[q], f = phi[q];
    out[q] = a.potential[q] * w - (spow(w + f, p) - a.sum_Up[q] - p * std::pow(std::abs(w), p - 1.0) * f);
  }
  out.zero_boundary();
  return out;
}

Field strong_residual(const Field &phi, const Ansatz &a) {
  Field r = apply_L_coef(phi, a.coef);
  r += g_eps(phi, a);
  return r;
}

Field riesz(const Field &f, const Ansatz &a) {
  // near a solution the result is far smaller than f; the second pass removes
  // the rounding left outside E_h by the first
  const Field once = a.projector(symmetrize(a.helm().solve(f)));
  return a.projector(symmetrize(once));
}

Field apply_projected(const Field &u, const Ansatz &a) { return riesz(apply_L_coef(u, a.coef), a); }

Field solve_projected(const Field &rhs, const Ansatz &a, double tol, int max_iterations, LinearSolveInfo *info) {
  auto op = [&](const Field &u) { return apply_projected(u, a); };
  auto dot = [](const Field &u, const Field &v) { return inner_H1(u, v); };
  MinresResult r = minres(op, rhs, dot, tol, max_iterations);
  if (info) {
    info->iterations = r.iterations;
    info->relative_residual = r.relative_residual;
  }
  if (!r.converged) {
    std::ostringstream msg;
    msg << "projected solve stagnated at relative residual " << r.relative_residual << " after "
        << r.iterations << " iterations; smallest Rayleigh quotient " << r.min_rayleigh;
    throw numerical_error("reduction", msg.str());
  }
  return a.projector(symmetrize(r.x));
}

Coercivity estimate_coercivity(const Ansatz &a, bool symmetric, int block, double tol) {
  const HelmholtzSolver &H = a.helm();
  auto constrain = [&](const Field &u) { return a.projector(symmetric ? symmetrize(u) : u); };
  EigenProblem prob;
  prob.A = [&](const Field &u) { return apply_L_coef(u, a.coef); };
  prob.B = [](const Field &u) { return apply_M(u); };
  prob.T = [&](const Field &u) { return H.solve(u); };
  prob.constrain = constrain;
  if (std::getenv("TETRA_TRACE"))
    prob.monitor = [](int it, const std::vector<double> &v, const std::vector<double> &r) {
      std::fprintf(stderr, "lobpcg %d:", it);
      for (std::size_t j = 0; j < v.size(); ++j) std::fprintf(stderr, " %.6f(%.1e)", v[j], r[j]);
      std::fprintf(stderr, "\n");
    };
  const LobpcgResult lr = lobpcg(prob, random_block(a.grid, block, 1234), tol, 300);
  if (!lr.converged) throw numerical_error("reduction", "coercivity eigen-iteration did not converge");
  Coercivity c;
  c.eigenvalues = lr.values;
  c.iterations = lr.iterations;
  if (lr.values.back() <= 0.0)
    throw numerical_error("reduction", "no positive eigenvalue in the computed block; enlarge it");
  c.rho_hat = std::abs(lr.values.front());
  for (double v : lr.values) c.rho_hat = std::min(c.rho_hat, std::abs(v));

  // largest singular value by power iteration in the H1 norm
  Field x = constrain(random_block(a.grid, 1, 99).front());
  x *= 1.0 / norm_H1(x);
  for (int it = 0; it < 40; ++it) {
    Field y = a.projector(symmetric ? symmetrize(H.solve(apply_L_coef(x, a.coef))) : H.solve(apply_L_coef(x, a.coef)));
    c.C_hat = norm_H1(y);
    x = std::move(y);
    x *= 1.0 / c.C_hat;
  }
  return c;
}

KernelReport kernel_check(const RadialProfile &prof, const Grid &grid, int count, double tol) {
  const double p = prof.p;
  const Field coef = Field::sample(grid, [&](const Vec3 &y) {
    const double U = eval_U0(prof, std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]));
    return 1.0 - p * std::pow(U, p - 1.0);
  });
  const HelmholtzSolver &H = helmholtz(grid);
  EigenProblem prob;
  prob.A = [&](const Field &u) { return apply_L_coef(u, coef); };
  prob.T = [&](const Field &u) { return H.solve(u); };
  const LobpcgResult lr = lobpcg(prob, random_block(grid, count, 4321), tol, 400);
  KernelReport k;
  k.eigenvalues = lr.values;
  k.converged = lr.converged;
  k.threshold = 5.0 * grid.delta() * grid.delta();
  for (double v : lr.values) {
    k.near_zero += std::abs(v) < k.threshold;
    k.negative += v < 0.0;
  }
  return k;
}

double lagrange_multiplier(const Field &phi, const Ansatz &a) {
  return inner_L2(strong_residual(phi, a), a.phistar) / inner_L2(a.phistar, a.phistar);
}

CorrectionReport fixed_point(const Ansatz &a, const ReductionOptions &opt, const Field *start) {
  CorrectionReport rep;
  rep.h = a.cfg.h;
  rep.eps = a.spec.eps;
  rep.ball_radius = std::pow(a.spec.eps, a.cfg.gamma());
  Field phi = start ? a.projector(symmetrize(boundary_free(*start))) : Field(a.grid);
  const double dW_norm = norm_H1(a.dW);
  int growth = 0;
  for (int k = 1; k <= opt.max_iterations; ++k) {
    Field rhs = riesz(strong_residual(phi, a), a);
    rhs *= -1.0;
    LinearSolveInfo info;
    const Field delta = solve_projected(rhs, a, opt.linear_tol, opt.max_linear_iterations, &info);
    rep.linear_iterations += info.iterations;
    phi += delta;
    phi = a.projector(symmetrize(phi));
    const double inc = norm_H1(delta);
    rep.increments.push_back(inc);
    if (rep.increments.size() >= 2) {
      const double ratio = inc / rep.increments[rep.increments.size() - 2];
      rep.contraction_estimates.push_back(ratio);
      growth = ratio > 1.0 ? growth + 1 : 0;
    }
    rep.iterations = k;
    rep.norm_phi = norm_H1(phi);
    rep.max_symmetry_residual = std::max(rep.max_symmetry_residual, symmetry_residual(phi));
    rep.max_dW_component = std::max(rep.max_dW_component, std::abs(inner_H1(phi, a.dW)) / dW_norm);
    if (rep.norm_phi > rep.ball_radius) {
      rep.inside_ball = false;
      if (!opt.allow_outside_ball) {
        std::ostringstream msg;
        msg << "non-contraction: |phi| = " << rep.norm_phi << " left the ball of radius eps^gamma = "
            << rep.ball_radius << " at iteration " << k;
        throw numerical_error("reduction", msg.str());
      }
    }
    if (growth >= 5) throw numerical_error("reduction", "fixed-point increments grow: no contraction");
    if (inc < opt.tol) {
      rep.phi = std::move(phi);
      rep.lambda = lagrange_multiplier(rep.phi, a);
      return rep;
    }
  }
  throw numerical_error("reduction", "fixed point not reached within the iteration budget");
}

}  // namespace tetra
