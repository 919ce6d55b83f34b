#include "tetra/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tetra/errors.hpp"
#include "tetra/krylov.hpp"
#include "tetra/symmetry.hpp"

namespace tetra {

namespace {

const double kSqrt2 = std::sqrt(2.0);
const double kSqrt3 = std::sqrt(3.0);

double norm3(const Vec3 &y) { return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]); }

// weight of lattice node (i, j, k) in C_1: 1 / number of cones containing it,
// zero outside C_1 (integer tests, so shared faces are detected exactly)
double cone1_weight(long i, long j, long k) {
  if (j + k < 0 || i + k < 0 || i + j < 0) return 0.0;
  int m = 1;
  m += (j + k <= 0 && i - j >= 0 && i - k >= 0);
  m += (i + k <= 0 && i - j <= 0 && j - k >= 0);
  m += (i + j <= 0 && i - k <= 0 && j - k <= 0);
  return 1.0 / m;
}

// sum over lattice nodes of C_1 inside the cube |y - centre|_inf <= radius;
// the cube is snapped to the origin-centred lattice
template <class F>
double cone1_sum(double delta, const Vec3 &centre, double radius, F &&f) {
  long lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = static_cast<long>(std::floor((centre[a] - radius) / delta));
    hi[a] = static_cast<long>(std::ceil((centre[a] + radius) / delta));
  }
  double s = 0.0;
  for (long k = lo[2]; k <= hi[2]; ++k)
    for (long j = lo[1]; j <= hi[1]; ++j) {
      double row = 0.0;
      for (long i = lo[0]; i <= hi[0]; ++i) {
        const double w = cone1_weight(i, j, k);
        if (w == 0.0) continue;
        row += w * f(Vec3{i * delta, j * delta, k * delta});
      }
      s += row;
    }
  return s * delta * delta * delta;
}

std::array<Vec3, 4> centres(double h) {
  std::array<Vec3, 4> c;
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 3; ++a) c[i][a] = h * vertices()[i][a];
  return c;
}

double A0_of(const RadialProfile &prof) {
  return 2.0 * (prof.p - 1.0) / (prof.p + 1.0) * radial_integrals(prof).mp1;
}

}  // namespace

double energy(const Field &u, const PotentialSpec &spec, double p) {
  const Grid &g = u.grid();
  const Field pot = potential_field(spec, g);
  Field vu(g), up(g);
  for (std::size_t q = 0; q < u.size(); ++q) {
    vu[q] = pot[q] * u[q];
    up[q] = std::pow(std::abs(u[q]), p + 1.0);
  }
  return 0.5 * inner_H1(u, u) + 0.5 * inner_L2(vu, u) - inner_L2(up, Field(g, 1.0)) / (p + 1.0);
}

double ansatz_energy(const RadialProfile &prof, const PotentialSpec &spec, double h, double delta) {
  const double p = prof.p;
  const auto c = centres(h);
  const double excess = 4.0 * cone1_sum(delta, {0.0, 0.0, 0.0}, kSqrt3 * h + 8.0, [&](const Vec3 &y) {
    double U[4], W = 0.0, sum_p1 = 0.0, cross = 0.0;
    for (int i = 0; i < 4; ++i) {
      U[i] = eval_U0(prof, norm3({y[0] - c[i][0], y[1] - c[i][1], y[2] - c[i][2]}));
      W += U[i];
      sum_p1 += std::pow(U[i], p + 1.0);
    }
    for (int i = 0; i < 4; ++i) cross += std::pow(U[i], p) * (W - U[i]);
    return 0.5 * cross - (std::pow(W, p + 1.0) - sum_p1) / (p + 1.0) +
           0.5 * eval_potential(spec, norm3(y)) * W * W;
  });
  return A0_of(prof) + excess;
}

double J_star(const RadialProfile &prof, double h, double delta) {
  if (prof.N != 3) throw parameter_error("energy", "J_star is implemented for N = 3");
  const double p = prof.p;
  const auto c = centres(h);
  // U_1^p has decayed below 1e-30 beyond |y - h t_1| = 25/p
  const double s = cone1_sum(delta, c[0], 25.0 / p + 2.0, [&](const Vec3 &y) {
    const double u1 = eval_U0(prof, norm3({y[0] - c[0][0], y[1] - c[0][1], y[2] - c[0][2]}));
    double rest = 0.0;
    for (int i = 1; i < 4; ++i) rest += eval_U0(prof, norm3({y[0] - c[i][0], y[1] - c[i][1], y[2] - c[i][2]}));
    return std::pow(u1, p) * rest;
  });
  return 2.0 * s * h * std::exp(2.0 * kSqrt2 * h);
}

double J_star_limit(const RadialProfile &prof) {
  // int U^p e^{y_1} dy = 4 pi int U^p r sinh r dr, Simpson on the table
  const std::size_t K = prof.size() - 1;
  auto f = [&](std::size_t k) { return std::pow(prof.U[k], prof.p) * prof.r[k] * std::sinh(prof.r[k]); };
  double s = f(0) + f(K);
  for (std::size_t k = 1; k < K; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k);
  s *= prof.dr / 3.0;
  return 3.0 * prof.alpha / kSqrt2 * 4.0 * M_PI * s;
}

ExpansionTerms expansion_terms(const RadialProfile &prof, const PotentialSpec &spec, double h, double delta) {
  ExpansionTerms t;
  t.A0 = A0_of(prof);
  t.potential_term = 2.0 * spec.a * spec.eps * std::pow(kSqrt3 * h, -spec.m) * radial_integrals(prof).m2;
  t.J_star = J_star(prof, h, delta);
  t.interaction_term = t.J_star / h * std::exp(-2.0 * kSqrt2 * h);
  return t;
}

double surrogate_energy(const RadialProfile &prof, const PotentialSpec &spec, double h) {
  static thread_local const RadialProfile *cached = nullptr;
  static thread_local double J_inf = 0.0, m2 = 0.0, A0 = 0.0;
  if (cached != &prof) {
    cached = &prof;
    J_inf = J_star_limit(prof);
    m2 = radial_integrals(prof).m2;
    A0 = A0_of(prof);
  }
  return A0 + 2.0 * spec.a * spec.eps * std::pow(kSqrt3 * h, -spec.m) * m2 - J_inf / h * std::exp(-2.0 * kSqrt2 * h);
}

ReducedEnergy reduced_energy(const RadialProfile &prof, const PotentialSpec &spec, const AnsatzConfig &cfg,
                             const Grid &grid, const ReductionOptions &opt, double quad_delta, Field *phi_out) {
  const Ansatz a(prof, spec, cfg, grid);
  const CorrectionReport rep = fixed_point(a, opt);
  const Field &phi = rep.phi;
  const double p = a.p;
  Field rem(grid);
  for (std::size_t q = 0; q < rem.size(); ++q) {
    const double w = a.W[q], f = phi[q];
    rem[q] = std::pow(std::abs(w + f), p + 1.0) - std::pow(w, p + 1.0) - (p + 1.0) * std::pow(w, p) * f -
             0.5 * (p + 1.0) * p * std::pow(w, p - 1.0) * f * f;
  }
  const Field ones(grid, 1.0);
  ReducedEnergy r;
  r.h = cfg.h;
  r.I_W = ansatz_energy(prof, spec, cfg.h, quad_delta);
  r.F = r.I_W + inner_L2(g_eps(Field(grid), a), phi) + 0.5 * inner_L2(apply_L_coef(phi, a.coef), phi) -
        inner_L2(rem, ones) / (p + 1.0);
  r.lambda = rep.lambda;
  r.norm_phi = rep.norm_phi;
  r.iterations = rep.iterations;
  if (phi_out) *phi_out = phi;
  return r;
}

ReducedEnergyCurve scan_and_maximize(const RadialProfile &prof, const PotentialSpec &spec, double beta0,
                                     const ScanOptions &opt) {
  if (opt.samples < 9) throw parameter_error("energy", "the scan needs at least 9 samples");
  ReducedEnergyCurve c;
  c.eps = spec.eps;
  c.beta0 = beta0;
  std::tie(c.lo, c.hi) = S_eps(spec.eps, beta0);
  c.A0 = A0_of(prof);
  const Grid grid = grid_for(box_for(c.hi), opt.delta);

  auto evaluate = [&](double h) {
    ++c.evaluations;
    return reduced_energy(prof, spec, AnsatzConfig{h, beta0}, grid, opt.reduction, opt.quad_delta);
  };
  const int n = opt.samples;
  for (int k = 0; k < n; ++k) {
    const double h = c.lo + (c.hi - c.lo) * k / (n - 1);
    const ReducedEnergy r = evaluate(h);
    c.h.push_back(h);
    c.F.push_back(r.F);
    c.I_W.push_back(r.I_W);
    c.lambda.push_back(r.lambda);
    c.norm_phi.push_back(r.norm_phi);
    c.terms.push_back(expansion_terms(prof, spec, h, opt.quad_delta));
  }
  for (int k = 1; k + 1 < n; ++k) c.local_maxima += c.F[k] > c.F[k - 1] && c.F[k] > c.F[k + 1];
  const int best = static_cast<int>(std::max_element(c.F.begin(), c.F.end()) - c.F.begin());
  c.lower_below_A0 = c.F.front() < c.A0;
  c.upper_above_A0 = c.F.back() > c.A0;
  c.interior = best > 0 && best < n - 1;
  c.h_star = c.h[best];
  c.F_star = c.F[best];
  if (c.interior) {
    // golden section on the bracket of the best sample
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = c.h[best - 1], b = c.h[best + 1];
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = evaluate(x1).F, f2 = evaluate(x2).F;
    while (b - a > opt.h_resolution) {
      if (f1 > f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = evaluate(x1).F;
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = evaluate(x2).F;
      }
    }
    if (std::max(f1, f2) > c.F_star) {
      c.h_star = f1 > f2 ? x1 : x2;
      c.F_star = std::max(f1, f2);
    }
    // nearest samples strictly on either side of h_star
    int left = best, right = best;
    while (left > 0 && c.h[left] >= c.h_star) --left;
    while (right < n - 1 && c.h[right] <= c.h_star) ++right;
    c.lambda_sign_change = c.lambda[left] * c.lambda[right] < 0.0;
  }

  // maximiser of the closed-form surrogate on the same window
  {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = c.lo, b = c.hi;
    double bestv = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 400; ++k) {
      const double h = c.lo + (c.hi - c.lo) * k / 400.0;
      const double v = surrogate_energy(prof, spec, h);
      if (v > bestv) {
        bestv = v;
        a = std::max(c.lo, h - (c.hi - c.lo) / 400.0);
        b = std::min(c.hi, h + (c.hi - c.lo) / 400.0);
      }
    }
    while (b - a > 1e-8) {
      const double x1 = b - g * (b - a), x2 = a + g * (b - a);
      if (surrogate_energy(prof, spec, x1) > surrogate_energy(prof, spec, x2))
        b = x2;
      else
        a = x1;
    }
    c.surrogate_h = 0.5 * (a + b);
  }
  return c;
}

FullSolution full_solve(const Ansatz &a, const Field &phi, const NewtonOptions &opt) {
  const Grid &g = a.grid;
  const HelmholtzSolver &H = a.helm();
  const double p = a.p;
  Field psi = symmetrize(phi);  // u = W + psi
  FullSolution s;
  auto dot = [](const Field &x, const Field &y) { return inner_H1(x, y); };
  std::ostringstream history;
  for (int step = 0;; ++step) {
    const Field R = strong_residual(psi, a);
    const double res = norm_L2(R);
    s.residuals.push_back(res);
    history << (step ? ", " : "") << res;
    if (res < opt.tol) break;
    if (step == opt.max_steps || !std::isfinite(res))
      throw numerical_error("energy", "Newton did not converge; residual history: " + history.str());
    Field coef(g);
    for (std::size_t q = 0; q < coef.size(); ++q)
      coef[q] = 1.0 + a.potential[q] - p * std::pow(std::abs(a.W[q] + psi[q]), p - 1.0);
    auto op = [&](const Field &v) { return symmetrize(H.solve(apply_L_coef(v, coef))); };
    Field rhs = symmetrize(H.solve(R));
    rhs *= -1.0;
    const MinresResult lin = minres(op, rhs, dot, opt.linear_tol, opt.max_linear_iterations);
    if (!std::isfinite(lin.relative_residual) || lin.relative_residual > 1e-2)
      throw numerical_error("energy", "Newton step solve failed; residual history: " + history.str());
    psi += lin.x;
    psi = symmetrize(psi);
    s.steps = step + 1;
  }
  s.residual = s.residuals.back();
  s.u = a.W + psi;
  s.u.zero_boundary();
  s.symmetry_residual = symmetry_residual(s.u);

  s.positive = true;
  std::vector<std::array<int, 3>> peaks;
  for (int k = 1; k < g.n - 1; ++k)
    for (int j = 1; j < g.n - 1; ++j)
      for (int i = 1; i < g.n - 1; ++i) {
        const double v = s.u.at(i, j, k);
        if (v <= 0.0) s.positive = false;
        bool top = true;
        for (int dk = -1; dk <= 1 && top; ++dk)
          for (int dj = -1; dj <= 1 && top; ++dj)
            for (int di = -1; di <= 1 && top; ++di)
              if ((di || dj || dk) && s.u.at(i + di, j + dj, k + dk) > v) top = false;
        if (top) peaks.push_back({i, j, k});
      }
  // plateaus of equal neighbouring nodes count once
  std::vector<int> cluster(peaks.size(), -1);
  int clusters = 0;
  for (std::size_t q = 0; q < peaks.size(); ++q) {
    if (cluster[q] >= 0) continue;
    cluster[q] = clusters;
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t r = 0; r < peaks.size(); ++r) {
        if (cluster[r] >= 0) continue;
        for (std::size_t t = 0; t < peaks.size(); ++t) {
          if (cluster[t] != clusters) continue;
          if (std::abs(peaks[r][0] - peaks[t][0]) <= 1 && std::abs(peaks[r][1] - peaks[t][1]) <= 1 &&
              std::abs(peaks[r][2] - peaks[t][2]) <= 1) {
            cluster[r] = clusters;
            grew = true;
            break;
          }
        }
      }
    }
    ++clusters;
  }
  for (int c = 0; c < clusters; ++c) {
    Vec3 m{0.0, 0.0, 0.0};
    int count = 0;
    for (std::size_t q = 0; q < peaks.size(); ++q)
      if (cluster[q] == c) {
        const Vec3 y = g.point(peaks[q][0], peaks[q][1], peaks[q][2]);
        for (int d = 0; d < 3; ++d) m[d] += y[d];
        ++count;
      }
    for (int d = 0; d < 3; ++d) m[d] /= count;
    s.maxima.push_back(m);
  }

  if (s.maxima.size() == 4) {
    // match each maximum to its vertex and fit h' by least squares along t_i
    double num = 0.0;
    std::array<int, 4> match{};
    for (int q = 0; q < 4; ++q) {
      double bestdot = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < 4; ++i) {
        const auto &t = vertices()[i];
        const double d = s.maxima[q][0] * t[0] + s.maxima[q][1] * t[1] + s.maxima[q][2] * t[2];
        if (d > bestdot) {
          bestdot = d;
          match[q] = i;
        }
      }
      num += bestdot;
    }
    s.h_prime = num / 12.0;
    for (int q = 0; q < 4; ++q) {
      const auto &t = vertices()[match[q]];
      for (int d = 0; d < 3; ++d)
        s.max_offset_cells = std::max(s.max_offset_cells, std::abs(s.maxima[q][d] - s.h_prime * t[d]) / g.delta());
    }
  }
  return s;
}

}  // namespace tetra
