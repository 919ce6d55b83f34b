#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "tetra/errors.hpp"
#include "tetra/field.hpp"
#include "tetra/reduction.hpp"
#include "tetra/symmetry.hpp"

using namespace tetra;
using fixture::profile_p3;

namespace {

// coarse grid: the numbers are not converged in delta, only the algebra is tested
constexpr double kDelta = 0.4;

struct Case {
  PotentialSpec spec;
  AnsatzConfig cfg;
  Grid grid;
};

Case mid_window(double eps) {
  Case c;
  c.spec.eps = eps;
  const auto [lo, hi] = S_eps(eps, c.cfg.beta0);
  c.cfg.h = 0.5 * (lo + hi);
  c.grid = grid_for(box_for(hi), kDelta);
  return c;
}

Field random_symmetric(const Grid &g, std::mt19937_64 &rng, double scale) {
  std::normal_distribution<double> nd;
  Field u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = nd(rng);
  u.zero_boundary();
  // smooth it so the H1 norm is not dominated by the grid scale
  u = helmholtz(g).solve(u);
  u = symmetrize(u);
  u *= scale / norm_H1(u);
  return u;
}

// replace the four-bump ansatz by one bump at the origin
void make_single_bump(Ansatz &a) {
  a.W = Field::sample(a.grid, [&](const Vec3 &y) {
    return eval_U0(*a.prof, std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]));
  });
  for (std::size_t q = 0; q < a.W.size(); ++q) {
    a.sum_Up[q] = std::pow(std::abs(a.W[q]), a.p - 1.0) * a.W[q];
    a.coef[q] = 1.0 + a.potential[q] - a.p * std::pow(a.W[q], a.p - 1.0);
  }
}

// converged correction at eps = 1e-3, shared by several tests
struct Converged {
  Case c = mid_window(1e-3);
  Ansatz a{profile_p3(), c.spec, c.cfg, c.grid};
  CorrectionReport rep;
  Converged() {
    ReductionOptions opt;
    opt.allow_outside_ball = true;  // the coarse grid inflates |phi|
    rep = fixed_point(a, opt);
  }
};

const Converged &converged() {
  static const Converged c;
  return c;
}

}  // namespace

TEST(Reduction, GAtZeroIsTheAnsatzDefect) {
  const Case c = mid_window(1e-3);
  const Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  const auto bumps = bump_fields(profile_p3(), c.cfg.h, c.grid);
  const Field g = g_eps(Field(c.grid), a);
  double worst = 0.0, scale = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q) {
    double w = 0.0, sum_p = 0.0;
    for (const auto &b : bumps) {
      w += b[q];
      sum_p += b[q] * b[q] * b[q];
    }
    const double expect = a.potential[q] * w - (w * w * w - sum_p);
    if (g[q] == 0.0) continue;  // surface
    worst = std::max(worst, std::abs(g[q] - expect));
    scale = std::max(scale, std::abs(expect));
  }
  EXPECT_LT(worst, 1e-12 * scale);
  EXPECT_GT(scale, 0.0);
}

TEST(Reduction, GVanishesForOneBumpWithoutPotential) {
  Case c = mid_window(1e-3);
  c.spec.eps = 0.0;
  Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  make_single_bump(a);
  EXPECT_EQ(g_eps(Field(c.grid), a).max_abs(), 0.0);
}

TEST(Reduction, GIsQuadraticallyLipschitz) {
  const Case c = mid_window(1e-3);
  const Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  const HelmholtzSolver &H = a.helm();
  std::mt19937_64 rng(7);
  // with p = 3 the bound is C (|phi1| + |phi2|) |phi1 - phi2|; the ratio must stay
  // bounded as the pair shrinks
  auto ratio = [&](double scale) {
    double worst = 0.0;
    for (int s = 0; s < 4; ++s) {
      const Field p1 = random_symmetric(c.grid, rng, scale), p2 = random_symmetric(c.grid, rng, scale);
      const Field dg = H.solve(g_eps(p1, a) - g_eps(p2, a));
      worst = std::max(worst, norm_H1(dg) / ((norm_H1(p1) + norm_H1(p2)) * norm_H1(p1 - p2)));
    }
    return worst;
  };
  const double big = ratio(1e-1), small = ratio(1e-3);
  EXPECT_LT(small, 2.0 * big);
  EXPECT_LT(big, 50.0);
}

TEST(Reduction, SolveZeroRhs) {
  const Case c = mid_window(1e-3);
  const Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  EXPECT_EQ(solve_projected(Field(c.grid), a, 1e-8).max_abs(), 0.0);
}

TEST(Reduction, SolveThenApplyRecoversRhs) {
  const Case c = mid_window(1e-2);
  const Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  const Field rhs = a.projector(symmetrize(a.phistar));
  const double tol = 1e-8;
  LinearSolveInfo info;
  const Field x = solve_projected(rhs, a, tol, 500, &info);
  EXPECT_GT(info.iterations, 0);
  EXPECT_LT(norm_H1(apply_projected(x, a) - rhs), 10.0 * tol * norm_H1(rhs));
  EXPECT_LT(symmetry_residual(x), 1e-10 * x.max_abs());
  EXPECT_LT(std::abs(inner_H1(x, a.dW)), 1e-10 * norm_H1(x) * norm_H1(a.dW));
}

TEST(Reduction, StagnationIsReported) {
  const Case c = mid_window(1e-3);
  const Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  const Field rhs = a.projector(symmetrize(a.phistar));
  try {
    solve_projected(rhs, a, 1e-12, 3);
    FAIL() << "three iterations cannot reach 1e-12";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
    EXPECT_NE(std::string(e.what()).find("Rayleigh"), std::string::npos);
  }
}

TEST(Reduction, FixedPointOfOneBumpIsZero) {
  Case c = mid_window(1e-3);
  c.spec.eps = 0.0;
  Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  make_single_bump(a);
  ReductionOptions opt;
  opt.allow_outside_ball = true;  // eps^gamma = 0
  const CorrectionReport r = fixed_point(a, opt);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.norm_phi, 0.0);
}

TEST(Reduction, FixedPointContractsAndStaysInSubspace) {
  const CorrectionReport &r = converged().rep;
  ASSERT_GE(r.contraction_estimates.size(), 2u);
  EXPECT_LT(r.contraction_estimates.back(), 0.9);
  EXPECT_LT(r.increments.back(), 1e-9);
  EXPECT_LT(r.max_symmetry_residual, 1e-10);
  EXPECT_LT(r.max_dW_component, 1e-10 * r.norm_phi + 1e-14);
  EXPECT_GT(r.norm_phi, 0.0);
}

TEST(Reduction, FixedPointIndependentOfStart) {
  const Converged &c = converged();
  std::mt19937_64 rng(11);
  const Field start = random_symmetric(c.c.grid, rng, 0.5 * c.rep.norm_phi);
  ReductionOptions opt;
  opt.allow_outside_ball = true;
  const CorrectionReport other = fixed_point(c.a, opt, &start);
  EXPECT_LT(norm_H1(other.phi - c.rep.phi), 10.0 * opt.tol);
}

TEST(Reduction, ResidualLivesAlongTheDegenerateDirection) {
  const Converged &c = converged();
  const Ansatz &a = c.a;
  const Field R = strong_residual(c.rep.phi, a);
  const Field rep = a.helm().solve(R);
  EXPECT_LT(norm_H1(riesz(R, a)), 1e-8 * norm_H1(rep));
  // (1 - Delta)^{-1} R is a multiple of dW
  const double along = a.projector.coefficient(rep);
  Field rest = rep;
  rest.axpy(-along, a.dW);
  EXPECT_LT(norm_H1(rest), 1e-8 * norm_H1(rep));
  // and the multiplier reproduces that multiple through phi*
  const double lam = lagrange_multiplier(c.rep.phi, a);
  EXPECT_DOUBLE_EQ(lam, c.rep.lambda);
  const double per_unit = a.projector.coefficient(a.helm().solve(a.phistar));
  EXPECT_NEAR(lam * per_unit, along, 0.1 * std::abs(along));
}

TEST(Reduction, EscapeFromBallIsReported) {
  const Case c = mid_window(1e-2);
  const Ansatz a(profile_p3(), c.spec, c.cfg, c.grid);
  try {
    fixed_point(a);
    FAIL() << "the correction at eps = 1e-2 is larger than eps^gamma";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::numerical);
    EXPECT_NE(std::string(e.what()).find("ball"), std::string::npos);
  }
}

TEST(Reduction, CoercivityBounds) {
  const Converged &c = converged();
  const Coercivity k = estimate_coercivity(c.a);
  EXPECT_GT(k.rho_hat, 0.0);
  EXPECT_LE(k.rho_hat, k.C_hat);
  ASSERT_FALSE(k.eigenvalues.empty());
  EXPECT_NEAR(k.C_hat, std::abs(k.eigenvalues.front()), 0.05 * k.C_hat);
}

TEST(Reduction, KernelOfOneBump) {
  const KernelReport k = kernel_check(profile_p3(), grid_for(8.0, 0.35));
  EXPECT_TRUE(k.converged);
  EXPECT_EQ(k.near_zero, 3);
  EXPECT_GE(k.negative, 1);
  EXPECT_LT(k.eigenvalues.front(), -1.0);
}
