#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "tetra/energy.hpp"
#include "tetra/field.hpp"
#include "tetra/reduction.hpp"

using namespace tetra;
using fixture::profile_p3;

namespace {

const double kSqrt3 = std::sqrt(3.0);

std::array<Vec3, 4> bump_centres(double h) {
  const double s[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  std::array<Vec3, 4> c;
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 3; ++a) c[i][a] = h * s[i][a];
  return c;
}

// 1/2 |grad W|^2 + 1/2 W^2 - W^4/4 summed on a shifted cubic lattice, with
// the analytic gradient of each bump
double brute_force_IW(const RadialProfile &prof, double h, double d) {
  const auto c = bump_centres(h);
  const double R = kSqrt3 * h + 12.0;
  const int n = static_cast<int>(2.0 * R / d);
  double s = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double y[3] = {-R + (i + 0.5) * d, -R + (j + 0.5) * d, -R + (k + 0.5) * d};
        double W = 0.0, g[3] = {0, 0, 0};
        for (int b = 0; b < 4; ++b) {
          const double z[3] = {y[0] - c[b][0], y[1] - c[b][1], y[2] - c[b][2]};
          const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
          W += eval_U0(prof, r);
          const double du = eval_dU0(prof, r) / r;
          for (int a = 0; a < 3; ++a) g[a] += du * z[a];
        }
        s += 0.5 * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) + 0.5 * W * W - 0.25 * W * W * W * W;
      }
  return s * d * d * d;
}

// 2 h e^{2 sqrt2 h} sum_{i>=2} int_{C_1} U_1^3 U_i, C_1 taken as the points
// closest in direction to t_1, on a lattice shifted off the cone faces
double brute_force_J(const RadialProfile &prof, double h, double d) {
  const auto c = bump_centres(h);
  const int n = static_cast<int>(2.0 * 12.0 / d);
  double s = 0.0;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double y[3] = {c[0][0] - 12.0 + (i + 0.37) * d, c[0][1] - 12.0 + (j + 0.41) * d,
                             c[0][2] - 12.0 + (k + 0.43) * d};
        const double d1 = y[0] + y[1] + y[2];
        if (d1 < y[0] - y[1] - y[2] || d1 < -y[0] + y[1] - y[2] || d1 < -y[0] - y[1] + y[2]) continue;
        double U[4];
        for (int b = 0; b < 4; ++b)
          U[b] = eval_U0(prof, std::hypot(y[0] - c[b][0], y[1] - c[b][1], y[2] - c[b][2]));
        s += U[0] * U[0] * U[0] * (U[1] + U[2] + U[3]);
      }
  return 2.0 * h * std::exp(2.0 * std::sqrt(2.0) * h) * s * d * d * d;
}

// 3 alpha / sqrt2 * 4 pi int U^3 r sinh r dr, trapezoid on the table
double trapezoid_J_limit(const RadialProfile &prof) {
  double s = 0.0;
  const std::size_t K = prof.size() - 1;
  for (std::size_t k = 0; k <= K; ++k) {
    const double w = (k == 0 || k == K) ? 0.5 : 1.0;
    s += w * std::pow(prof.U[k], 3.0) * prof.r[k] * std::sinh(prof.r[k]);
  }
  return 3.0 * prof.alpha / std::sqrt(2.0) * 4.0 * M_PI * s * prof.dr;
}

}  // namespace

TEST(Energy, ZeroFieldHasZeroEnergy) {
  PotentialSpec spec;
  EXPECT_EQ(energy(Field(grid_for(6.0, 0.5)), spec, 3.0), 0.0);
}

TEST(Energy, GridEnergyOfOneBumpIsItsGroundStateLevel) {
  // I(U0) = (1/2 - 1/4) int U0^4 without potential; the stencil error is fourth order
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 0.0;
  const double level = 0.25 * oracle::trapezoid_ball(prof, 4.0);
  double err[2];
  for (int k = 0; k < 2; ++k) {
    const Grid g = grid_for(12.0, k == 0 ? 0.3 : 0.15);
    const Field u = Field::sample(g, [&](const Vec3 &y) { return eval_U0(prof, std::hypot(y[0], y[1], y[2])); });
    err[k] = energy(u, spec, 3.0) - level;
  }
  EXPECT_NEAR(err[0] / err[1], 16.0, 2.0);
  EXPECT_NEAR((16.0 * err[1] - err[0]) / 15.0, 0.0, 1e-3);
}

TEST(Energy, WindowEndpoints) {
  const auto [lo, hi] = S_eps(std::exp(-10.0), 0.05);
  EXPECT_NEAR(lo, 3.0355339, 1e-6);
  EXPECT_NEAR(hi, 4.0355339, 1e-6);
}

TEST(Energy, PotentialTermArithmetic) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 1e-3;
  spec.a = 1.0;
  spec.m = 2.0;
  const ExpansionTerms t = expansion_terms(prof, spec, 3.0);
  EXPECT_NEAR(t.potential_term, 2e-3 / 27.0 * oracle::trapezoid_ball(prof, 2.0), 1e-10);
  // eps h^{-m} scaling
  for (double h : {2.0, 4.0, 5.0}) {
    const ExpansionTerms u = expansion_terms(prof, spec, h);
    EXPECT_NEAR(u.potential_term * h * h, t.potential_term * 9.0, 1e-12);
    EXPECT_DOUBLE_EQ(u.A0, t.A0);
  }
}

TEST(Energy, GroundLevelMatchesQuadrature) {
  const auto &prof = profile_p3();
  const ExpansionTerms t = expansion_terms(prof, PotentialSpec{}, 3.0);
  EXPECT_NEAR(t.A0, oracle::trapezoid_ball(prof, 4.0), 1e-5);
  EXPECT_NEAR(t.A0, 75.589005, 1e-5);
}

TEST(Energy, AnsatzEnergyMatchesBruteForce) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 0.0;
  const double h = 3.0;
  EXPECT_NEAR(ansatz_energy(prof, spec, h), brute_force_IW(prof, h, 0.15), 1e-5);
}

TEST(Energy, AnsatzEnergyQuadratureConverges) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 1e-3;
  const double a = ansatz_energy(prof, spec, 3.2, 0.15);
  const double b = ansatz_energy(prof, spec, 3.2, 0.1);
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(Energy, AnsatzEnergyTendsToGroundLevel) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 0.0;
  const double A0 = expansion_terms(prof, spec, 3.0).A0;
  double prev = std::abs(ansatz_energy(prof, spec, 3.0) - A0);
  for (double h : {5.0, 7.0}) {
    const double gap = std::abs(ansatz_energy(prof, spec, h) - A0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(Energy, PotentialEnergyIsLinearInEps) {
  const auto &prof = profile_p3();
  PotentialSpec s0, s1, s2;
  s0.eps = 0.0;
  s1.eps = 1e-3;
  s2.eps = 2e-3;
  const double e0 = ansatz_energy(prof, s0, 3.0), e1 = ansatz_energy(prof, s1, 3.0),
               e2 = ansatz_energy(prof, s2, 3.0);
  EXPECT_GT(e1, e0);
  EXPECT_NEAR(e2 - e1, e1 - e0, 1e-11);
}

TEST(Energy, JStarMatchesBruteForce) {
  const auto &prof = profile_p3();
  EXPECT_NEAR(J_star(prof, 3.0), brute_force_J(prof, 3.0, 0.1), 0.2);
}

TEST(Energy, JStarApproachesItsLimit) {
  const auto &prof = profile_p3();
  const double J_inf = J_star_limit(prof);
  EXPECT_NEAR(J_inf, trapezoid_J_limit(prof), 1e-4);
  EXPECT_NEAR(J_inf, 196.1798, 1e-3);
  for (double h : {4.0, 6.0, 8.0}) {
    const double J = J_star(prof, h);
    EXPECT_GT(J, 0.0);
    EXPECT_NEAR(J / J_inf, 1.0, 1e-3) << "h = " << h;
  }
}

TEST(Energy, SurrogateIsTheTruncatedExpansion) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 1e-4;
  const double J_inf = J_star_limit(prof);
  for (double h : {2.5, 3.5}) {
    const ExpansionTerms t = expansion_terms(prof, spec, h);
    const double tail = J_inf / h * std::exp(-2.0 * std::sqrt(2.0) * h);
    EXPECT_NEAR(surrogate_energy(prof, spec, h), t.A0 + t.potential_term - tail, 1e-12);
  }
}

TEST(Energy, ExpansionRemainderIsSmallAtShortRange) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 1e-4;
  const double h = 2.5;
  const ExpansionTerms t = expansion_terms(prof, spec, h);
  const double rem = ansatz_energy(prof, spec, h) - (t.A0 + t.potential_term - t.interaction_term);
  EXPECT_LT(std::abs(rem), 0.1 * std::min(t.potential_term, t.interaction_term));
}

TEST(Energy, ReducedEnergyIsCloseToAnsatzEnergy) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 1e-3;
  const auto [lo, hi] = S_eps(spec.eps, 0.05);
  const AnsatzConfig cfg{0.5 * (lo + hi), 0.05};
  const Grid g = grid_for(box_for(hi), 0.35);
  ReductionOptions opt;
  opt.allow_outside_ball = true;
  Field phi;
  const ReducedEnergy r = reduced_energy(prof, spec, cfg, g, opt, 0.15, &phi);
  EXPECT_NEAR(r.norm_phi, norm_H1(phi), 1e-12);
  EXPECT_NEAR(r.I_W, ansatz_energy(prof, spec, cfg.h), 1e-12);
  // the correction moves the energy at second order
  EXPECT_LT(std::abs(r.F - r.I_W), 10.0 * r.norm_phi * r.norm_phi);
}
