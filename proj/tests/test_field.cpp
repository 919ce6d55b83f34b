#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "tetra/errors.hpp"
#include "tetra/field.hpp"
#include "tetra/grid.hpp"
#include "tetra/symmetry.hpp"

using namespace tetra;
using fixture::profile_p3;

namespace {

double norm3(const Vec3 &y) { return std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]); }

Vec3 minus(const Vec3 &a, const Vec3 &b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Field random_dirichlet(const Grid &g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Field u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = nd(rng);
  u.zero_boundary();
  return u;
}

// smooth group-invariant field built from a few random Gaussians
Field random_symmetric(const Grid &g, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> pos(-3.0, 3.0), wid(0.7, 1.5), amp(-1.0, 1.0);
  Field u(g);
  for (int b = 0; b < 3; ++b) {
    const Vec3 c{pos(rng), pos(rng), pos(rng)};
    const double w = wid(rng), a = amp(rng);
    u += Field::sample(g, [&](const Vec3 &y) {
      const Vec3 d = minus(y, c);
      return a * std::exp(-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (w * w));
    });
  }
  u.zero_boundary();
  return symmetrize(u);
}

double interior_max(const Field &u, double margin) {
  const Grid &g = u.grid();
  double m = 0.0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const Vec3 y = g.point(i, j, k);
        if (std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])}) > g.R - margin) continue;
        m = std::max(m, std::abs(u.at(i, j, k)));
      }
  return m;
}

}  // namespace

TEST(Potential, Examples) {
  PotentialSpec s;
  s.a = 1.0;
  s.m = 2.0;
  s.eps = 0.01;
  EXPECT_DOUBLE_EQ(eval_potential(s, 0.0), 0.01);
  EXPECT_NEAR(eval_potential(s, 1.0), 0.005, 1e-17);
  s.a = 140.0;
  EXPECT_DOUBLE_EQ(eval_potential(s, 0.0), 1.4);
  // r^m V1 -> a with an O(r^-2) remainder
  for (double r : {10.0, 100.0, 1000.0}) {
    const double rem = (std::pow(r, s.m) * V1(s, r) - s.a) / s.a;
    EXPECT_LT(std::abs(rem) * r * r, 1.0 + 1e-9);
    EXPECT_GT(std::abs(rem) * r * r, 0.9);
  }
  PotentialSpec c = s;
  c.profile = PotentialProfile::gaussian_cutoff;
  EXPECT_NEAR(V1(c, 1e-3), c.a, 1e-3 * c.a);
  EXPECT_NEAR(V1(c, 30.0) * 900.0, c.a, 1e-12 * c.a);
  EXPECT_EQ(potential_profile_from_string("gaussian_cutoff"), PotentialProfile::gaussian_cutoff);
  EXPECT_THROW(potential_profile_from_string("coulomb"), Error);
}

TEST(Ansatz, GammaAndWindow) {
  AnsatzConfig cfg;
  cfg.beta0 = 0.05;
  EXPECT_NEAR(cfg.gamma(), 0.5 - std::sqrt(2.0) * 0.05, 1e-15);
  EXPECT_NEAR(cfg.gamma(), 0.42929, 1e-5);
  const auto [lo, hi] = S_eps(1e-4, 0.05);
  EXPECT_NEAR(lo, (1.0 / std::sqrt(8.0) - 0.05) * std::log(1e4), 1e-12);
  EXPECT_NEAR(hi, (1.0 / std::sqrt(8.0) + 0.05) * std::log(1e4), 1e-12);
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(lo, hi);
}

TEST(GridTest, ConstructionAndErrors) {
  EXPECT_THROW(Grid(3.0, 16), Error);
  EXPECT_THROW(Grid(3.0, 15), Error);
  EXPECT_THROW(Grid(-1.0, 17), Error);
  const Grid g(3.0, 17);
  EXPECT_DOUBLE_EQ(g.delta(), 0.375);
  EXPECT_EQ(g.point(g.center(), g.center(), g.center()), (Vec3{0, 0, 0}));
  const Grid f = grid_for(14.4, 0.23);
  EXPECT_LE(f.delta(), 0.23);
  int m = f.n - 1;
  for (int p : {2, 3, 5})
    while (m % p == 0) m /= p;
  EXPECT_EQ(m, 1);
  EXPECT_THROW(inner_L2(Field(g), Field(Grid(3.0, 19))), Error);
  EXPECT_THROW(assemble_W(profile_p3(), {3.0, 0.05}, Grid(9.0, 17)), Error);
}

TEST(Ansatz, WValues) {
  const auto &prof = profile_p3();
  const double h = 2.0;
  // h t1 = (2,2,2) is a node on this grid
  const Grid g(10.0, 41);
  const Field W = assemble_W(prof, {h, 0.05}, g);
  const int c = g.center(), s = c + 4;
  EXPECT_NEAR(W.at(s, s, s), eval_U0(prof, 0.0) + 3.0 * eval_U0(prof, 2.0 * std::sqrt(2.0) * h), 1e-14);
  EXPECT_NEAR(W.at(c, c, c), 4.0 * eval_U0(prof, std::sqrt(3.0) * h), 1e-14);
  EXPECT_LT(symmetry_residual(W), 1e-14);
  const Field W0 = assemble_W(prof, {0.0, 0.05}, g);
  const Field radial = Field::sample(g, [&](const Vec3 &y) { return 4.0 * eval_U0(prof, norm3(y)); });
  EXPECT_LT((W0 - radial).max_abs(), 1e-14);
}

TEST(Ansatz, DerivativeInH) {
  const auto &prof = profile_p3();
  const Grid g(10.0, 41);
  const double h = 2.5;
  const Field dW = dW_dh(prof, {h, 0.05}, g);
  auto fd_error = [&](double s) {
    const Field fd = (1.0 / (2.0 * s)) * (assemble_W(prof, {h + s, 0.05}, g) - assemble_W(prof, {h - s, 0.05}, g));
    return (dW - fd).max_abs();
  };
  const double e1 = fd_error(2e-4), e2 = fd_error(1e-4);
  EXPECT_LT(e2, 1e-6);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
  const int c = g.center();
  const double origin = 4.0 * std::sqrt(3.0) * eval_dU0(prof, std::sqrt(3.0) * h);
  EXPECT_NEAR(dW.at(c, c, c), origin, 1e-13);
  EXPECT_LT(origin, 0.0);
  EXPECT_LT(symmetry_residual(dW), 1e-14);
}

TEST(Ansatz, PhiStar) {
  const auto &prof = profile_p3();
  const Grid g(10.0, 41);
  const double h = 2.0;
  const Field ps = phi_star(prof, {h, 0.05}, g);
  EXPECT_LT(symmetry_residual(ps), 1e-14);
  // at h t1 only the three other bumps contribute
  const int s = g.center() + 4;
  const Vec3 y{h, h, h};
  double others = 0.0;
  for (int i = 1; i < 4; ++i) {
    Vec3 d;
    for (int a = 0; a < 3; ++a) d[a] = y[a] - h * vertices()[i][a];
    double proj = 0.0;
    for (int a = 0; a < 3; ++a) proj += d[a] * vertices()[i][a];
    others += f_weight(prof, norm3(d)) * proj;
  }
  EXPECT_NEAR(ps.at(s, s, s), others, 1e-15);
}

// (1 - Delta) dW = p phi*: compare both sides through test fields, at two
// spacings to see the discretisation error shrink
TEST(Ansatz, DerivativeAndPhiStarIdentity) {
  const auto &prof = profile_p3();
  const double h = 2.5;
  double worst[2] = {0.0, 0.0};
  int slot = 0;
  for (int n : {41, 81}) {
    const Grid g(10.0, n);
    const Field dW = dW_dh(prof, {h, 0.05}, g);
    const Field ps = phi_star(prof, {h, 0.05}, g);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
      const Field psi = random_symmetric(g, rng);
      const double lhs = inner_H1(dW, psi);
      const double rhs = 3.0 * inner_L2(ps, psi);
      const double scale = norm_H1(dW) * norm_H1(psi);
      worst[slot] = std::max(worst[slot], std::abs(lhs - rhs) / scale);
    }
    ++slot;
  }
  EXPECT_LT(worst[1], 0.01);
  EXPECT_GT(worst[0] / worst[1], 3.0);
}

TEST(InnerProducts, ConstantsAndOrdering) {
  const Grid g(3.0, 17);
  const Field c(g, 2.0);
  EXPECT_NEAR(inner_L2(c, c), 4.0 * 216.0, 1e-10);
  EXPECT_NEAR(inner_H1(c, c), 4.0 * 216.0, 1e-10);
  const Field u = random_dirichlet(g, 3), v = random_dirichlet(g, 4);
  EXPECT_GE(inner_H1(u, u), inner_L2(u, u));
  EXPECT_GT(inner_L2(u, u), 0.0);
  EXPECT_DOUBLE_EQ(inner_H1(u, v), inner_H1(v, u));
  const Field w = random_dirichlet(g, 5);
  EXPECT_NEAR(inner_H1(u + 2.0 * w, v), inner_H1(u, v) + 2.0 * inner_H1(w, v), 1e-10);
  // discrete Green identity
  EXPECT_NEAR(inner_H1(u, v), inner_L2(apply_M(u), v), 1e-10 * norm_H1(u) * norm_H1(v));
}

TEST(InnerProducts, BumpMatchesRadialQuadrature) {
  const auto &prof = profile_p3();
  const Grid g(12.0, 97);  // spacing 0.25
  const Field b = Field::sample(g, [&](const Vec3 &y) { return eval_U0(prof, norm3(y)); });
  double radial = 0.0;
  for (std::size_t k = 1; k < prof.size(); ++k) {
    const double r0 = prof.r[k - 1], r1 = prof.r[k];
    const double f0 = (prof.dU[k - 1] * prof.dU[k - 1] + prof.U[k - 1] * prof.U[k - 1]) * r0 * r0;
    const double f1 = (prof.dU[k] * prof.dU[k] + prof.U[k] * prof.U[k]) * r1 * r1;
    radial += 0.5 * (r1 - r0) * (f0 + f1);
  }
  radial *= 4.0 * M_PI;
  EXPECT_NEAR(inner_H1(b, b) / radial, 1.0, 0.01);
}

TEST(Helmholtz, InvertsM) {
  const Grid g(4.0, 31);
  const Field u = random_dirichlet(g, 9);
  const Field back = helmholtz(g).solve(apply_M(u));
  EXPECT_LT((back - u).max_abs(), 1e-11);
  const Field f = random_dirichlet(g, 10);
  EXPECT_LT((apply_M(helmholtz(g).solve(f)) - f).max_abs(), 1e-10);
  EXPECT_EQ(&helmholtz(g), &helmholtz(Grid(4.0, 31)));
}

TEST(LinearOperator, ZeroAndSymmetry) {
  const auto &prof = profile_p3();
  const Grid g(10.0, 41);
  const Field W = assemble_W(prof, {2.5, 0.05}, g);
  PotentialSpec spec;
  EXPECT_EQ(apply_L(Field(g), W, spec, 3.0).max_abs(), 0.0);
  const Field u = random_dirichlet(g, 1), v = random_dirichlet(g, 2);
  const double a = inner_L2(apply_L(u, W, spec, 3.0), v);
  const double b = inner_L2(u, apply_L(v, W, spec, 3.0));
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a) + 1e-9);
}

TEST(LinearOperator, TranslationModeIsNearKernel) {
  const auto &prof = profile_p3();
  double res[2], rq[2];
  int slot = 0;
  for (int n : {65, 129}) {
    const Grid g(8.0, n);
    Field coef = Field::sample(g, [&](const Vec3 &y) {
      const double U = eval_U0(prof, norm3(y));
      return 1.0 - 3.0 * U * U;
    });
    Field u = Field::sample(g, [&](const Vec3 &y) {
      const double r = norm3(y);
      return r > 0 ? eval_dU0(prof, r) * y[0] / r : 0.0;
    });
    u.zero_boundary();
    const Field Lu = apply_L_coef(u, coef);
    res[slot] = norm_L2(Lu) / norm_L2(u);
    rq[slot] = inner_L2(Lu, u) / inner_L2(u, u);
    ++slot;
  }
  // at spacing 0.25 the Rayleigh quotient sits well inside the 5 delta^2 window
  EXPECT_LT(std::abs(rq[0]), 5.0 * 0.25 * 0.25);
  EXPECT_GT(res[0] / res[1], 3.5);
  EXPECT_LT(res[1], 0.1);
}

// weak form with analytic gradients of Gaussians against the strong stencil
TEST(LinearOperator, WeakStrongConsistency) {
  const auto &prof = profile_p3();
  PotentialSpec spec;
  spec.eps = 0.01;
  spec.a = 1.0;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const Vec3 cu{pos(rng), pos(rng), pos(rng)}, cv{pos(rng), pos(rng), pos(rng)};
    double err[2];
    int slot = 0;
    for (int n : {25, 49}) {
      const Grid g(6.0, n);
      const Field W = Field::sample(g, [&](const Vec3 &y) { return eval_U0(prof, norm3(y)); });
      auto gauss = [](const Vec3 &y, const Vec3 &c) {
        const Vec3 d = minus(y, c);
        return std::exp(-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]));
      };
      Field u = Field::sample(g, [&](const Vec3 &y) { return gauss(y, cu); });
      Field v = Field::sample(g, [&](const Vec3 &y) { return gauss(y, cv); });
      u.zero_boundary();
      v.zero_boundary();
      const double strong = inner_L2(apply_L(u, W, spec, 3.0), v);
      double weak = 0.0;
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            const Vec3 y = g.point(i, j, k);
            const Vec3 du = minus(y, cu), dv = minus(y, cv);
            const double gu = gauss(y, cu), gv = gauss(y, cv);
            const double grad = 4.0 * gu * gv * (du[0] * dv[0] + du[1] * dv[1] + du[2] * dv[2]);
            const double Wy = W.at(i, j, k);
            weak += grad + (1.0 + eval_potential(spec, norm3(y)) - 3.0 * Wy * Wy) * gu * gv;
          }
      weak *= g.cell_volume();
      err[slot++] = std::abs(strong - weak) / (std::abs(weak) + 1e-3);
    }
    EXPECT_LT(err[1], 0.02) << t;
    EXPECT_GT(err[0] / err[1], 3.0) << t;
  }
}

TEST(Ansatz, EquationResidualConverges) {
  const auto &prof = profile_p3();
  const double h = 2.0;
  double res[2];
  int slot = 0;
  for (int n : {69, 137}) {
    const Grid g(8.5, n);
    const Field W = assemble_W(prof, {h, 0.05}, g);
    const auto bumps = bump_fields(prof, h, g);
    Field r = laplacian(W) - W;
    for (const auto &b : bumps)
      for (std::size_t q = 0; q < r.size(); ++q) r[q] += b[q] * b[q] * b[q];
    res[slot++] = interior_max(r, 1.0);
  }
  EXPECT_GT(res[0] / res[1], 3.5);
  EXPECT_LT(res[1], 1.0);
}

TEST(Projection, Examples) {
  const auto &prof = profile_p3();
  const Grid g(10.0, 41);
  const AnsatzConfig cfg{2.5, 0.05};
  Field dW = dW_dh(prof, cfg, g);
  dW.zero_boundary();
  EXPECT_LT(project_Eh(dW, dW).max_abs(), 1e-14 * dW.max_abs());
  const Projector P(dW);
  EXPECT_LT(P(dW).max_abs(), 1e-14 * dW.max_abs());
  std::mt19937_64 rng(23);
  const Field u = random_symmetric(g, rng);
  const Field pu = P(u);
  EXPECT_NEAR(inner_H1(pu, dW), 0.0, 1e-12 * norm_H1(u) * norm_H1(dW));
  EXPECT_LT((P(pu) - pu).max_abs(), 1e-14 * (pu.max_abs() + 1.0));
  EXPECT_LT((project_Eh(u, dW) - pu).max_abs(), 1e-12);
  EXPECT_THROW(Projector(Field(g)), Error);
}

TEST(Projection, PhiStarOrthogonality) {
  const auto &prof = profile_p3();
  const Grid g(10.0, 81);
  const AnsatzConfig cfg{2.5, 0.05};
  const Projector P(dW_dh(prof, cfg, g));
  const Field ps = phi_star(prof, cfg, g);
  const double d2 = g.delta() * g.delta();
  std::mt19937_64 rng(29);
  for (int t = 0; t < 5; ++t) {
    const Field u = random_symmetric(g, rng);
    EXPECT_LT(std::abs(inner_L2(P(u), ps)) / norm_L2(u), 10.0 * d2);
  }
}

TEST(Overlap, BoundsHoldOnFirstCone) {
  const auto &prof = profile_p3();
  const double M = minimal_M(prof);
  for (double h : {2.5, 3.5}) {
    const Grid g = grid_for(std::sqrt(3.0) * h + 8.0, 0.3);
    for (double eta : {0.5, 1.0, 2.0}) {
      const auto r = ksum_ratios(prof, h, eta, M, g);
      EXPECT_LE(r.tail_sum, 1.0) << h << ' ' << eta;
      EXPECT_LE(r.full_sum, 1.0) << h << ' ' << eta;
      EXPECT_GT(r.full_sum, 0.1);
    }
  }
}

TEST(Dump, BitExactRoundTrip) {
  const Grid g(3.0, 17);
  Field u = random_dirichlet(g, 31);
  u[5] = -0.0;
  u[6] = 1e-310;
  const auto path = std::filesystem::temp_directory_path() / "tetra_field_roundtrip.bin";
  dump_field(u, path.string(), "noise");
  std::string desc;
  const Field v = load_field(path.string(), &desc);
  EXPECT_EQ(desc, "noise");
  EXPECT_EQ(v.grid(), g);
  EXPECT_EQ(std::memcmp(u.data(), v.data(), u.size() * sizeof(double)), 0);
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(std::filesystem::file_size(path), header.size() + 1 + 8 * g.size());
  // truncation is reported
  std::filesystem::resize_file(path, header.size() + 1 + 8 * 100);
  EXPECT_THROW(load_field(path.string()), Error);
  std::filesystem::remove(path);
}
