#pragma once

#include <array>
#include <memory>
#include <string>
#include <utility>

#include "tetra/grid.hpp"
#include "tetra/groundstate.hpp"

namespace tetra {

enum class PotentialProfile {
  algebraic,        // a / (1 + r^2)^{m/2}
  gaussian_cutoff,  // a (1 - e^{-r^2})^{m/2} / r^m
};

std::string to_string(PotentialProfile p);
PotentialProfile potential_profile_from_string(const std::string &s);

struct PotentialSpec {
  double eps = 1e-4;
  double a = 140.0;
  double m = 2.0;
  double theta = 2.0;
  PotentialProfile profile = PotentialProfile::algebraic;
};

// V_1(r)
double V1(const PotentialSpec &spec, double r);
// V_eps(r) - 1 = eps V_1(r)
double eval_potential(const PotentialSpec &spec, double r);

struct AnsatzConfig {
  double h = 3.0;
  double beta0 = 0.05;

  double gamma() const;
};

// [(1/(2 sqrt 2) - beta0) ln(1/eps), (1/(2 sqrt 2) + beta0) ln(1/eps)]
std::pair<double, double> S_eps(double eps, double beta0);

// ---- ansatz pieces, sampled node-wise from the radial table ----

std::array<Field, 4> bump_fields(const RadialProfile &prof, double h, const Grid &grid);
Field assemble_W(const RadialProfile &prof, const AnsatzConfig &cfg, const Grid &grid);
Field dW_dh(const RadialProfile &prof, const AnsatzConfig &cfg, const Grid &grid);
Field phi_star(const RadialProfile &prof, const AnsatzConfig &cfg, const Grid &grid);
Field potential_field(const PotentialSpec &spec, const Grid &grid);  // eps V_1(|y|)

// bumps must sit well inside the box: sqrt(3) h + 5 < R
void check_bumps_inside(double h, const Grid &grid);

// ---- discrete operators (homogeneous Dirichlet data on the box surface) ----

// fourth-order 13-point Laplacian; boundary values of u are ignored (taken as
// zero), the second neighbour beyond the surface is the odd reflection, and the
// boundary of the result is zero
Field laplacian(const Field &u);

// exact inverse of (1 - Delta_h) through a type-I sine transform
class HelmholtzSolver {
 public:
  explicit HelmholtzSolver(const Grid &g);
  ~HelmholtzSolver();
  HelmholtzSolver(const HelmholtzSolver &) = delete;
  HelmholtzSolver &operator=(const HelmholtzSolver &) = delete;

  Field solve(const Field &f) const;
  const Grid &grid() const { return grid_; }

 private:
  struct Impl;
  Grid grid_;
  std::unique_ptr<Impl> impl_;
};

// one cached solver per grid (sine-transform plans are expensive to build)
const HelmholtzSolver &helmholtz(const Grid &g);

// trapezoid weights (exact for constants); plain delta^3 sums for Dirichlet fields
double inner_L2(const Field &u, const Field &v);
// grad u . grad v + u v as a sum of squared differences along grid lines;
// equals <(1 - Delta_h) u, v> for fields vanishing on the surface
double inner_H1(const Field &u, const Field &v);
double norm_L2(const Field &u);
double norm_H1(const Field &u);

// (1 - Delta_h) u
Field apply_M(const Field &u);

// -Delta_h u + V_eps u - p W^{p-1} u
Field apply_L(const Field &u, const Field &W, const PotentialSpec &spec, double p);
// -Delta_h u + c u with a precomputed coefficient field
Field apply_L_coef(const Field &u, const Field &coef);

// u - <u, dW>_{H1} / <dW, dW>_{H1} dW
Field project_Eh(const Field &u, const Field &dW);

// H1-orthogonal projector onto the complement of one direction
class Projector {
 public:
  explicit Projector(const Field &dir);
  Field operator()(const Field &u) const;
  double coefficient(const Field &u) const;  // <u, dir>_H1 / <dir, dir>_H1
  const Field &direction() const { return dir_; }

 private:
  Field dir_, Mdir_;
  double nrm2_;
};

// largest node-wise ratio lhs / rhs of the two overlap bounds on
// cone C_1 (values <= 1 mean the bounds hold)
struct KsumRatios {
  double tail_sum = 0.0;  // sum_{i>=2} U_{h,i} against 3M e^{-sqrt2 eta h} e^{-(1-eta)|y-ht1|} min(..)
  double full_sum = 0.0;  // W_h against 4M e^{-|y-ht1|} min(..)
};
KsumRatios ksum_ratios(const RadialProfile &prof, double h, double eta, double M, const Grid &grid);

}  // namespace tetra
