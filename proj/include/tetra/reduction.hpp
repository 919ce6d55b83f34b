#pragma once

#include <vector>

#include "tetra/field.hpp"
#include "tetra/groundstate.hpp"
#include "tetra/grid.hpp"

namespace tetra {

// Everything the reduction needs for one (eps, h): the ansatz, its pieces and
// the coefficient of the linearised operator. Field boundaries follow the
// Dirichlet convention wherever the field enters a linear solve.
struct Ansatz {
  Ansatz(const RadialProfile &prof, const PotentialSpec &spec, const AnsatzConfig &cfg, const Grid &grid);

  const RadialProfile *prof;
  PotentialSpec spec;
  AnsatzConfig cfg;
  Grid grid;
  double p;

  Field W;
  Field sum_Up;     // sum_i U_{h,i}^p
  Field potential;  // eps V_1
  Field coef;       // 1 + eps V_1 - p W^{p-1}
  Field dW;         // dW/dh, zero on the surface
  Field phistar;
  Projector projector;

  const HelmholtzSolver &helm() const { return helmholtz(grid); }
};

// (V_eps - 1) W - (|W + phi|^{p-1}(W + phi) - sum U^p - p W^{p-1} phi), zero on the surface
Field g_eps(const Field &phi, const Ansatz &a);

// strong residual -Delta u + V_eps u - |u|^{p-1} u of u = W + phi, with the exact
// Laplacian on the ansatz and the grid Laplacian on phi; equals L phi + g(phi)
Field strong_residual(const Field &phi, const Ansatz &a);

// H1 representative of a functional given by its L2 density, symmetrised and
// projected onto E_h: P S (1 - Delta_h)^{-1} f
Field riesz(const Field &f, const Ansatz &a);

// P S (1 - Delta_h)^{-1} L u
Field apply_projected(const Field &u, const Ansatz &a);

struct LinearSolveInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

// phi in E_h with apply_projected(phi) = rhs to relative H1 accuracy tol
Field solve_projected(const Field &rhs, const Ansatz &a, double tol, int max_iterations = 500,
                      LinearSolveInfo *info = nullptr);

struct Coercivity {
  double rho_hat = 0.0;  // smallest singular value of the projected operator
  double C_hat = 0.0;    // largest singular value
  std::vector<double> eigenvalues;  // lowest eigenvalues of L relative to (1 - Delta_h)
  int iterations = 0;
};

// symmetric = false drops the symmetrisation (E_h inside the full space)
Coercivity estimate_coercivity(const Ansatz &a, bool symmetric = true, int block = 4, double tol = 1e-5);

struct KernelReport {
  std::vector<double> eigenvalues;  // smallest eigenvalues of the grid linearisation
  double threshold = 0.0;           // 5 delta^2
  int near_zero = 0;
  int negative = 0;
  bool converged = false;
};

// eps = 0, one bump at the origin, full space: lowest `count` eigenvalues of
// -Delta_h + 1 - p U_0^{p-1}
KernelReport kernel_check(const RadialProfile &prof, const Grid &grid, int count = 8, double tol = 1e-6);

struct ReductionOptions {
  double tol = 1e-9;  // H1 size of the last increment
  int max_iterations = 200;
  double linear_tol = 1e-7;
  int max_linear_iterations = 500;
  bool allow_outside_ball = false;  // keep iterating when |phi| > eps^gamma
};

struct CorrectionReport {
  double h = 0.0, eps = 0.0;
  Field phi;
  double norm_phi = 0.0;
  int iterations = 0;
  std::vector<double> increments;             // |phi^{k+1} - phi^k|
  std::vector<double> contraction_estimates;  // ratios of successive increments
  int linear_iterations = 0;
  double ball_radius = 0.0;  // eps^gamma
  bool inside_ball = true;
  double max_symmetry_residual = 0.0;
  double max_dW_component = 0.0;  // |<phi, dW>_H1| / |dW|_H1 over the iterates
  double lambda = 0.0;
  double rho_hat = 0.0;  // filled by callers that also estimate coercivity
};

CorrectionReport fixed_point(const Ansatz &a, const ReductionOptions &opt = {}, const Field *start = nullptr);

// <strong residual of W + phi, phi*>_L2 / <phi*, phi*>_L2
double lagrange_multiplier(const Field &phi, const Ansatz &a);

// box half-width used for a given largest bump distance
double box_for(double h_max);

}  // namespace tetra
