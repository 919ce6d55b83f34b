#pragma once

#include <vector>

#include "tetra/field.hpp"
#include "tetra/groundstate.hpp"
#include "tetra/grid.hpp"
#include "tetra/reduction.hpp"

namespace tetra {

// delta^3 sum of 1/2 (|grad u|^2 + V_eps u^2) - |u|^{p+1}/(p+1), gradient part
// from the H1 form
double energy(const Field &u, const PotentialSpec &spec, double p);

// I_eps(W_h) with the gradient terms removed through the bump equations:
// A0 + 1/2 sum_{i!=j} int U_i^p U_j - int (W^{p+1} - sum U_i^{p+1})/(p+1) + eps/2 int V_1 W^2,
// the integrals by lattice quadrature on C_1
double ansatz_energy(const RadialProfile &prof, const PotentialSpec &spec, double h, double delta = 0.15);

// h e^{2 sqrt2 h} 2 sum_{i>=2} int_{C_1} U_{h,1}^p U_{h,i}  (N = 3)
double J_star(const RadialProfile &prof, double h, double delta = 0.15);

// large-h limit of J_star: 3 alpha / sqrt2 int U0^p(y) e^{y_1} dy
double J_star_limit(const RadialProfile &prof);

struct ExpansionTerms {
  double A0 = 0.0;
  double potential_term = 0.0;    // 2 a eps (sqrt3 h)^{-m} int U0^2
  double interaction_term = 0.0;  // J_star h^{-1} e^{-2 sqrt2 h}
  double J_star = 0.0;
};
ExpansionTerms expansion_terms(const RadialProfile &prof, const PotentialSpec &spec, double h, double delta = 0.15);

// A0 + potential_term - J_inf h^{-1} e^{-2 sqrt2 h}
double surrogate_energy(const RadialProfile &prof, const PotentialSpec &spec, double h);

struct ReducedEnergy {
  double h = 0.0;
  double F = 0.0;    // I_eps(W_h + phi_h)
  double I_W = 0.0;  // I_eps(W_h)
  double lambda = 0.0;
  double norm_phi = 0.0;
  int iterations = 0;
};

// fixed point on the given grid, then I(W) + int g(0) phi + <L phi, phi>/2 + remainder
ReducedEnergy reduced_energy(const RadialProfile &prof, const PotentialSpec &spec, const AnsatzConfig &cfg,
                             const Grid &grid, const ReductionOptions &opt = {}, double quad_delta = 0.15,
                             Field *phi_out = nullptr);

struct ScanOptions {
  int samples = 9;
  double delta = 0.3;         // grid spacing of the reduction
  double h_resolution = 1e-3;
  double quad_delta = 0.15;   // spacing of the ansatz-energy quadrature
  ReductionOptions reduction;
};

struct ReducedEnergyCurve {
  double eps = 0.0, beta0 = 0.0;
  double lo = 0.0, hi = 0.0;  // S_eps
  std::vector<double> h, F, I_W, lambda, norm_phi;
  std::vector<ExpansionTerms> terms;
  double A0 = 0.0;
  double h_star = 0.0, F_star = 0.0;
  bool interior = false;
  bool lower_below_A0 = false;  // F(lower end) < A0
  bool upper_above_A0 = false;  // F(upper end) > A0
  bool lambda_sign_change = false;  // across h_star, from the neighbouring samples
  int local_maxima = 0;             // among the samples
  double surrogate_h = 0.0;
  int evaluations = 0;
};

ReducedEnergyCurve scan_and_maximize(const RadialProfile &prof, const PotentialSpec &spec, double beta0,
                                     const ScanOptions &opt = {});

struct NewtonOptions {
  double tol = 1e-6;  // L2 norm of the strong residual
  int max_steps = 8;
  double linear_tol = 1e-8;
  int max_linear_iterations = 800;
};

struct FullSolution {
  Field u;
  std::vector<double> residuals;  // L2 strong residual before each step and at the end
  int steps = 0;
  double residual = 0.0;
  bool positive = false;
  double symmetry_residual = 0.0;
  std::vector<Vec3> maxima;  // interior local maxima (clusters of equal nodes merged)
  double h_prime = 0.0;
  double max_offset_cells = 0.0;  // max_i |y_i - h' t_i|_inf / delta
};

// Newton on -Delta u + V_eps u - |u|^{p-1} u = 0 in H_s from W_h + phi
FullSolution full_solve(const Ansatz &a, const Field &phi, const NewtonOptions &opt = {});

}  // namespace tetra
