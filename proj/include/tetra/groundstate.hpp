#pragma once

#include <string>
#include <vector>

namespace tetra {

// Tabulated positive radial ground state of  U'' + (N-1)/r U' - U + U^p = 0.
// Samples live on a uniform mesh r_k = k*dr, k = 0..K, with r_K = r_max.
// Beyond r_match the table holds the analytic far field c r^{-nu} K_nu(r).
struct RadialProfile {
  double p = 3.0;
  int N = 3;
  double r_max = 20.0;
  double dr = 1e-3;
  double alpha = 0.0;        // lim e^r r^{(N-1)/2} U0(r)
  double shoot_value = 0.0;  // U0(0)
  double r_match = 0.0;      // start of the analytic tail inside the table
  std::vector<double> r, U, dU;

  std::size_t size() const { return r.size(); }
};

struct ShootOptions {
  double r_max = 20.0;
  double dr = 1e-3;
  double bracket_lo = 1.0 + 1e-6;
  double bracket_hi = 12.0;
  int max_bisections = 100;
};

enum class Trajectory { undershoot, crossing };

// classify one shot from U(0) = u0; undershoot covers both a turning point
// with U > 0 and growth beyond 2 U(0)
Trajectory classify_shot(double u0, double p, int N, double rtol);

RadialProfile shoot_ground_state(double p, int N, double tol, const ShootOptions &opt = {});

// max over interior mesh nodes of |U'' + (N-1)/r U' - U + U^p|, U'' from a
// fourth-order difference of the tabulated U'
double ode_residual(const RadialProfile &prof);

double eval_U0(const RadialProfile &prof, double r);
double eval_dU0(const RadialProfile &prof, double r);
// -U0^{p-1} U0'/r, with its limit at r = 0
double f_weight(const RadialProfile &prof, double r);

// omega_{N-1} int_0^inf U^q r^{N-1} dr (Simpson on the mesh plus closed-form tail)
double ball_integral(const RadialProfile &prof, double q, bool with_tail = true);

struct RadialIntegrals {
  double m2 = 0.0;   // int U0^2
  double mp1 = 0.0;  // int U0^{p+1}
};
RadialIntegrals radial_integrals(const RadialProfile &prof);

// smallest M with U0(r) <= M e^{-r} min(r^{-(N-1)/2}, 1) for all r
double minimal_M(const RadialProfile &prof);

// spread of log U0 + r + (N-1)/2 log r over [r0, r1], relative to its mean
double decay_law_drift(const RadialProfile &prof, double r0, double r1);

// upper incomplete gamma Gamma(s, x) for real s and x > 0
double upper_incomplete_gamma(double s, double x);

void write_profile(const RadialProfile &prof, const std::string &table_path,
                   const std::string &json_path);

}  // namespace tetra
