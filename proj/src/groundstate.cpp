#include "tetra/groundstate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "tetra/errors.hpp"

namespace tetra {

namespace {

namespace odeint = boost::numeric::odeint;
// extended precision keeps the bracketing shots together to larger r
using Real = long double;
using State = std::array<Real, 2>;

template <class T>
T signed_pow(T u, double p) {
  return std::copysign(std::pow(std::abs(u), static_cast<T>(p)), u);
}

struct RadialRhs {
  double p;
  int N;
  void operator()(const State &y, State &dy, Real r) const {
    dy[0] = y[1];
    dy[1] = -(N - 1) / r * y[1] + y[0] - signed_pow(y[0], p);
  }
};

constexpr double r_start = 1e-4;

// two-term Taylor start  U(r) = u0 + U''(0) r^2/2
State taylor_start(Real u0, double p, int N) {
  const Real upp = (u0 - signed_pow(u0, p)) / N;
  return {u0 + Real(0.5) * upp * r_start * r_start, upp * r_start};
}

auto make_stepper(double rtol, double max_dt) {
  return odeint::make_dense_output(Real(rtol * 1e-2), Real(rtol), Real(max_dt),
                                   odeint::runge_kutta_dopri5<State, Real>());
}

void check_exponent(double p, int N) {
  if (N < 3) throw parameter_error("groundstate", "N must be >= 3");
  const double crit = (N + 2.0) / (N - 2.0);
  if (!(p > 1.0 && p < crit))
    throw parameter_error("groundstate", "p outside the subcritical range (1, (N+2)/(N-2))");
}

double far_field_shape(int N, double r) {
  const double nu = 0.5 * (N - 2);
  return std::pow(r, -nu) * std::cyl_bessel_k(nu, r);
}

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep5_d(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

// samples of one trajectory on the mesh up to the first mesh node where it
// leaves the positive decreasing regime (or reaches r_end)
struct MeshTrajectory {
  std::vector<double> U, dU;
};

MeshTrajectory sample_on_mesh(Real u0, double p, int N, double dr, std::size_t K,
                              double rtol) {
  MeshTrajectory out;
  out.U.push_back(u0);
  out.dU.push_back(0.0);
  auto st = make_stepper(rtol, dr);
  RadialRhs rhs{p, N};
  st.initialize(taylor_start(u0, p, N), Real(r_start), Real(1e-4));
  std::size_t k = 1;
  while (k <= K) {
    auto [t0, t1] = st.do_step(rhs);
    (void)t0;
    bool stop = false;
    while (k <= K && Real(k * dr) <= t1) {
      State y;
      st.calc_state(Real(k * dr), y);
      if (y[0] <= 0.0 || y[1] >= 0.0) {
        stop = true;
        break;
      }
      out.U.push_back(static_cast<double>(y[0]));
      out.dU.push_back(static_cast<double>(y[1]));
      ++k;
    }
    if (stop) break;
  }
  return out;
}

Trajectory classify(Real u0, double p, int N, double rtol, double max_dt) {
  auto st = make_stepper(rtol, max_dt);
  RadialRhs rhs{p, N};
  st.initialize(taylor_start(u0, p, N), Real(r_start), Real(1e-4));
  const Real r_end = 200.0;
  while (st.current_time() < r_end) {
    st.do_step(rhs);
    const State &y = st.current_state();
    if (y[0] < 0.0) return Trajectory::crossing;
    if (y[1] > 0.0 || y[0] > 2.0 * u0) return Trajectory::undershoot;
  }
  throw numerical_error("groundstate", "shot neither crossed nor turned before r = 200");
}

}  // namespace

Trajectory classify_shot(double u0, double p, int N, double rtol) {
  return classify(Real(u0), p, N, rtol, 0.5);
}

RadialProfile shoot_ground_state(double p, int N, double tol, const ShootOptions &opt) {
  check_exponent(p, N);
  if (!(tol > 0.0)) throw parameter_error("groundstate", "tol must be positive");
  const double rtol = std::min(1e-15, 1e-7 * tol);

  Real lo = opt.bracket_lo, hi = opt.bracket_hi;
  // shots never step further than the table mesh
  const double max_dt = opt.dr;
  if (classify(lo, p, N, rtol, max_dt) != Trajectory::undershoot ||
      classify(hi, p, N, rtol, max_dt) != Trajectory::crossing)
    throw numerical_error("groundstate", "no sign change bracketed in the shooting interval");
  for (int it = 0; it < opt.max_bisections; ++it) {
    const Real mid = 0.5L * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (classify(mid, p, N, rtol, max_dt) == Trajectory::undershoot)
      lo = mid;
    else
      hi = mid;
  }

  RadialProfile prof;
  prof.p = p;
  prof.N = N;
  std::size_t K = static_cast<std::size_t>(std::llround(opt.r_max / opt.dr));
  if (K % 2) ++K;  // Simpson needs an even number of intervals
  prof.dr = opt.r_max / K;
  prof.r_max = opt.r_max;

  // the two bracketing shots agree until the unstable mode takes over;
  // trust them while they agree to 1e-9 relative
  auto a = sample_on_mesh(lo, p, N, prof.dr, K, rtol);
  auto b = sample_on_mesh(hi, p, N, prof.dr, K, rtol);
  std::size_t good = std::min(a.U.size(), b.U.size());
  for (std::size_t k = 0; k < good; ++k) {
    if (std::abs(a.U[k] - b.U[k]) > 1e-9 * std::abs(a.U[k])) {
      good = k;
      break;
    }
  }
  const double r_sep = (good - 1) * prof.dr;
  const double blend = 1.0;
  const double r_match = r_sep - 0.5;
  if (r_match - blend < 2.0)
    throw numerical_error("groundstate", "shooting trajectory separates too early");
  prof.r_match = r_match;

  const std::size_t km = static_cast<std::size_t>(std::llround(r_match / prof.dr));
  const double c = 0.5 * (a.U[km] + b.U[km]) / far_field_shape(N, km * prof.dr);
  const double nu = 0.5 * (N - 2);

  prof.r.resize(K + 1);
  prof.U.resize(K + 1);
  prof.dU.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double r = k * prof.dr;
    prof.r[k] = r;
    double un = 0.0, dun = 0.0, ut = 0.0, dut = 0.0;
    if (k <= km) {
      un = 0.5 * (a.U[k] + b.U[k]);
      dun = 0.5 * (a.dU[k] + b.dU[k]);
    }
    if (r > r_match - blend && r > 0.0) {
      ut = c * far_field_shape(N, r);
      // d/dr [r^-nu K_nu(r)] = -r^-nu K_{nu+1}(r)
      dut = -c * std::pow(r, -nu) * std::cyl_bessel_k(nu + 1.0, r);
    }
    const double s = (r - (r_match - blend)) / blend;
    const double w = smoothstep5(s);
    const double dw = smoothstep5_d(s) / blend;
    prof.U[k] = (1.0 - w) * un + w * ut;
    prof.dU[k] = (1.0 - w) * dun + w * dut + dw * (ut - un);
  }
  prof.shoot_value = prof.U[0];

  // alpha: median of e^r r^{(N-1)/2} U over the last quarter of the mesh
  std::vector<double> q;
  for (std::size_t k = 3 * K / 4; k <= K; ++k)
    q.push_back(std::exp(prof.r[k]) * std::pow(prof.r[k], 0.5 * (N - 1)) * prof.U[k]);
  std::nth_element(q.begin(), q.begin() + q.size() / 2, q.end());
  prof.alpha = q[q.size() / 2];

  const double res = ode_residual(prof);
  if (!(res < tol))
    throw numerical_error("groundstate", "ODE residual " + std::to_string(res) + " exceeds tol");
  return prof;
}

double ode_residual(const RadialProfile &prof) {
  const auto K = prof.size() - 1;
  const double h = prof.dr;
  double worst = 0.0;
  for (std::size_t k = 2; k + 2 <= K; ++k) {
    const double upp = (-prof.dU[k + 2] + 8.0 * prof.dU[k + 1] - 8.0 * prof.dU[k - 1] +
                        prof.dU[k - 2]) / (12.0 * h);
    const double r = prof.r[k];
    const double res = upp + (prof.N - 1) / r * prof.dU[k] - prof.U[k] + signed_pow(prof.U[k], prof.p);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

namespace {

// cubic Hermite on the uniform table
inline void hermite(const RadialProfile &prof, double r, double &val, double &der) {
  const std::size_t K = prof.size() - 1;
  std::size_t k = static_cast<std::size_t>(r / prof.dr);
  if (k >= K) k = K - 1;
  const double h = prof.dr;
  const double t = (r - k * h) / h;
  const double y0 = prof.U[k], y1 = prof.U[k + 1];
  const double m0 = prof.dU[k] * h, m1 = prof.dU[k + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  val = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
  der = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h;
}

}  // namespace

double eval_U0(const RadialProfile &prof, double r) {
  if (r > prof.r_max) return prof.alpha * std::exp(-r) * std::pow(r, -0.5 * (prof.N - 1));
  double v, d;
  hermite(prof, r, v, d);
  return v;
}

double eval_dU0(const RadialProfile &prof, double r) {
  if (r > prof.r_max) {
    const double e = 0.5 * (prof.N - 1);
    return -prof.alpha * std::exp(-r) * std::pow(r, -e) * (1.0 + e / r);
  }
  double v, d;
  hermite(prof, r, v, d);
  return d;
}

double f_weight(const RadialProfile &prof, double r) {
  const double u0 = prof.shoot_value;
  const double upp0 = (u0 - signed_pow(u0, prof.p)) / prof.N;
  double ratio;  // U0'(r)/r
  if (r < prof.dr) {
    // interpolate U'/r between its limit U''(0) and the first mesh node
    ratio = upp0 + (prof.dU[1] / prof.dr - upp0) * (r / prof.dr);
  } else {
    ratio = eval_dU0(prof, r) / r;
  }
  return -std::pow(std::abs(eval_U0(prof, r)), prof.p - 1.0) * ratio;
}

double upper_incomplete_gamma(double s, double x) {
  if (s > 0.0) return boost::math::tgamma(s, x);
  // walk up to a positive (or zero) order, then recur downwards:
  // Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s
  int steps = static_cast<int>(std::ceil(-s));
  double top = s + steps;
  double g = (top == 0.0) ? boost::math::expint(1, x) : boost::math::tgamma(top, x);
  for (int i = 0; i < steps; ++i) {
    const double a = top - 1.0 - i;
    g = (g - std::pow(x, a) * std::exp(-x)) / a;
  }
  return g;
}

double ball_integral(const RadialProfile &prof, double q, bool with_tail) {
  const std::size_t K = prof.size() - 1;
  const int N = prof.N;
  auto f = [&](std::size_t k) {
    return std::pow(std::abs(prof.U[k]), q) * std::pow(prof.r[k], N - 1);
  };
  double s = f(0) + f(K);
  for (std::size_t k = 1; k < K; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k);
  s *= prof.dr / 3.0;  // K is even by construction
  if (with_tail && prof.alpha > 0.0) {
    const double e = (N - 1) * (1.0 - 0.5 * q);
    s += std::pow(prof.alpha, q) * std::pow(q, -(e + 1.0)) *
         upper_incomplete_gamma(e + 1.0, q * prof.r_max);
  }
  const double omega = 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
  return omega * s;
}

RadialIntegrals radial_integrals(const RadialProfile &prof) {
  return {ball_integral(prof, 2.0), ball_integral(prof, prof.p + 1.0)};
}

double minimal_M(const RadialProfile &prof) {
  const double e = 0.5 * (prof.N - 1);
  double M = prof.alpha;  // the far field needs at least alpha
  const std::size_t K = prof.size() - 1;
  for (std::size_t k = 0; k < K; ++k) {
    for (int j = 0; j < 4; ++j) {
      const double r = prof.r[k] + 0.25 * j * prof.dr;
      const double b = std::exp(-r) * std::min(std::pow(r, -e), 1.0);
      M = std::max(M, eval_U0(prof, r) / b);
    }
  }
  return M;
}

double decay_law_drift(const RadialProfile &prof, double r0, double r1) {
  const double e = 0.5 * (prof.N - 1);
  double lo = std::numeric_limits<double>::max(), hi = 0.0;
  for (std::size_t k = 0; k < prof.size(); ++k) {
    const double r = prof.r[k];
    if (r < r0 || r > r1) continue;
    const double v = std::exp(r) * std::pow(r, e) * prof.U[k];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return (hi - lo) / prof.alpha;
}

void write_profile(const RadialProfile &prof, const std::string &table_path,
                   const std::string &json_path) {
  std::ofstream t(table_path);
  if (!t) throw parameter_error("groundstate", "cannot write " + table_path);
  t << "# r U0 dU0\n";
  t.precision(17);
  for (std::size_t k = 0; k < prof.size(); ++k)
    t << prof.r[k] << ' ' << prof.U[k] << ' ' << prof.dU[k] << '\n';
  nlohmann::ordered_json j;
  j["p"] = prof.p;
  j["N"] = prof.N;
  j["alpha"] = prof.alpha;
  j["u0"] = prof.shoot_value;
  j["r_max"] = prof.r_max;
  std::ofstream js(json_path);
  if (!js) throw parameter_error("groundstate", "cannot write " + json_path);
  js << j.dump(2) << '\n';
}

}  // namespace tetra
