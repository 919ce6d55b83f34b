#include "tetra/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "tetra/errors.hpp"
#include "tetra/field.hpp"

namespace tetra {

namespace {

using nlohmann::json;

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

template <class F>
CheckResult timed(int id, const std::string &title, F &&body) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  r.id = id;
  r.title = title;
  try {
    body(r);
  } catch (const Error &e) {
    r.pass = false;
    r.summary = "error in " + e.stage() + ": " + e.what();
    r.data["error"] = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}


}  // namespace

CheckSuite::CheckSuite(RunConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

const RadialProfile &CheckSuite::profile() {
  if (!profile_) profile_ = std::make_unique<RadialProfile>(shoot_ground_state(cfg_.p, cfg_.N, cfg_.shoot_tol));
  return *profile_;
}

CheckSuite::MidRun &CheckSuite::mid_run(double eps, bool with_coercivity) {
  MidRun &m = mid_[eps];
  if (m.h == 0.0) {
    const auto [lo, hi] = S_eps(eps, cfg_.beta0);
    m.h = 0.5 * (lo + hi);
    const Ansatz a(profile(), potential_spec(cfg_, eps), AnsatzConfig{m.h, cfg_.beta0}, reduction_grid(cfg_, hi));
    ReductionOptions opt;
    opt.tol = cfg_.fixed_point_tol;
    opt.linear_tol = cfg_.linear_tol;
    opt.allow_outside_ball = true;  // the largest eps is expected to leave the ball
    m.report = fixed_point(a, opt);
    if (with_coercivity) m.coercivity = estimate_coercivity(a);
  } else if (with_coercivity && !m.coercivity) {
    const auto [lo, hi] = S_eps(eps, cfg_.beta0);
    const Ansatz a(profile(), potential_spec(cfg_, eps), AnsatzConfig{m.h, cfg_.beta0}, reduction_grid(cfg_, hi));
    m.coercivity = estimate_coercivity(a);
  }
  return m;
}

CheckResult CheckSuite::group(const GroupTable &reference) {
  return timed(1, "group integrity", [&](CheckResult &r) {
    const TetraGroup G;  // not the verified singleton: the comparison is the check
    const int mismatches = G.table_mismatches(reference);
    int bad_det = 0;
    for (int i = 1; i <= 12; ++i) bad_det += determinant(G.matrix(i)) != 1;
    auto left = [&](int g, std::initializer_list<int> s) {
      std::set<int> out;
      for (int x : s) out.insert(G.multiply(g, x));
      return out;
    };
    auto closed = [&](std::initializer_list<int> s) {
      const std::set<int> set(s);
      for (int a : s)
        for (int b : s)
          if (!set.count(G.multiply(a, b))) return false;
      return true;
    };
    const std::set<int> base{1, 5, 9};
    const bool cosets = closed({1, 2, 3, 4}) && closed({1, 5, 9}) && G.multiply(5, 5) == 9 &&
                        G.multiply(9, 5) == 1 && left(G.inverse(2), {2, 6, 10}) == base &&
                        left(G.inverse(3), {3, 7, 11}) == base && left(G.inverse(4), {4, 8, 12}) == base;
    r.pass = mismatches == 0 && bad_det == 0 && cosets;
    r.summary = std::to_string(144 - mismatches) + "/144 table entries, " + std::to_string(12 - bad_det) +
                "/12 det = +1, coset identities " + (cosets ? "hold" : "FAIL");
    r.data = {{"matching_entries", 144 - mismatches}, {"unit_determinants", 12 - bad_det}, {"cosets", cosets}};
  });
}

CheckResult CheckSuite::cones() {
  return timed(2, "cone decomposition", [&](CheckResult &r) {
    std::mt19937_64 rng(cfg_.seed);
    std::uniform_real_distribution<double> d(-10.0, 10.0);
    long uncovered = 0, disagree = 0, ties = 0;
    for (int s = 0; s < cfg_.cone_points; ++s) {
      const Vec3 y{d(rng), d(rng), d(rng)};
      if (cone_multiplicity(y) < 1) {
        ++uncovered;
        continue;
      }
      bool tie = false;
      const int w = max_weight_index(y, tie);
      if (tie) {
        ++ties;
        continue;
      }
      disagree += w != cone_of(y) || cone_multiplicity(y) != 1;
    }
    const TetraGroup &G = TetraGroup::standard();
    long transport_fail = 0;
    for (int k = 1; k <= 4; ++k) {
      int hits = 0;
      while (hits < 10000) {
        const Vec3 y{d(rng), d(rng), d(rng)};
        if (!in_cone(k, y)) continue;
        ++hits;
        transport_fail += !in_cone(1, act(G.matrix(k), y));
      }
    }
    r.pass = uncovered == 0 && disagree == 0 && transport_fail == 0;
    r.summary = std::to_string(cfg_.cone_points) + " points: " + std::to_string(uncovered) + " uncovered, " +
                std::to_string(disagree) + " disagreements (" + std::to_string(ties) + " ties skipped); " +
                std::to_string(transport_fail) + " transport failures in 4x10^4";
    r.data = {{"points", cfg_.cone_points}, {"uncovered", uncovered}, {"disagreements", disagree},
              {"ties", ties}, {"transport_failures", transport_fail}};
  });
}

CheckResult CheckSuite::ground_state() {
  return timed(3, "ground state", [&](CheckResult &r) {
    const RadialProfile &prof = profile();
    const double res = ode_residual(prof);
    // last decade of the table, [r_max / 10, r_max]; it spans the shot, the blend and the far field
    const double drift = decay_law_drift(prof, 0.1 * prof.r_max, prof.r_max);
    ShootOptions half;
    half.dr = 0.5 * prof.dr;
    half.r_max = prof.r_max;
    const RadialProfile fine = shoot_ground_state(cfg_.p, cfg_.N, cfg_.shoot_tol, half);
    const double change = std::abs(fine.shoot_value - prof.shoot_value);
    r.pass = res < 1e-8 && drift < 0.01 && change < 1e-7;
    r.summary = "ODE residual " + fmt(res) + ", decay drift " + fmt(100 * drift) + "%, mesh-halving change " +
                fmt(change) + " (U0(0) = " + fmt(prof.shoot_value, 12) + ")";
    r.data = {{"ode_residual", res},        {"decay_drift", drift}, {"mesh_halving_change", change},
              {"U0_0", prof.shoot_value},   {"alpha", prof.alpha},  {"m2", radial_integrals(prof).m2},
              {"mp1", radial_integrals(prof).mp1}};
  });
}

CheckResult CheckSuite::kernel() {
  return timed(4, "kernel structure", [&](CheckResult &r) {
    const KernelReport k = kernel_check(profile(), grid_for(8.0, cfg_.kernel_delta));
    json rows = json::array();
    double lo = INFINITY, hi = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const MidRun &m = mid_run(eps, true);
      lo = std::min(lo, m.coercivity->rho_hat);
      hi = std::max(hi, m.coercivity->rho_hat);
      rows.push_back({{"eps", eps}, {"h", m.h}, {"rho_hat", m.coercivity->rho_hat}, {"C_hat", m.coercivity->C_hat}});
    }
    const double variation = (hi - lo) / lo;
    r.pass = k.converged && k.near_zero == 3 && k.negative >= 1 && lo > 0.0 && variation < 0.2;
    std::string ev;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, k.eigenvalues.size()); ++i)
      ev += (i ? " " : "") + fmt(k.eigenvalues[i]);
    r.summary = std::to_string(k.near_zero) + " eigenvalues below 5 delta^2 = " + fmt(k.threshold) + ", " +
                std::to_string(k.negative) + " negative [" + ev + "]; rho_hat in [" + fmt(lo) + ", " + fmt(hi) +
                "], variation " + fmt(100 * variation, 3) + "%";
    r.data = {{"eigenvalues", k.eigenvalues}, {"threshold", k.threshold}, {"near_zero", k.near_zero},
              {"negative", k.negative},       {"converged", k.converged}, {"coercivity", rows},
              {"variation", variation}};
  });
}

CheckResult CheckSuite::fixed_point_scaling() {
  return timed(5, "fixed point", [&](CheckResult &r) {
    const RadialProfile &prof = profile();
    bool all_converged = true;
    double worst_tail = 0.0;
    json runs = json::array();
    auto record = [&](double eps, double h, const CorrectionReport &rep) {
      const double tail = rep.contraction_estimates.empty() ? 0.0 : rep.contraction_estimates.back();
      worst_tail = std::max(worst_tail, tail);
      runs.push_back({{"eps", eps}, {"h", h}, {"iterations", rep.iterations}, {"norm_phi", rep.norm_phi},
                      {"ball_radius", rep.ball_radius}, {"inside_ball", rep.inside_ball}, {"tail_contraction", tail}});
    };
    for (double eps : {1e-3, 1e-4}) {
      const auto [lo, hi] = S_eps(eps, cfg_.beta0);
      const Grid grid = reduction_grid(cfg_, hi);
      for (double h : {lo, hi}) {
        const Ansatz a(prof, potential_spec(cfg_, eps), AnsatzConfig{h, cfg_.beta0}, grid);
        ReductionOptions opt;
        opt.tol = cfg_.fixed_point_tol;
        opt.linear_tol = cfg_.linear_tol;
        opt.allow_outside_ball = true;
        try {
          record(eps, h, fixed_point(a, opt));
        } catch (const Error &e) {
          all_converged = false;
          runs.push_back({{"eps", eps}, {"h", h}, {"error", e.what()}});
        }
      }
      record(eps, mid_run(eps, false).h, mid_run(eps, false).report);
    }
    // log-log fit over the mid-window runs
    std::vector<double> x, y;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      x.push_back(std::log(eps));
      y.push_back(std::log(mid_run(eps, false).report.norm_phi));
    }
    const double xm = (x[0] + x[1] + x[2]) / 3.0, ym = (y[0] + y[1] + y[2]) / 3.0;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 3; ++i) {
      sxy += (x[i] - xm) * (y[i] - ym);
      sxx += (x[i] - xm) * (x[i] - xm);
    }
    const double slope = sxy / sxx;
    const double gamma = AnsatzConfig{1.0, cfg_.beta0}.gamma();
    r.pass = all_converged && worst_tail < 0.9 && slope >= gamma - 0.05;
    r.summary = std::string(all_converged ? "all 6 runs converged" : "NOT all runs converged") +
                ", worst tail contraction " + fmt(worst_tail, 3) + ", slope " + fmt(slope, 4) + " vs gamma - 0.05 = " +
                fmt(gamma - 0.05, 4);
    r.data = {{"runs", runs}, {"slope", slope}, {"gamma", gamma}, {"worst_tail_contraction", worst_tail},
              {"mid_norms", {mid_run(1e-2, false).report.norm_phi, mid_run(1e-3, false).report.norm_phi,
                             mid_run(1e-4, false).report.norm_phi}}};
  });
}

CheckResult CheckSuite::expansion() {
  return timed(6, "energy expansion", [&](CheckResult &r) {
    const RadialProfile &prof = profile();
    const PotentialSpec spec = potential_spec(cfg_, 1e-4);
    std::vector<double> ratio;
    double jmin = INFINITY, jmax = 0.0;
    json rows = json::array();
    for (int k = 0; k <= 8; ++k) {
      const double h = 2.5 + 0.25 * k;
      const ExpansionTerms t = expansion_terms(prof, spec, h, cfg_.quad_delta);
      const double I = ansatz_energy(prof, spec, h, cfg_.quad_delta);
      const double resid = std::abs(I - t.A0 - t.potential_term + t.interaction_term);
      ratio.push_back(resid / std::min(t.potential_term, t.interaction_term));
      jmin = std::min(jmin, t.J_star);
      jmax = std::max(jmax, t.J_star);
      rows.push_back({{"h", h}, {"I_minus_A0", I - t.A0}, {"potential_term", t.potential_term},
                      {"interaction_term", t.interaction_term}, {"J_star", t.J_star}, {"ratio", ratio.back()}});
    }
    int decreasing = 0;
    for (std::size_t k = 1; k < ratio.size(); ++k) decreasing += ratio[k] < ratio[k - 1];
    const double worst = *std::max_element(ratio.begin(), ratio.end());
    const double frac = decreasing / double(ratio.size() - 1);
    const bool small = worst < 0.1, mono = frac >= 0.8, bounded = jmin > 0.0 && jmax / jmin < 3.0;
    r.pass = small && mono && bounded;
    std::string rs;
    for (double v : ratio) rs += (rs.empty() ? "" : " ") + fmt(v, 2);
    r.summary = "remainder / min(term) = [" + rs + "] (limit 0.1), decreasing on " + std::to_string(decreasing) + "/" +
                std::to_string(ratio.size() - 1) + " pairs; J_* in [" + fmt(jmin, 7) + ", " + fmt(jmax, 7) + "]";
    r.data = {{"samples", rows}, {"max_ratio", worst}, {"decreasing_fraction", frac}, {"J_min", jmin},
              {"J_max", jmax}, {"J_limit", J_star_limit(prof)}};
  });
}

const ReducedEnergyCurve &CheckSuite::scan() {
  if (!scan_) {
    ScanOptions opt;
    opt.samples = cfg_.samples;
    opt.delta = cfg_.delta;
    opt.quad_delta = cfg_.quad_delta;
    opt.reduction.tol = cfg_.fixed_point_tol;
    opt.reduction.linear_tol = cfg_.linear_tol;
    scan_ = std::make_unique<ReducedEnergyCurve>(scan_and_maximize(profile(), potential_spec(cfg_), cfg_.beta0, opt));
  }
  return *scan_;
}

CheckResult CheckSuite::maximizer() {
  return timed(7, "interior maximizer", [&](CheckResult &r) {
    const ReducedEnergyCurve &c = scan();
    r.pass = c.interior && c.lower_below_A0 && c.upper_above_A0 && c.lambda_sign_change;
    r.summary = std::string("interior ") + (c.interior ? "yes" : "no") + ", h_star " + fmt(c.h_star, 6) + " in [" +
                fmt(c.lo, 5) + ", " + fmt(c.hi, 5) + "], F(lo) - A0 = " + fmt(c.F.front() - c.A0) +
                ", F(hi) - A0 = " + fmt(c.F.back() - c.A0) + ", Lambda sign change " +
                (c.lambda_sign_change ? "yes" : "no") + ", surrogate maximizer " + fmt(c.surrogate_h, 5);
    r.data = {{"h_star", c.h_star},
              {"interior", c.interior},
              {"lower_below_A0", c.lower_below_A0},
              {"upper_above_A0", c.upper_above_A0},
              {"lambda_sign_change", c.lambda_sign_change},
              {"surrogate_h", c.surrogate_h},
              {"local_maxima", c.local_maxima}};
  });
}

const FullSolution &CheckSuite::solution() {
  if (!solution_) {
    const ReducedEnergyCurve &c = scan();
    if (!c.interior) throw numerical_error("energy", "no interior maximizer to start the full solve from");
    const PotentialSpec spec = potential_spec(cfg_);
    const AnsatzConfig ac{c.h_star, cfg_.beta0};
    const Grid grid = reduction_grid(cfg_, c.hi);
    Field phi;
    ReductionOptions opt;
    opt.tol = cfg_.fixed_point_tol;
    opt.linear_tol = cfg_.linear_tol;
    reduced_energy(profile(), spec, ac, grid, opt, cfg_.quad_delta, &phi);
    const Ansatz a(profile(), spec, ac, grid);
    NewtonOptions n;
    n.tol = cfg_.newton_tol;
    solution_ = std::make_unique<FullSolution>(full_solve(a, phi, n));
  }
  return *solution_;
}

CheckResult CheckSuite::full_solution() {
  return timed(8, "full solution", [&](CheckResult &r) {
    const FullSolution &s = solution();
    const double h_star = scan().h_star;
    const double sym_tol = 1e-10 * s.u.max_abs();
    r.pass = s.steps <= 8 && s.residual < cfg_.newton_tol && s.positive && s.symmetry_residual < sym_tol &&
             s.maxima.size() == 4 && s.max_offset_cells <= 0.5 && std::abs(s.h_prime - h_star) < 0.2;
    r.summary = std::to_string(s.steps) + " Newton steps, residual " + fmt(s.residual) + ", positive " +
                (s.positive ? "yes" : "no") + ", symmetry residual " + fmt(s.symmetry_residual) + ", " +
                std::to_string(s.maxima.size()) + " maxima, offset " + fmt(s.max_offset_cells, 3) + " cells, h' " +
                fmt(s.h_prime, 5) + " vs h_star " + fmt(h_star, 5);
    json maxima = json::array();
    for (const auto &m : s.maxima) maxima.push_back({m[0], m[1], m[2]});
    r.data = {{"steps", s.steps},       {"residuals", s.residuals}, {"positive", s.positive},
              {"symmetry_residual", s.symmetry_residual}, {"maxima", maxima}, {"h_prime", s.h_prime},
              {"max_offset_cells", s.max_offset_cells}, {"h_star", h_star}};
  });
}

CheckResult CheckSuite::overlap_bounds() {
  return timed(9, "overlap bounds", [&](CheckResult &r) {
    const RadialProfile &prof = profile();
    const double M = minimal_M(prof);
    double worst = 0.0;
    json rows = json::array();
    for (double h : {2.0, 3.0, 4.0}) {
      const Grid g = grid_for(std::sqrt(3.0) * h + 8.0, cfg_.delta);
      for (double eta : {0.5, 1.0, 2.0}) {
        const KsumRatios k = ksum_ratios(prof, h, eta, M, g);
        worst = std::max({worst, k.tail_sum, k.full_sum});
        rows.push_back({{"h", h}, {"eta", eta}, {"tail_ratio", k.tail_sum}, {"full_ratio", k.full_sum}});
      }
    }
    r.pass = worst <= 1.0;
    r.summary = "largest bound ratio " + fmt(worst, 5) + " over h in {2,3,4}, eta in {0.5,1,2}, M = " + fmt(M, 6);
    r.data = {{"M", M}, {"worst_ratio", worst}, {"cases", rows}};
  });
}

CheckResult CheckSuite::run(int id) {
  switch (id) {
    case 1: return group();
    case 2: return cones();
    case 3: return ground_state();
    case 4: return kernel();
    case 5: return fixed_point_scaling();
    case 6: return expansion();
    case 7: return maximizer();
    case 8: return full_solution();
    case 9: return overlap_bounds();
  }
  throw parameter_error("verify", "unknown check " + std::to_string(id));
}

nlohmann::json to_json(const RunConfig &c) {
  return {{"p", c.p},
          {"N", c.N},
          {"eps", c.eps},
          {"beta0", c.beta0},
          {"a", c.a},
          {"m", c.m},
          {"theta", c.theta},
          {"profile", c.profile},
          {"R_box", c.R_box},
          {"n", c.n},
          {"delta", c.delta},
          {"kernel_delta", c.kernel_delta},
          {"quad_delta", c.quad_delta},
          {"shoot_tol", c.shoot_tol},
          {"linear_tol", c.linear_tol},
          {"fixed_point_tol", c.fixed_point_tol},
          {"newton_tol", c.newton_tol},
          {"samples", c.samples},
          {"seed", c.seed},
          {"cone_points", c.cone_points},
          {"out_dir", c.out_dir},
          {"run_checks", c.run_checks}};
}

nlohmann::json to_json(const CheckResult &r) {
  return {{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary}, {"data", r.data}};
}

}  // namespace tetra
