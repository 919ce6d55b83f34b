#include "tetra/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tetra/checks.hpp"
#include "tetra/energy.hpp"
#include "tetra/errors.hpp"
#include "tetra/field.hpp"
#include "tetra/groundstate.hpp"
#include "tetra/reduction.hpp"
#include "tetra/symmetry.hpp"

namespace tetra {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

// shortest text that reads back to the same double
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

fs::path out_path(const RunConfig &c, const std::string &name) {
  fs::path p(name);
  if (p.is_absolute() || p.has_parent_path()) return p;
  fs::create_directories(c.out_dir);
  return fs::path(c.out_dir) / p;
}

void write_text(const fs::path &p, const std::string &text) {
  std::ofstream f(p);
  if (!f) throw parameter_error("cli", "cannot write " + p.string());
  f << text;
}

ordered_json correction_json(const CorrectionReport &r) {
  return {{"h", r.h},
          {"eps", r.eps},
          {"norm_phi", r.norm_phi},
          {"ball_radius", r.ball_radius},
          {"inside_ball", r.inside_ball},
          {"iterations", r.iterations},
          {"increments", r.increments},
          {"contraction_estimates", r.contraction_estimates},
          {"linear_iterations", r.linear_iterations},
          {"max_symmetry_residual", r.max_symmetry_residual},
          {"max_dW_component", r.max_dW_component},
          {"lambda", r.lambda}};
}

std::string curve_csv(const ReducedEnergyCurve &c) {
  std::ostringstream s;
  s << "h,F,A0,potential_term,interaction_term,J_star,lambda,I_W,norm_phi\n";
  for (std::size_t k = 0; k < c.h.size(); ++k)
    s << num(c.h[k]) << ',' << num(c.F[k]) << ',' << num(c.terms[k].A0) << ',' << num(c.terms[k].potential_term)
      << ',' << num(c.terms[k].interaction_term) << ',' << num(c.terms[k].J_star) << ',' << num(c.lambda[k]) << ','
      << num(c.I_W[k]) << ',' << num(c.norm_phi[k]) << '\n';
  return s.str();
}

ordered_json curve_json(const ReducedEnergyCurve &c) {
  return {{"eps", c.eps},
          {"beta0", c.beta0},
          {"S_eps", {c.lo, c.hi}},
          {"A0", c.A0},
          {"h_star", c.h_star},
          {"F_star", c.F_star},
          {"interior", c.interior},
          {"lower_below_A0", c.lower_below_A0},
          {"upper_above_A0", c.upper_above_A0},
          {"lambda_sign_change", c.lambda_sign_change},
          {"sample_local_maxima", c.local_maxima},
          {"surrogate_h", c.surrogate_h},
          {"evaluations", c.evaluations}};
}

ordered_json solution_json(const FullSolution &s) {
  ordered_json maxima = ordered_json::array();
  for (const auto &m : s.maxima) maxima.push_back({m[0], m[1], m[2]});
  return {{"newton_steps", s.steps},
          {"residuals", s.residuals},
          {"residual", s.residual},
          {"positive", s.positive},
          {"symmetry_residual", s.symmetry_residual},
          {"maxima", maxima},
          {"h_prime", s.h_prime},
          {"max_offset_cells", s.max_offset_cells}};
}

ordered_json checks_json(const std::vector<CheckResult> &rs) {
  ordered_json a = ordered_json::array();
  for (const auto &r : rs)
    a.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary},
                 {"data", ordered_json::parse(r.data.dump())}});
  return a;
}

ordered_json with_config(const RunConfig &c, ordered_json body) {
  ordered_json j;
  j["config"] = ordered_json::parse(to_json(c).dump());
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  return j;
}

}  // namespace

std::string to_config_text(const RunConfig &c) {
  std::ostringstream s;
  s << "# resolved configuration\n"
    << "p = " << num(c.p) << "\nN = " << c.N << "\neps = " << num(c.eps) << "\nbeta0 = " << num(c.beta0)
    << "\na = " << num(c.a) << "\nm = " << num(c.m) << "\ntheta = " << num(c.theta) << "\nprofile = \"" << c.profile
    << "\"\nR_box = " << num(c.R_box) << "\nn = " << c.n << "\ndelta = " << num(c.delta)
    << "\nkernel_delta = " << num(c.kernel_delta) << "\nquad_delta = " << num(c.quad_delta)
    << "\nshoot_tol = " << num(c.shoot_tol) << "\nlinear_tol = " << num(c.linear_tol)
    << "\nfixed_point_tol = " << num(c.fixed_point_tol) << "\nnewton_tol = " << num(c.newton_tol)
    << "\nsamples = " << c.samples << "\nseed = " << c.seed << "\ncone_points = " << c.cone_points
    << "\nout_dir = \"" << c.out_dir << "\"\nrun_checks = \"" << c.run_checks << "\"\n";
  return s.str();
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  RunConfig cfg;
  CLI::App app{"Tetrahedral four-bump solutions of a perturbed nonlinear Schroedinger equation"};
  app.set_help_flag("--help", "print help");
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--p", cfg.p, "nonlinearity exponent");
  app.add_option("--N", cfg.N, "space dimension");
  app.add_option("--eps", cfg.eps, "perturbation size");
  app.add_option("--beta0", cfg.beta0, "half-width parameter of the window S_eps");
  app.add_option("--a", cfg.a, "potential amplitude");
  app.add_option("--m", cfg.m, "potential decay exponent");
  app.add_option("--theta", cfg.theta, "potential remainder exponent");
  app.add_option("--profile", cfg.profile, "potential profile: algebraic | gaussian_cutoff");
  app.add_option("--R_box", cfg.R_box, "box half-width (0 = automatic)");
  app.add_option("--n", cfg.n, "points per axis (0 = from delta)");
  app.add_option("--delta", cfg.delta, "target grid spacing");
  app.add_option("--kernel_delta", cfg.kernel_delta, "grid spacing of the kernel check");
  app.add_option("--quad_delta", cfg.quad_delta, "lattice spacing of the ansatz-energy quadrature");
  app.add_option("--shoot_tol", cfg.shoot_tol, "ground-state bisection tolerance");
  app.add_option("--linear_tol", cfg.linear_tol, "relative tolerance of the projected linear solves");
  app.add_option("--fixed_point_tol", cfg.fixed_point_tol, "H1 size of the last fixed-point increment");
  app.add_option("--newton_tol", cfg.newton_tol, "L2 strong residual of the full solve");
  app.add_option("--samples", cfg.samples, "h samples of the energy scan");
  app.add_option("--seed", cfg.seed, "seed of all random sampling");
  app.add_option("--cone_points", cfg.cone_points, "random points of the cone check");
  app.add_option("--out_dir", cfg.out_dir, "directory for relative output paths");
  app.add_option("--run_checks", cfg.run_checks, "criteria that decide the exit status of `run`");

  auto *gs = app.add_subcommand("groundstate", "shoot the radial ground state and write its table");

  auto *sym = app.add_subcommand("symmetry", "group and cone checks");
  sym->require_subcommand(1);
  auto *sym_check = sym->add_subcommand("check", "multiplication table, determinants, cosets, cone sampling");
  std::vector<int> corrupt;
  sym_check->add_option("--corrupt", corrupt, "fault injection: row col value of the reference table")
      ->expected(3);

  auto *field = app.add_subcommand("field", "field dumps");
  field->require_subcommand(1);
  auto *fdump = field->add_subcommand("dump", "sample an ansatz field and dump it");
  double dump_h = 3.0;
  std::string dump_what = "W", dump_out = "field.bin";
  fdump->add_option("--h", dump_h, "bump distance");
  fdump->add_option("--what", dump_what, "W | dW | phistar")->check(CLI::IsMember({"W", "dW", "phistar"}));
  fdump->add_option("--out", dump_out, "output file");
  auto *fload = field->add_subcommand("load", "load a dump and summarise it");
  std::string load_in;
  fload->add_option("--in", load_in, "dump file")->required();

  auto *red = app.add_subcommand("reduce", "solve for the correction phi at one (eps, h)");
  double red_h = 0.0;
  std::string red_out = "report.json", red_dump;
  bool red_coer = false, red_full = false;
  int red_block = 16;
  red->add_option("--h", red_h, "bump distance (default: middle of S_eps)");
  red->add_option("--tol", cfg.fixed_point_tol, "fixed-point tolerance");
  red->add_option("--out", red_out, "report file");
  red->add_option("--dump", red_dump, "also dump phi to this file");
  red->add_flag("--coercivity", red_coer, "estimate rho_hat and C_hat on H_s and E_h");
  red->add_flag("--full-space", red_full, "also estimate the smallest singular value without symmetrisation");
  red->add_option("--block", red_block, "eigen-block size of the full-space estimate");

  auto *en = app.add_subcommand("energy", "reduced energy");
  en->require_subcommand(1);
  auto *scan = en->add_subcommand("scan", "sample the reduced energy over S_eps and locate its maximum");
  std::string scan_out = "curve.csv";
  scan->add_option("--out", scan_out, "curve file (CSV); a JSON summary is written next to it");
  auto *solve = en->add_subcommand("solve", "Newton solve of the full equation from the reduced solution");
  double solve_h = 0.0;
  std::string solve_out = "solution.bin";
  solve->add_option("--h-star", solve_h, "start distance (default: run the scan)");
  solve->add_option("--out", solve_out, "solution dump; a JSON report is written next to it");

  auto *ver = app.add_subcommand("verify", "invariant suite with one pass/fail entry per item");
  std::string ver_checks = "1,2,3,4,5,9", ver_out = "verify.json";
  ver->add_option("--checks", ver_checks, "comma-separated check ids");
  ver->add_option("--out", ver_out, "report file");

  auto *run = app.add_subcommand("run", "groundstate, symmetry check, energy scan and full solve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp &e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError &e) {
    err << ordered_json{{"error", {{"stage", "cli"}, {"kind", "parameter"}, {"message", e.what()}}}}.dump() << '\n';
    return static_cast<int>(ErrorKind::parameter);
  }

  try {
    validate(cfg);
    const PotentialSpec spec = potential_spec(cfg);
    const auto [lo, hi] = S_eps(cfg.eps, cfg.beta0);

    if (gs->parsed()) {
      CheckSuite suite(cfg);
      const RadialProfile &prof = suite.profile();
      write_profile(prof, out_path(cfg, "profile.tsv").string(), out_path(cfg, "profile.json").string());
      const RadialIntegrals ri = radial_integrals(prof);
      out << with_config(cfg, {{"u0", prof.shoot_value},
                               {"alpha", prof.alpha},
                               {"m2", ri.m2},
                               {"mp1", ri.mp1},
                               {"A0", 2.0 * (prof.p - 1.0) / (prof.p + 1.0) * ri.mp1},
                               {"ode_residual", ode_residual(prof)},
                               {"minimal_M", minimal_M(prof)},
                               {"J_star_limit", J_star_limit(prof)}})
                 .dump(2)
          << '\n';
      return 0;
    }

    if (sym_check->parsed()) {
      GroupTable ref = reference_table();
      if (!corrupt.empty()) {
        if (corrupt[0] < 1 || corrupt[0] > 12 || corrupt[1] < 1 || corrupt[1] > 12)
          throw parameter_error("cli", "--corrupt row and column must be in 1..12");
        ref[corrupt[0] - 1][corrupt[1] - 1] = corrupt[2];
      }
      CheckSuite suite(cfg);
      const std::vector<CheckResult> rs{suite.group(ref), suite.cones()};
      out << with_config(cfg, {{"checks", checks_json(rs)}}).dump(2) << '\n';
      for (const auto &r : rs)
        if (!r.pass) {
          err << ordered_json{{"error", {{"stage", "symmetry"}, {"kind", "integrity"}, {"message", r.summary}}}}.dump()
              << '\n';
          return static_cast<int>(ErrorKind::integrity);
        }
      return 0;
    }

    if (fdump->parsed()) {
      const RadialProfile prof = shoot_ground_state(cfg.p, cfg.N, cfg.shoot_tol);
      const Grid g = reduction_grid(cfg, dump_h);
      const AnsatzConfig ac{dump_h, cfg.beta0};
      check_bumps_inside(dump_h, g);
      const Field f = dump_what == "W" ? assemble_W(prof, ac, g) : dump_what == "dW" ? dW_dh(prof, ac, g)
                                                                                      : phi_star(prof, ac, g);
      const fs::path p = out_path(cfg, dump_out);
      dump_field(f, p.string(), dump_what + " h=" + num(dump_h));
      out << ordered_json{{"file", p.string()}, {"n", g.n}, {"R", g.R}, {"max_abs", f.max_abs()}}.dump(2) << '\n';
      return 0;
    }

    if (fload->parsed()) {
      std::string desc;
      const Field f = load_field(load_in, &desc);
      out << ordered_json{{"file", load_in},
                          {"description", desc},
                          {"n", f.grid().n},
                          {"R", f.grid().R},
                          {"delta", f.grid().delta()},
                          {"max_abs", f.max_abs()},
                          {"norm_L2", norm_L2(f)},
                          {"norm_H1", norm_H1(f)},
                          {"symmetry_residual", symmetry_residual(f)}}
                 .dump(2)
          << '\n';
      return 0;
    }

    if (red->parsed()) {
      const RadialProfile prof = shoot_ground_state(cfg.p, cfg.N, cfg.shoot_tol);
      const double h = red_h > 0.0 ? red_h : 0.5 * (lo + hi);
      const Ansatz a(prof, spec, AnsatzConfig{h, cfg.beta0}, reduction_grid(cfg, std::max(h, hi)));
      ReductionOptions opt;
      opt.tol = cfg.fixed_point_tol;
      opt.linear_tol = cfg.linear_tol;
      const CorrectionReport rep = fixed_point(a, opt);
      ordered_json body = correction_json(rep);
      body["grid"] = {{"n", a.grid.n}, {"R", a.grid.R}, {"delta", a.grid.delta()}};
      if (red_coer || red_full) {
        const Coercivity c = estimate_coercivity(a);
        body["rho_hat"] = c.rho_hat;
        body["C_hat"] = c.C_hat;
        body["eigenvalues"] = c.eigenvalues;
      }
      if (red_full) {
        const Coercivity c = estimate_coercivity(a, false, red_block, 1e-3);
        body["full_space_rho_hat"] = c.rho_hat;
        body["full_space_eigenvalues"] = c.eigenvalues;
      }
      if (!red_dump.empty()) dump_field(rep.phi, out_path(cfg, red_dump).string(), "phi h=" + num(h));
      const std::string text = with_config(cfg, body).dump(2) + "\n";
      write_text(out_path(cfg, red_out), text);
      out << text;
      return 0;
    }

    if (scan->parsed() || solve->parsed() || run->parsed()) {
      CheckSuite suite(cfg);
      std::vector<CheckResult> checks;
      std::vector<int> ids;
      if (run->parsed()) {
        ids = parse_check_ids(cfg.run_checks);
        for (int id : {1, 2, 3}) checks.push_back(suite.run(id));
      }
      ordered_json body;
      const bool need_scan = scan->parsed() || run->parsed() || solve_h <= 0.0;
      if (need_scan) {
        const ReducedEnergyCurve &c = suite.scan();
        write_text(out_path(cfg, scan->parsed() ? scan_out : "curve.csv"), curve_csv(c));
        body["scan"] = curve_json(c);
        if (!c.interior) {
          if (scan->parsed()) {
            write_text(out_path(cfg, fs::path(scan_out).replace_extension(".json").string()),
                       with_config(cfg, body).dump(2) + "\n");
            out << with_config(cfg, body).dump(2) << '\n';
          }
          throw numerical_error("energy", "maximizer at an endpoint of S_eps: eps not small enough");
        }
      }
      if (scan->parsed()) {
        const std::string text = with_config(cfg, body).dump(2) + "\n";
        write_text(out_path(cfg, fs::path(scan_out).replace_extension(".json").string()), text);
        out << text;
        return 0;
      }
      FullSolution sol;
      double h_star;
      if (need_scan) {
        sol = suite.solution();
        h_star = suite.scan().h_star;
      } else {
        h_star = solve_h;
        const AnsatzConfig ac{h_star, cfg.beta0};
        const Grid grid = reduction_grid(cfg, std::max(h_star, hi));
        Field phi;
        ReductionOptions opt;
        opt.tol = cfg.fixed_point_tol;
        opt.linear_tol = cfg.linear_tol;
        reduced_energy(suite.profile(), spec, ac, grid, opt, cfg.quad_delta, &phi);
        NewtonOptions n;
        n.tol = cfg.newton_tol;
        sol = full_solve(Ansatz(suite.profile(), spec, ac, grid), phi, n);
      }
      const fs::path dump = out_path(cfg, run->parsed() ? "solution.bin" : solve_out);
      dump_field(sol.u, dump.string(), "solution h_star=" + num(h_star));
      body["h_star"] = h_star;
      body["solution"] = solution_json(sol);
      if (run->parsed()) {
        for (int id : {7, 8}) checks.push_back(suite.run(id));
        bool ok = true;
        for (const auto &r : checks) {
          bool wanted = false;
          for (int id : ids) wanted |= id == r.id;
          if (wanted) ok &= r.pass;
        }
        body["checks"] = checks_json(checks);
        body["pass"] = ok;
        const std::string text = with_config(cfg, body).dump(2) + "\n";
        write_text(out_path(cfg, "report.json"), text);
        write_text(out_path(cfg, "config.ini"), to_config_text(cfg));
        out << text;
        return ok ? 0 : static_cast<int>(ErrorKind::numerical);
      }
      const std::string text = with_config(cfg, body).dump(2) + "\n";
      write_text(fs::path(dump).replace_extension(".json"), text);
      out << text;
      return 0;
    }

    if (ver->parsed()) {
      CheckSuite suite(cfg);
      std::vector<CheckResult> rs;
      for (int id : parse_check_ids(ver_checks)) rs.push_back(suite.run(id));
      const std::string text = with_config(cfg, {{"checks", checks_json(rs)}}).dump(2) + "\n";
      write_text(out_path(cfg, ver_out), text);
      for (const auto &r : rs) err << (r.pass ? "pass " : "FAIL ") << r.id << ' ' << r.title << ": " << r.summary << '\n';
      out << text;
      return 0;
    }
  } catch (const Error &e) {
    static const char *kinds[] = {"", "", "parameter", "numerical", "integrity"};
    err << ordered_json{{"error", {{"stage", e.stage()}, {"kind", kinds[e.exit_code()]}, {"message", e.what()}}}}.dump()
        << '\n';
    return e.exit_code();
  } catch (const std::exception &e) {
    err << ordered_json{{"error", {{"stage", "cli"}, {"kind", "numerical"}, {"message", e.what()}}}}.dump() << '\n';
    return static_cast<int>(ErrorKind::numerical);
  }
  return 0;
}

}  // namespace tetra
