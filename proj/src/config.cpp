#include "tetra/config.hpp"

#include <cmath>
#include <sstream>

#include "tetra/errors.hpp"
#include "tetra/reduction.hpp"

namespace tetra {

void validate(const RunConfig &c) {
  auto fail = [](const std::string &msg) { throw parameter_error("config", msg); };
  if (c.N != 3) fail("only N = 3 is implemented on grids");
  const double critical = (c.N + 2.0) / (c.N - 2.0);
  if (!(c.p > 1.0 && c.p < critical)) fail("p must satisfy 1 < p < (N+2)/(N-2) = " + std::to_string(critical));
  if (!(c.a > 0.0)) fail("a must be positive");
  if (!(c.m > 0.0)) fail("m must be positive");
  if (!(c.theta > 0.0)) fail("theta must be positive");
  if (!(c.beta0 > 0.0 && c.beta0 < 1.0 / (2.0 * std::sqrt(2.0))))
    fail("beta0 must lie in (0, 1/(2 sqrt 2)) = (0, 0.353553...)");
  if (!(c.eps > 0.0 && c.eps < 1.0)) fail("eps must lie in (0, 1)");
  potential_profile_from_string(c.profile);
  if (!(c.delta > 0.0) || !(c.kernel_delta > 0.0) || !(c.quad_delta > 0.0)) fail("grid spacings must be positive");
  if (c.R_box < 0.0) fail("R_box must be >= 0 (0 selects the default box)");
  if (c.n != 0 && (c.n < 17 || c.n % 2 == 0)) fail("n must be 0 (automatic) or odd and >= 17");
  if (c.samples < 9) fail("samples must be >= 9");
  if (c.cone_points < 1) fail("cone_points must be positive");
  for (double t : {c.shoot_tol, c.linear_tol, c.fixed_point_tol, c.newton_tol})
    if (!(t > 0.0)) fail("tolerances must be positive");
  parse_check_ids(c.run_checks);
}

std::vector<int> parse_check_ids(const std::string &list) {
  std::vector<int> ids;
  std::stringstream in(list);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t used = 0;
    int id = 0;
    try {
      id = std::stoi(tok, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || tok.find_first_not_of(' ', used) != std::string::npos || id < 1 || id > 9)
      throw parameter_error("config", "check lists hold integers 1..9, got '" + tok + "'");
    ids.push_back(id);
  }
  return ids;
}

PotentialSpec potential_spec(const RunConfig &c, double eps) {
  PotentialSpec s;
  s.eps = eps;
  s.a = c.a;
  s.m = c.m;
  s.theta = c.theta;
  s.profile = potential_profile_from_string(c.profile);
  return s;
}

PotentialSpec potential_spec(const RunConfig &c) { return potential_spec(c, c.eps); }

Grid reduction_grid(const RunConfig &c, double h_hi) {
  const double R = c.R_box > 0.0 ? c.R_box : box_for(h_hi);
  return c.n > 0 ? Grid(R, c.n) : grid_for(R, c.delta);
}

}  // namespace tetra
