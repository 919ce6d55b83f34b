#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tetra/field.hpp"
#include "tetra/grid.hpp"

namespace tetra {

// Everything a run depends on. Defaults reproduce the reference run.
struct RunConfig {
  double p = 3.0;
  int N = 3;
  double eps = 1e-4;
  double beta0 = 0.05;

  // potential V_1
  double a = 140.0;
  double m = 2.0;
  double theta = 2.0;
  std::string profile = "algebraic";

  // reduction grid; R_box = 0 picks box_for(upper end of S_eps), n = 0 picks
  // the cheapest n with spacing <= delta
  double R_box = 0.0;
  int n = 0;
  double delta = 0.3;
  double kernel_delta = 0.25;  // spacing of the single-bump kernel check
  double quad_delta = 0.15;    // lattice of the ansatz-energy quadrature

  double shoot_tol = 1e-8;
  double linear_tol = 1e-7;
  double fixed_point_tol = 1e-9;
  double newton_tol = 1e-6;

  int samples = 9;
  std::uint64_t seed = 20240601;
  int cone_points = 1000000;
  std::string out_dir = ".";
  // criteria whose failure makes `run` exit nonzero
  std::string run_checks = "1,2,3,7,8";
};

// assumption gates; throws a parameter error naming the violated condition
void validate(const RunConfig &c);

// comma-separated criterion numbers 1..9
std::vector<int> parse_check_ids(const std::string &list);

PotentialSpec potential_spec(const RunConfig &c);
PotentialSpec potential_spec(const RunConfig &c, double eps);

// reduction grid for a window whose upper end is h_hi
Grid reduction_grid(const RunConfig &c, double h_hi);

}  // namespace tetra
