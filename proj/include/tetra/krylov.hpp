#pragma once

#include <functional>
#include <vector>

#include "tetra/grid.hpp"

namespace tetra {

using FieldMap = std::function<Field(const Field &)>;
using FieldDot = std::function<double(const Field &, const Field &)>;

struct MinresResult {
  Field x;
  int iterations = 0;
  double relative_residual = 1.0;  // recurrence estimate, in the norm of `dot`
  bool converged = false;
  double min_rayleigh = 0.0;  // smallest |<A v, v>| / <v, v> over Lanczos vectors
};

// MINRES for an operator self-adjoint with respect to `dot`
MinresResult minres(const FieldMap &A, const Field &b, const FieldDot &dot, double tol, int max_iterations);

// A x = lambda B x for the k smallest lambda. B == nullptr means the identity,
// T is a preconditioner, `constrain` (optional) projects onto the search space;
// it should be orthogonal in the inner product <T^{-1} ., .> so the reported
// residuals measure the constrained problem.
struct EigenProblem {
  FieldMap A;
  FieldMap B;
  FieldMap T;
  FieldMap constrain;
  // called once per iteration with the current Ritz values and residuals
  std::function<void(int, const std::vector<double> &, const std::vector<double> &)> monitor;
};

struct LobpcgResult {
  std::vector<double> values;
  std::vector<Field> vectors;
  std::vector<double> residuals;  // |A x - lambda B x| in the T-norm, x B-normalised
  int iterations = 0;
  bool converged = false;
};

LobpcgResult lobpcg(const EigenProblem &prob, std::vector<Field> X, double tol, int max_iterations);

}  // namespace tetra
