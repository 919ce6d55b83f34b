#include "tetra/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "tetra/errors.hpp"
#include "tetra/field.hpp"

namespace tetra {

MinresResult minres(const FieldMap &A, const Field &b, const FieldDot &dot, double tol, int max_iterations) {
  MinresResult res;
  res.x = Field(b.grid());
  const double beta1 = std::sqrt(std::max(dot(b, b), 0.0));
  if (beta1 == 0.0) {
    res.converged = true;
    res.relative_residual = 0.0;
    return res;
  }
  Field r1 = b, r2 = b, y = b;
  Field w(b.grid()), w1(b.grid()), w2(b.grid());
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  res.min_rayleigh = std::numeric_limits<double>::infinity();
  for (int itn = 1; itn <= max_iterations; ++itn) {
    Field v = (1.0 / beta) * y;
    y = A(v);
    if (itn >= 2) y.axpy(-beta / oldb, r1);
    const double alfa = dot(v, y);
    res.min_rayleigh = std::min(res.min_rayleigh, std::abs(alfa));
    y.axpy(-alfa / beta, r2);
    r1 = std::move(r2);
    r2 = y;
    oldb = beta;
    beta = std::sqrt(std::max(dot(y, y), 0.0));

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = std::move(w2);
    w2 = std::move(w);
    w = std::move(v);
    w.axpy(-oldeps, w1);
    w.axpy(-delta, w2);
    w *= 1.0 / gamma;
    res.x.axpy(phi, w);

    res.iterations = itn;
    res.relative_residual = phibar / beta1;
    if (res.relative_residual < tol || beta == 0.0) {
      res.converged = true;
      break;
    }
  }
  return res;
}

namespace {

// columns of `basis` combined with coefficient column `c` (rows offset..offset+m)
Field combine(const std::vector<const Field *> &basis, const Eigen::MatrixXd &c, int col, int offset = 0) {
  Field out(basis.front()->grid());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double a = c(offset + static_cast<int>(i), col);
    if (a != 0.0) out.axpy(a, *basis[i]);
  }
  return out;
}

struct Block {
  std::vector<Field> x, ax, bx;
};

// Rayleigh-Ritz on span(S): smallest k eigenpairs of the pencil (S^T A S, S^T B S),
// discarding directions that are numerically dependent in the B-norm
bool rayleigh_ritz(const std::vector<const Field *> &S, const std::vector<const Field *> &AS,
                   const std::vector<const Field *> &BS, int k, Eigen::VectorXd &vals, Eigen::MatrixXd &coef) {
  const int m = static_cast<int>(S.size());
  Eigen::MatrixXd GA(m, m), GB(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      GA(i, j) = GA(j, i) = 0.5 * (inner_L2(*S[i], *AS[j]) + inner_L2(*S[j], *AS[i]));
      GB(i, j) = GB(j, i) = 0.5 * (inner_L2(*S[i], *BS[j]) + inner_L2(*S[j], *BS[i]));
    }
  Eigen::VectorXd d = GB.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd GBs = d.asDiagonal() * GB * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(GBs);
  const double top = eb.eigenvalues().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < m; ++i)
    if (eb.eigenvalues()(i) > 1e-12 * top) keep.push_back(i);
  if (static_cast<int>(keep.size()) < k) return false;
  Eigen::MatrixXd C(m, keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    C.col(c) = d.asDiagonal() * eb.eigenvectors().col(keep[c]) / std::sqrt(eb.eigenvalues()(keep[c]));
  const Eigen::MatrixXd H = C.transpose() * GA * C;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(0.5 * (H + H.transpose()));
  vals = eh.eigenvalues().head(k);
  coef = C * eh.eigenvectors().leftCols(k);
  return true;
}

std::vector<Field> apply_all(const FieldMap &f, const std::vector<Field> &v) {
  std::vector<Field> out;
  out.reserve(v.size());
  for (const auto &x : v) out.push_back(f(x));
  return out;
}

std::vector<const Field *> ptrs(std::initializer_list<const std::vector<Field> *> groups) {
  std::vector<const Field *> out;
  for (const auto *g : groups)
    for (const auto &f : *g) out.push_back(&f);
  return out;
}

}  // namespace

LobpcgResult lobpcg(const EigenProblem &prob, std::vector<Field> X, double tol, int max_iterations) {
  const int k = static_cast<int>(X.size());
  if (k == 0) throw parameter_error("eigen", "empty starting block");
  const bool hasB = static_cast<bool>(prob.B);
  auto B = [&](const Field &u) { return hasB ? prob.B(u) : u; };
  if (prob.constrain)
    for (auto &x : X) x = prob.constrain(x);

  Block cur{std::move(X), {}, {}};
  cur.ax = apply_all(prob.A, cur.x);
  cur.bx = apply_all(B, cur.x);
  Eigen::VectorXd lam;
  Eigen::MatrixXd Y;
  {
    const auto S = ptrs({&cur.x}), AS = ptrs({&cur.ax}), BS = ptrs({&cur.bx});
    if (!rayleigh_ritz(S, AS, BS, k, lam, Y)) throw numerical_error("eigen", "degenerate starting block");
    Block nb;
    for (int j = 0; j < k; ++j) {
      nb.x.push_back(combine(S, Y, j));
      nb.ax.push_back(combine(AS, Y, j));
      nb.bx.push_back(combine(BS, Y, j));
    }
    cur = std::move(nb);
  }

  Block dir;  // implicit search directions P
  LobpcgResult out;
  out.residuals.assign(k, 0.0);
  for (int it = 1; it <= max_iterations; ++it) {
    std::vector<Field> W;
    bool all = true;
    for (int j = 0; j < k; ++j) {
      Field r = cur.ax[j];
      r.axpy(-lam(j), cur.bx[j]);
      Field tr = prob.T ? prob.T(r) : r;
      // only the part of the residual inside the search space can vanish
      if (prob.constrain) tr = prob.constrain(tr);
      out.residuals[j] = std::sqrt(std::max(inner_L2(r, tr), 0.0));
      if (out.residuals[j] > tol * std::max(1.0, std::abs(lam(j)))) all = false;
      W.push_back(std::move(tr));
    }
    out.iterations = it;
    if (prob.monitor) prob.monitor(it, std::vector<double>(lam.data(), lam.data() + k), out.residuals);
    if (all) {
      out.converged = true;
      break;
    }
    const auto AW = apply_all(prob.A, W);
    const auto BW = apply_all(B, W);

    auto S = ptrs({&cur.x, &W, &dir.x});
    auto AS = ptrs({&cur.ax, &AW, &dir.ax});
    auto BS = ptrs({&cur.bx, &BW, &dir.bx});
    if (!rayleigh_ritz(S, AS, BS, k, lam, Y)) {
      // drop the implicit directions and retry once
      S = ptrs({&cur.x, &W});
      AS = ptrs({&cur.ax, &AW});
      BS = ptrs({&cur.bx, &BW});
      if (!rayleigh_ritz(S, AS, BS, k, lam, Y)) throw numerical_error("eigen", "basis collapsed");
    }
    Block nx, np;
    std::vector<const Field *> Sp(S.begin() + k, S.end()), ASp(AS.begin() + k, AS.end()),
        BSp(BS.begin() + k, BS.end());
    for (int j = 0; j < k; ++j) {
      np.x.push_back(combine(Sp, Y, j, k));
      np.ax.push_back(combine(ASp, Y, j, k));
      np.bx.push_back(combine(BSp, Y, j, k));
      nx.x.push_back(combine(S, Y, j));
      nx.ax.push_back(combine(AS, Y, j));
      nx.bx.push_back(combine(BS, Y, j));
    }
    cur = std::move(nx);
    dir = std::move(np);
  }
  out.values.assign(lam.data(), lam.data() + k);
  out.vectors = std::move(cur.x);
  return out;
}

}  // namespace tetra
