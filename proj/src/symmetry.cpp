#include "tetra/symmetry.hpp"

#include <algorithm>
#include <cmath>

#include "tetra/errors.hpp"
#include "tetra/grid.hpp"

namespace tetra {

namespace {

// A_1..A_12; rows of each block are listed top to bottom
constexpr std::array<IMat3, 12> kMatrices = {{
    {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
    {{{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}},
    {{{-1, 0, 0}, {0, 1, 0}, {0, 0, -1}}},
    {{{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}}},
    {{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}},
    {{{0, 1, 0}, {0, 0, -1}, {-1, 0, 0}}},
    {{{0, -1, 0}, {0, 0, 1}, {-1, 0, 0}}},
    {{{0, -1, 0}, {0, 0, -1}, {1, 0, 0}}},
    {{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}},
    {{{0, 0, 1}, {-1, 0, 0}, {0, -1, 0}}},
    {{{0, 0, -1}, {1, 0, 0}, {0, -1, 0}}},
    {{{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}}},
}};

constexpr GroupTable kReference = {{
    {{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}},
    {{2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11}},
    {{3, 4, 1, 2, 7, 8, 5, 6, 11, 12, 9, 10}},
    {{4, 3, 2, 1, 8, 7, 6, 5, 12, 11, 10, 9}},
    {{5, 8, 6, 7, 9, 12, 10, 11, 1, 4, 2, 3}},
    {{6, 7, 5, 8, 10, 11, 9, 12, 2, 3, 1, 4}},
    {{7, 6, 8, 5, 11, 10, 12, 9, 3, 2, 4, 1}},
    {{8, 5, 7, 6, 12, 9, 11, 10, 4, 1, 3, 2}},
    {{9, 11, 12, 10, 1, 3, 4, 2, 5, 7, 8, 6}},
    {{10, 12, 11, 9, 2, 4, 3, 1, 6, 8, 7, 5}},
    {{11, 9, 10, 12, 3, 1, 2, 4, 7, 5, 6, 8}},
    {{12, 10, 9, 11, 4, 2, 1, 3, 8, 6, 5, 7}},
}};

constexpr std::array<IVec3, 4> kVertices = {{{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}};

double dot(const Vec3 &a, const IVec3 &b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

const std::array<IVec3, 4> &vertices() { return kVertices; }
const GroupTable &reference_table() { return kReference; }

IMat3 mat_mul(const IMat3 &a, const IMat3 &b) {
  IMat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

IMat3 transpose(const IMat3 &a) {
  IMat3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
  return t;
}

int determinant(const IMat3 &a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

IVec3 act(const IMat3 &a, const IVec3 &v) {
  IVec3 r{};
  for (int i = 0; i < 3; ++i) r[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
  return r;
}

Vec3 act(const IMat3 &a, const Vec3 &v) {
  Vec3 r{};
  for (int i = 0; i < 3; ++i) r[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
  return r;
}

TetraGroup::TetraGroup() : A_(kMatrices) {
  for (int i = 1; i <= 12; ++i) {
    for (int j = 1; j <= 12; ++j) {
      const int k = index_of(mat_mul(A_[i - 1], A_[j - 1]));
      if (k == 0) throw integrity_fault("symmetry", "matrix set is not closed under products");
      table_[i - 1][j - 1] = k;
    }
  }
  for (int k = 1; k <= 12; ++k) {
    const IMat3 inv = transpose(A_[k - 1]);
    for (int i = 0; i < 4; ++i) {
      const IVec3 img = act(inv, kVertices[i]);
      int hit = 0;
      for (int j = 0; j < 4; ++j)
        if (img == kVertices[j]) hit = j + 1;
      if (hit == 0) throw integrity_fault("symmetry", "vertex image is not a vertex");
      perm_[k - 1][i] = hit;
    }
  }
}

int TetraGroup::index_of(const IMat3 &m) const {
  for (int k = 0; k < 12; ++k)
    if (A_[k] == m) return k + 1;
  return 0;
}

int TetraGroup::inverse(int i) const {
  for (int j = 1; j <= 12; ++j)
    if (multiply(i, j) == 1) return j;
  throw integrity_fault("symmetry", "element without inverse");
}

int TetraGroup::table_mismatches(const GroupTable &reference) const {
  int bad = 0;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) bad += table_[i][j] != reference[i][j];
  return bad;
}

const TetraGroup &TetraGroup::standard() {
  static const TetraGroup g = [] {
    TetraGroup t;
    const int bad = t.table_mismatches(kReference);
    if (bad) throw integrity_fault("symmetry", std::to_string(bad) + " table entries differ");
    return t;
  }();
  return g;
}

bool in_cone(int i, const Vec3 &y) {
  const double a = y[0], b = y[1], c = y[2];
  switch (i) {
    case 1: return b + c >= 0 && a + c >= 0 && a + b >= 0;
    case 2: return b + c <= 0 && a - b >= 0 && a - c >= 0;
    case 3: return a + c <= 0 && a - b <= 0 && b - c >= 0;
    case 4: return a + b <= 0 && a - c <= 0 && b - c <= 0;
    default: return false;
  }
}

int cone_of(const Vec3 &y) {
  for (int i = 1; i <= 4; ++i)
    if (in_cone(i, y)) return i;
  // the cones cover space; floating-point rounding cannot defeat all four tests
  throw integrity_fault("symmetry", "point outside every cone");
}

int cone_multiplicity(const Vec3 &y) {
  int m = 0;
  for (int i = 1; i <= 4; ++i) m += in_cone(i, y);
  return m;
}

Barycentric barycentric(const Vec3 &y) {
  std::array<double, 4> proj;
  for (int j = 0; j < 4; ++j) proj[j] = dot(y, kVertices[j]);
  const double lo = *std::min_element(proj.begin(), proj.end());
  Barycentric b;
  b.scale = -lo;  // sum of the unnormalised weights y.t_j/4 - lo/4
  for (int j = 0; j < 4; ++j)
    b.lambda[j] = b.scale > 0 ? (proj[j] - lo) / (4.0 * b.scale) : 0.25;
  return b;
}

int max_weight_index(const Vec3 &y, bool &tie, double tol) {
  const auto b = barycentric(y);
  int best = 0;
  for (int j = 1; j < 4; ++j)
    if (b.lambda[j] > b.lambda[best]) best = j;
  tie = false;
  for (int j = 0; j < 4; ++j)
    if (j != best && b.lambda[j] >= b.lambda[best] - tol) tie = true;
  return best + 1;
}

namespace {

double trilinear(const Field &u, const Vec3 &x) {
  const Grid &g = u.grid();
  const double d = g.delta();
  double s[3];
  int c[3];
  for (int a = 0; a < 3; ++a) {
    const double t = (x[a] + g.R) / d;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, g.n - 2);
    c[a] = i;
    s[a] = std::clamp(t - i, 0.0, 1.0);
  }
  double v = 0.0;
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? s[0] : 1 - s[0]) * (dy ? s[1] : 1 - s[1]) * (dz ? s[2] : 1 - s[2]);
        if (w != 0.0) v += w * u.at(c[0] + dx, c[1] + dy, c[2] + dz);
      }
  return v;
}

}  // namespace

Field symmetrize(const Field &u, Resampling mode) {
  const Grid &g = u.grid();
  if (g.n % 2 == 0 || g.n < 3) throw geometry_error("symmetry", "grid is not centred on the origin");
  const auto &G = TetraGroup::standard();
  Field out(g);
  const int m = g.center();
  const bool exact = mode != Resampling::trilinear;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        double s = 0.0;
        if (exact) {
          const IVec3 c{i - m, j - m, k - m};
          for (int e = 1; e <= 12; ++e) {
            const IVec3 t = act(G.matrix(e), c);
            s += u.at(t[0] + m, t[1] + m, t[2] + m);
          }
        } else {
          const Vec3 y = g.point(i, j, k);
          for (int e = 1; e <= 12; ++e) s += trilinear(u, act(G.matrix(e), y));
        }
        out.at(i, j, k) = s / 12.0;
      }
  return out;
}

double symmetry_residual(const Field &u) {
  const Grid &g = u.grid();
  const auto &G = TetraGroup::standard();
  const int m = g.center();
  double worst = 0.0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const IVec3 c{i - m, j - m, k - m};
        const double v = u.at(i, j, k);
        for (int e = 2; e <= 12; ++e) {
          const IVec3 t = act(G.matrix(e), c);
          worst = std::max(worst, std::abs(u.at(t[0] + m, t[1] + m, t[2] + m) - v));
        }
      }
  return worst;
}

}  // namespace tetra
