#pragma once

#include <array>
#include <vector>

namespace tetra {

class Field;

using IMat3 = std::array<std::array<int, 3>, 3>;
using IVec3 = std::array<int, 3>;
using Vec3 = std::array<double, 3>;
using GroupTable = std::array<std::array<int, 12>, 12>;

// tetrahedron vertices t_1..t_4
const std::array<IVec3, 4> &vertices();

// 1-based indices throughout, matching the usual T_1..T_12 numbering
class TetraGroup {
 public:
  TetraGroup();

  const IMat3 &matrix(int i) const { return A_[i - 1]; }
  // k with T_i T_j = T_k, from the matrix products
  int multiply(int i, int j) const { return table_[i - 1][j - 1]; }
  const GroupTable &table() const { return table_; }
  // k_i with T_k^{-1} t_i = t_{k_i}
  int vertex_action(int k, int i) const { return perm_[k - 1][i - 1]; }
  int inverse(int i) const;
  int index_of(const IMat3 &m) const;  // 0 if not a member

  // number of entries where the product table differs from `reference`
  int table_mismatches(const GroupTable &reference) const;

  // the group, throwing an integrity fault unless the product table equals
  // the reference multiplication table
  static const TetraGroup &standard();

 private:
  std::array<IMat3, 12> A_;
  GroupTable table_;
  std::array<std::array<int, 4>, 12> perm_;
};

// reference multiplication table, row i column j holds the index of T_i T_j
const GroupTable &reference_table();

IMat3 mat_mul(const IMat3 &a, const IMat3 &b);
IMat3 transpose(const IMat3 &a);
int determinant(const IMat3 &a);
IVec3 act(const IMat3 &a, const IVec3 &v);
Vec3 act(const IMat3 &a, const Vec3 &v);

// cone membership from the hyperplane inequalities
bool in_cone(int i, const Vec3 &y);
// smallest i with y in C_i
int cone_of(const Vec3 &y);
// number of cones containing y (1 away from the separating planes)
int cone_multiplicity(const Vec3 &y);

// y = s * sum lambda_i t_i with lambda a convex combination, s >= 0
struct Barycentric {
  std::array<double, 4> lambda;
  double scale;
};
Barycentric barycentric(const Vec3 &y);
// argmax of lambda; `tie` reports whether the maximum is shared within tol
int max_weight_index(const Vec3 &y, bool &tie, double tol = 1e-12);

enum class Resampling { automatic, exact, trilinear };

// (1/12) sum_i u(T_i y)
Field symmetrize(const Field &u, Resampling mode = Resampling::automatic);
// max_i sup |u(T_i y) - u(y)|
double symmetry_residual(const Field &u);

}  // namespace tetra
