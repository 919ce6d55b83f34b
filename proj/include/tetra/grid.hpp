#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tetra/symmetry.hpp"

namespace tetra {

// Cube [-R, R]^3 sampled with n nodes per axis, n odd so the origin is a node.
struct Grid {
  double R = 0.0;
  int n = 0;

  Grid() = default;
  Grid(double R_box, int n_axis);

  double delta() const { return 2.0 * R / (n - 1); }
  int center() const { return (n - 1) / 2; }
  std::size_t size() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
  }
  double coord(int i) const { return -R + i * delta(); }
  Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
  bool on_boundary(int i, int j, int k) const {
    return i == 0 || j == 0 || k == 0 || i == n - 1 || j == n - 1 || k == n - 1;
  }
  double cell_volume() const {
    const double d = delta();
    return d * d * d;
  }
  bool operator==(const Grid &o) const { return R == o.R && n == o.n; }
  bool operator!=(const Grid &o) const { return !(*this == o); }
};

// grid with n - 1 = 2^a 3^b 5^c (cheap sine transforms) and spacing <= target
Grid grid_for(double R_box, double target_delta);

class Field {
 public:
  Field() = default;
  explicit Field(const Grid &g, double value = 0.0) : grid_(g), v_(g.size(), value) {}

  const Grid &grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double &operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  double &at(int i, int j, int k) { return v_[grid_.index(i, j, k)]; }
  double at(int i, int j, int k) const { return v_[grid_.index(i, j, k)]; }
  std::vector<double> &values() { return v_; }
  const std::vector<double> &values() const { return v_; }
  double *data() { return v_.data(); }
  const double *data() const { return v_.data(); }

  Field &operator+=(const Field &o);
  Field &operator-=(const Field &o);
  Field &operator*=(double s);
  // this += s * o
  Field &axpy(double s, const Field &o);
  void zero_boundary();
  double max_abs() const;

  template <class F>
  static Field sample(const Grid &g, F &&f) {
    Field out(g);
    for (int k = 0; k < g.n; ++k)
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) out.at(i, j, k) = f(g.point(i, j, k));
    return out;
  }

 private:
  Grid grid_;
  std::vector<double> v_;
};

Field operator+(Field a, const Field &b);
Field operator-(Field a, const Field &b);
Field operator*(double s, Field a);

void require_same_grid(const Field &a, const Field &b, const char *stage);

// binary dump: one JSON header line {n, R_box, description}, then n^3
// little-endian float64 values, x fastest
void dump_field(const Field &u, const std::string &path, const std::string &description);
Field load_field(const std::string &path, std::string *description = nullptr);

}  // namespace tetra
