#include "tetra/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "tetra/errors.hpp"

namespace tetra {

Grid::Grid(double R_box, int n_axis) : R(R_box), n(n_axis) {
  if (!(R > 0.0)) throw geometry_error("field", "box half-width must be positive");
  if (n < 17 || n % 2 == 0) throw geometry_error("field", "points per axis must be odd and >= 17");
}

namespace {

bool smooth_number(int v) {
  for (int p : {2, 3, 5})
    while (v % p == 0) v /= p;
  return v == 1;
}

}  // namespace

Grid grid_for(double R_box, double target_delta) {
  int m = static_cast<int>(std::ceil(2.0 * R_box / target_delta));
  m = std::max(m, 16);
  while (m % 2 || !smooth_number(m)) ++m;
  return Grid(R_box, m + 1);
}

Field &Field::operator+=(const Field &o) {
  require_same_grid(*this, o, "field");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

Field &Field::operator-=(const Field &o) {
  require_same_grid(*this, o, "field");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

Field &Field::operator*=(double s) {
  for (double &x : v_) x *= s;
  return *this;
}

Field &Field::axpy(double s, const Field &o) {
  require_same_grid(*this, o, "field");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += s * o.v_[i];
  return *this;
}

void Field::zero_boundary() {
  const int n = grid_.n;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        if (grid_.on_boundary(i, j, k)) at(i, j, k) = 0.0;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

Field operator+(Field a, const Field &b) { return a += b; }
Field operator-(Field a, const Field &b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

void require_same_grid(const Field &a, const Field &b, const char *stage) {
  if (a.grid() != b.grid()) throw geometry_error(stage, "fields live on different grids");
}

void dump_field(const Field &u, const std::string &path, const std::string &description) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw parameter_error("field", "cannot write " + path);
  nlohmann::ordered_json h;
  h["n"] = u.grid().n;
  h["R_box"] = u.grid().R;
  h["description"] = description;
  out << h.dump() << '\n';
  std::vector<unsigned char> buf(u.size() * 8);
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(u[i]);
    for (int b = 0; b < 8; ++b) buf[8 * i + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

Field load_field(const std::string &path, std::string *description) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parameter_error("field", "cannot read " + path);
  std::string line;
  std::getline(in, line);
  const auto h = nlohmann::json::parse(line);
  Field u(Grid(h.at("R_box").get<double>(), h.at("n").get<int>()));
  if (description) *description = h.value("description", "");
  std::vector<unsigned char> buf(u.size() * 8);
  in.read(reinterpret_cast<char *>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw parameter_error("field", "truncated field file " + path);
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[8 * i + b]) << (8 * b);
    u[i] = std::bit_cast<double>(bits);
  }
  return u;
}

}  // namespace tetra
