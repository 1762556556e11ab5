#include "pmaflow/grid/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include "pmaflow/error.hpp"

namespace pmaflow::io {

static_assert(std::endian::native == std::endian::little,
              "binary field format assumes a little-endian host");

namespace {

constexpr char kTrajectoryMagic[8] = {'P', 'M', 'A', 'T', 'R', 'J', '0', '1'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("read: truncated binary stream");
  return v;
}

}  // namespace

void write_field(std::ostream& os, const ScalarField& field) {
  const auto& g = field.grid();
  put<std::int32_t>(os, g.n_complex);
  put<std::int32_t>(os, g.points_per_axis);
  put<double>(os, g.period);
  const auto v = field.values();
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!os) throw Error("write_field: stream failure");
}

ScalarField read_field(std::istream& is, DerivativeMode mode) {
  const auto n = get<std::int32_t>(is);
  const auto N = get<std::int32_t>(is);
  const auto L = get<double>(is);
  TorusGrid grid(n, N, L, mode);
  std::vector<double> values(grid.size());
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!is) throw Error("read_field: truncated field data");
  return ScalarField(grid, std::move(values));
}

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  os.write(kTrajectoryMagic, sizeof(kTrajectoryMagic));
  put<std::int32_t>(os, static_cast<std::int32_t>(traj.size()));
  put<double>(os, traj.dt());
  for (double t : traj.times()) put<double>(os, t);
  for (const auto& f : traj.fields()) write_field(os, f);
  if (!os) throw Error("write_trajectory: stream failure");
}

Trajectory read_trajectory(std::istream& is, DerivativeMode mode) {
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kTrajectoryMagic, sizeof(magic)) != 0) {
    throw Error("read_trajectory: bad magic");
  }
  const auto count = get<std::int32_t>(is);
  if (count < 0) throw Error("read_trajectory: negative count");
  const auto dt = get<double>(is);
  std::vector<double> times(static_cast<std::size_t>(count));
  for (auto& t : times) t = get<double>(is);
  std::vector<ScalarField> fields;
  for (std::int32_t k = 0; k < count; ++k) fields.push_back(read_field(is, mode));
  if (fields.empty()) return Trajectory{};
  Trajectory traj(fields.front().grid(), dt);
  for (std::size_t k = 0; k < fields.size(); ++k) traj.push_back(times[k], std::move(fields[k]));
  return traj;
}

void save_trajectory(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("save_trajectory: cannot open " + path);
  write_trajectory(os, traj);
}

Trajectory load_trajectory(const std::string& path, DerivativeMode mode) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_trajectory: cannot open " + path);
  return read_trajectory(is, mode);
}

void write_field_csv(std::ostream& os, const ScalarField& field) {
  const auto& g = field.grid();
  static const char* names[] = {"x1", "y1", "x2", "y2"};
  for (int a = 0; a < g.real_dim(); ++a) os << names[a] << ',';
  os << "value\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto x = g.coordinates(i);
    for (int a = 0; a < g.real_dim(); ++a) os << x[a] << ',';
    os << field[i] << '\n';
  }
}

}  // namespace pmaflow::io
