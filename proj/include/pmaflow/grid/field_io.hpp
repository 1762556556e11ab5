#pragma once

#include <iosfwd>
#include <string>

#include "pmaflow/grid/scalar_field.hpp"

namespace pmaflow::io {

// Binary field layout (little-endian):
//   int32 n_complex, int32 N, float64 L, then N^{2n} float64 values in
//   row-major order over (x1, y1, x2, y2).
//
// Trajectory checkpoint layout:
//   char[8] "PMATRJ01", int32 count, float64 dt, float64 times[count],
//   then `count` binary field records.

void write_field(std::ostream& os, const ScalarField& field);
ScalarField read_field(std::istream& is,
                       DerivativeMode mode = DerivativeMode::spectral);

void write_trajectory(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory(std::istream& is,
                           DerivativeMode mode = DerivativeMode::spectral);

void save_trajectory(const std::string& path, const Trajectory& traj);
Trajectory load_trajectory(const std::string& path,
                           DerivativeMode mode = DerivativeMode::spectral);

/// CSV with one row per point: coordinates then value.
void write_field_csv(std::ostream& os, const ScalarField& field);

}  // namespace pmaflow::io
