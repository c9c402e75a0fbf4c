#pragma once

#include <iosfwd>
#include <string>

#include "semot/grid.hpp"

namespace semot {

/// Writes "x,value" (1D) or "x,y,value" (2D) rows with a header, 17 significant digits.
void write_csv(std::ostream& out, const ScalarField& field);

/// Reads a field written by write_csv back onto `grid`. Node positions are
/// matched by rounding coordinates to the nearest grid index.
ScalarField read_csv(std::istream& in, const PeriodicGrid& grid);

/// Space-time dump: "t,x,value" / "t,x,y,value", one row per (slice, node).
void write_space_time_csv(std::ostream& out, const SpaceTimeScalarField& field);

/// Volatility surface: "t,x,sigma" in 1D, "t,x,y,sxx,sxy,syy" in 2D.
void write_matrix_surface_csv(std::ostream& out, const SpaceTimeMatrixField& surface);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace semot
