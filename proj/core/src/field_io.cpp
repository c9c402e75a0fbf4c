#include "semot/field_io.hpp"

#include <cstdio>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace semot {

std::string format_double(double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

void write_csv(std::ostream& out, const ScalarField& field) {
    const PeriodicGrid& g = field.grid();
    if (g.dim == 1) {
        out << "x,value\n";
        for (int i = 0; i < g.nx; ++i) {
            out << format_double(g.coordinate(i)) << ',' << format_double(field[i]) << '\n';
        }
        return;
    }
    out << "x,y,value\n";
    for (int j = 0; j < g.nx; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out << format_double(g.coordinate(i)) << ',' << format_double(g.coordinate(j)) << ','
                << format_double(field[g.index(i, j)]) << '\n';
        }
    }
}

namespace {

std::vector<double> split_doubles(const std::string& line) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
    }
    return v;
}

}  // namespace

ScalarField read_csv(std::istream& in, const PeriodicGrid& grid) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty input");
    const std::string expected = grid.dim == 1 ? "x,value" : "x,y,value";
    if (line != expected) throw std::runtime_error("read_csv: unexpected header '" + line + "'");
    ScalarField f(grid);
    std::vector<bool> seen(grid.size(), false);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_doubles(line);
        if (static_cast<int>(cells.size()) != grid.dim + 1) {
            throw std::runtime_error("read_csv: wrong column count in '" + line + "'");
        }
        const int i = grid.wrap(static_cast<int>(std::lround(cells[0] * grid.nx)));
        const int j = grid.dim == 1 ? 0 : grid.wrap(static_cast<int>(std::lround(cells[1] * grid.nx)));
        const std::size_t idx = grid.dim == 1 ? static_cast<std::size_t>(i) : grid.index(i, j);
        f[idx] = cells.back();
        seen[idx] = true;
        ++rows;
    }
    if (rows != grid.size()) throw std::runtime_error("read_csv: row count does not match grid");
    for (bool s : seen) {
        if (!s) throw std::runtime_error("read_csv: missing node");
    }
    return f;
}

void write_space_time_csv(std::ostream& out, const SpaceTimeScalarField& field) {
    const PeriodicGrid& g = field.grid();
    out << (g.dim == 1 ? "t,x,value\n" : "t,x,y,value\n");
    for (std::size_t k = 0; k < field.slice_count(); ++k) {
        const std::string t = format_double(g.time(static_cast<int>(k)));
        const ScalarField& s = field.slice(k);
        if (g.dim == 1) {
            for (int i = 0; i < g.nx; ++i) {
                out << t << ',' << format_double(g.coordinate(i)) << ',' << format_double(s[i]) << '\n';
            }
        } else {
            for (int j = 0; j < g.nx; ++j) {
                for (int i = 0; i < g.nx; ++i) {
                    out << t << ',' << format_double(g.coordinate(i)) << ','
                        << format_double(g.coordinate(j)) << ',' << format_double(s[g.index(i, j)])
                        << '\n';
                }
            }
        }
    }
}

void write_matrix_surface_csv(std::ostream& out, const SpaceTimeMatrixField& surface) {
    if (surface.empty()) throw std::invalid_argument("write_matrix_surface_csv: empty surface");
    const PeriodicGrid& g = surface.front().grid();
    out << (g.dim == 1 ? "t,x,sigma\n" : "t,x,y,sxx,sxy,syy\n");
    for (std::size_t k = 0; k < surface.size(); ++k) {
        const std::string t = format_double(g.time(static_cast<int>(k)));
        const SymMatrixField& s = surface[k];
        if (g.dim == 1) {
            for (int i = 0; i < g.nx; ++i) {
                out << t << ',' << format_double(g.coordinate(i)) << ',' << format_double(s.xx(i))
                    << '\n';
            }
        } else {
            for (int j = 0; j < g.nx; ++j) {
                for (int i = 0; i < g.nx; ++i) {
                    const std::size_t idx = g.index(i, j);
                    out << t << ',' << format_double(g.coordinate(i)) << ','
                        << format_double(g.coordinate(j)) << ',' << format_double(s.xx(idx)) << ','
                        << format_double(s.xy(idx)) << ',' << format_double(s.yy(idx)) << '\n';
                }
            }
        }
    }
}

}  // namespace semot
