#pragma once

#include <cmath>
#include <string>

#include "wavecert/error.hpp"

namespace wavecert {

/// Space-time grid for the per-mode radial problems. Radial samples are cell
/// centred, r_j = (j + 1/2) dr, so the origin is never a sample point.
struct Grid {
    double dr = 1.0 / 64.0;
    int nr = 0;
    double dt = 0.0;
    int nt = 0;
    int L = 0;            ///< max spherical-harmonic degree
    double cfl = 0.9;

    double r(int j) const { return (j + 0.5) * dr; }
    double t(int n) const { return n * dt; }
    double r_max() const { return nr * dr; }
    double t_max() const { return nt * dt; }

    /// Builds a grid reaching t_max with dt <= cfl*dr and r_max >= t_max + 1 + 2dr + margin.
    static Grid make(double dr, double t_max, int L, double cfl = 0.9, double margin = 2.0) {
        require(dr > 0.0 && t_max > 0.0, "Grid::make: dr and t_max must be positive");
        require(cfl > 0.0 && cfl <= 0.9, "Grid::make: CFL must lie in (0, 0.9]");
        require(L >= 0, "Grid::make: L must be >= 0");
        Grid g;
        g.dr = dr;
        g.L = L;
        g.cfl = cfl;
        g.nt = static_cast<int>(std::ceil(t_max / (cfl * dr) - 1e-9));
        g.dt = t_max / g.nt;
        g.nr = static_cast<int>(std::ceil((t_max + 1.0 + 2.0 * dr + margin) / dr));
        g.validate();
        return g;
    }

    void validate() const {
        if (!(dr > 0.0 && dt > 0.0 && nr > 0 && nt > 0 && L >= 0))
            throw PreconditionError("Grid: non-positive step or size");
        if (dt > 0.9 * dr * (1.0 + 1e-12))
            throw PreconditionError("Grid: CFL violated (dt > 0.9 dr)");
        if (r_max() < t_max() + 1.0 + 2.0 * dr)
            throw PreconditionError("Grid: r_max < t_max + 1 + 2dr, the support cone would reach the boundary");
    }

    /// Index of the stored step closest to time t.
    int step_of(double time) const { return static_cast<int>(std::lround(time / dt)); }
};

} // namespace wavecert
