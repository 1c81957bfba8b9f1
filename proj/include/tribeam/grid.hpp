// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_GRID_HPP
#define TRIBEAM_GRID_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "tribeam/field3.hpp"
#include "tribeam/geometry.hpp"

namespace tribeam {

/// Uniform cubic grid placement in physical space. Node (i,j,k) sits at
/// origin + (i,j,k)*cell_nm; cell counts are nx*ny*nz, node counts one more.
struct GridLayout {
    double cell_nm = 10.0;
    int nx = 0, ny = 0, nz = 0; // cells per axis
    double x0 = 0.0, y0 = 0.0, z0 = 0.0; // nm position of node (0,0,0)

    double node_x(int i) const { return x0 + i * cell_nm; }
    double node_y(int j) const { return y0 + j * cell_nm; }
    double node_z(int k) const { return z0 + k * cell_nm; }
    std::size_t node_count() const {
        return static_cast<std::size_t>(nx + 1) * (ny + 1) * (nz + 1);
    }
};

/// Volume-fraction-averaged relative permittivity sampled at the three
/// staggered E-component locations. Arrays are node-extent sized; entries
/// beyond a component's valid staggered range are left at vacuum.
struct DielectricGrid {
    GridLayout layout;
    Field3<double> eps_x, eps_y, eps_z;
    double background_index = 1.0; ///< n of the solid phase used to build it

    static std::size_t required_bytes(const GridLayout& l) {
        return 3 * l.node_count() * sizeof(double);
    }

    /// Sum of (eps-1)/(n^2-1) * cell volume over one component's samples:
    /// converges to the solid volume as the cell size shrinks.
    double dielectric_volume_nm3() const {
        const double n2 = background_index * background_index;
        if (n2 <= 1.0) return 0.0;
        double s = 0.0;
        for (double e : eps_x) s += (e - 1.0);
        const double d3 = layout.cell_nm * layout.cell_nm * layout.cell_nm;
        return s / (n2 - 1.0) * d3;
    }
};

class memory_budget_error : public std::runtime_error {
public:
    memory_budget_error(std::size_t required, std::size_t budget)
        : std::runtime_error("grid refused: requires " + std::to_string(required) +
                             " bytes, memory budget is " + std::to_string(budget) +
                             " bytes"),
          required_bytes(required), budget_bytes(budget) {}
    std::size_t required_bytes;
    std::size_t budget_bytes;
};

struct RasterizeOptions {
    double padding_nm = 350.0;     ///< vacuum margin on every open side (>= PML depth)
    bool fold_x = false;           ///< quadrant symmetry: domain starts at x = 0
    bool fold_z = false;           ///< quadrant symmetry: domain starts at z = 0
    double z_halflength_nm = -1.0; ///< override beam coverage along z (< 0: full L/2)
    std::size_t memory_budget_bytes = std::size_t(3) << 30;
    /// Sub-cell origin shift (nm), used by staircasing/convergence studies to
    /// average over grid registrations. Breaks exact mirror symmetry.
    double shift_x = 0.0, shift_y = 0.0, shift_z = 0.0;
};

namespace detail {

/// Volume fraction of diamond in the cell_nm^3 cell centered at (cx,cy,cz),
/// estimated by fixed 4x4x4 subsampling. Offsets are symmetric about the
/// center so mirrored cells see mirrored sample points exactly.
inline double diamond_fraction(const GeometrySpec& g, double cx, double cy, double cz,
                               double cell_nm) {
    static constexpr double off[4] = {-0.375, -0.125, 0.125, 0.375};
    int inside = 0;
    for (double ox : off) {
        const double x = cx + ox * cell_nm;
        for (double oy : off) {
            const double y = cy + oy * cell_nm;
            for (double oz : off) {
                const double z = cz + oz * cell_nm;
                if (material_at(g, x, y, z) == Material::diamond) ++inside;
            }
        }
    }
    return inside / 64.0;
}

} // namespace detail

/// Rasterize a geometry onto a staggered permittivity grid.
///
/// Each staggered sample holds eps = f*n^2 + (1-f), f the diamond volume
/// fraction of the cell centered on that sample. The layout always covers the
/// beam (or the requested z half-length) plus padding_nm on every open side;
/// folded axes start exactly at the mirror plane.
inline DielectricGrid rasterize(const GeometrySpec& g, double cell_nm,
                                const RasterizeOptions& opt = {}) {
    if (!(cell_nm > 0.0)) throw config_error("grid.cell_nm", "must be > 0");
    if (!(opt.padding_nm >= 0.0)) throw config_error("grid.padding_nm", "must be >= 0");
    g.validate();

    const double half_w = 0.5 * g.beam_width;
    const double half_l =
        opt.z_halflength_nm > 0.0 ? opt.z_halflength_nm : 0.5 * g.beam_length;

    GridLayout l;
    l.cell_nm = cell_nm;
    auto cells = [&](double extent) { return static_cast<int>(std::ceil(extent / cell_nm - 1e-9)); };

    if (opt.fold_x) {
        l.nx = cells(half_w + opt.padding_nm);
        l.x0 = 0.0;
    } else {
        l.nx = 2 * cells(half_w + opt.padding_nm);
        l.x0 = -0.5 * l.nx * cell_nm;
    }
    l.ny = cells(g.beam_height + 2.0 * opt.padding_nm);
    l.y0 = -opt.padding_nm;
    if (opt.fold_z) {
        l.nz = cells(half_l + opt.padding_nm);
        l.z0 = 0.0;
    } else {
        l.nz = 2 * cells(half_l + opt.padding_nm);
        l.z0 = -0.5 * l.nz * cell_nm;
    }

    l.x0 += opt.shift_x;
    l.y0 += opt.shift_y;
    l.z0 += opt.shift_z;

    const std::size_t need = DielectricGrid::required_bytes(l);
    if (need > opt.memory_budget_bytes)
        throw memory_budget_error(need, opt.memory_budget_bytes);

    DielectricGrid grid;
    grid.layout = l;
    grid.background_index = g.refractive_index;
    const int sx = l.nx + 1, sy = l.ny + 1, sz = l.nz + 1;
    grid.eps_x = Field3<double>(sx, sy, sz, 1.0);
    grid.eps_y = Field3<double>(sx, sy, sz, 1.0);
    grid.eps_z = Field3<double>(sx, sy, sz, 1.0);

    const double n2 = g.permittivity();
#pragma omp parallel for schedule(static)
    for (int k = 0; k < sz; ++k) {
        const double zk = l.node_z(k);
        const double zk_half = zk + 0.5 * cell_nm;
        for (int j = 0; j < sy; ++j) {
            const double yj = l.node_y(j);
            const double yj_half = yj + 0.5 * cell_nm;
            for (int i = 0; i < sx; ++i) {
                const double xi = l.node_x(i);
                const double xi_half = xi + 0.5 * cell_nm;
                // Ex at (i+1/2, j, k), Ey at (i, j+1/2, k), Ez at (i, j, k+1/2)
                const double fx = detail::diamond_fraction(g, xi_half, yj, zk, cell_nm);
                const double fy = detail::diamond_fraction(g, xi, yj_half, zk, cell_nm);
                const double fz = detail::diamond_fraction(g, xi, yj, zk_half, cell_nm);
                grid.eps_x(i, j, k) = fx * n2 + (1.0 - fx);
                grid.eps_y(i, j, k) = fy * n2 + (1.0 - fy);
                grid.eps_z(i, j, k) = fz * n2 + (1.0 - fz);
            }
        }
    }
    return grid;
}

} // namespace tribeam

#endif
