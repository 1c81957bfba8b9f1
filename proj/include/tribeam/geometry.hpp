// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_GEOMETRY_HPP
#define TRIBEAM_GEOMETRY_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tribeam/util.hpp"

namespace tribeam {

enum class Material { vacuum, diamond };

/// Parametric description of the triangular nanobeam and its groove lattice.
///
/// Coordinate frame: origin at the center of the beam's top face, y positive
/// downward into the beam (apex at y = beam_height), z along the beam, x
/// transverse. All lengths in nm.
struct GeometrySpec {
    double lattice_constant_a = 205.0; ///< mirror period a
    double defect_spacing_d = 180.0;   ///< reduced central gap D
    double beam_height = 450.0;        ///< H
    double beam_width = 1240.0;        ///< W (top face)
    double beam_length = 8000.0;       ///< L
    double groove_width = 82.0;        ///< W_x, groove extent along z
    double groove_length = 460.0;      ///< W_z, groove extent along x
    double groove_depth = 225.0;       ///< h, carved down from the top face
    double clearance_below = 5000.0;   ///< H_s (documentation/domain checks only)
    double clearance_side = 6000.0;    ///< W_s (documentation/domain checks only)

    /// Per-gap spacings a_i between consecutive groove centers, ordered along
    /// z and symmetric about the cavity center. Odd length, palindromic.
    /// Empty: single central gap of defect_spacing_d, period a elsewhere.
    std::vector<double> taper;

    double refractive_index = 2.4;
    int grooves_per_side = 10;

    double permittivity() const { return refractive_index * refractive_index; }

    /// z coordinates (nm, >= 0) of groove centers on one side of the cavity
    /// center, ascending; the structure mirrors them to z < 0.
    /// grooves_per_side == 0 describes an unpatterned beam.
    std::vector<double> groove_centers() const {
        std::vector<double> centers;
        if (grooves_per_side <= 0) return centers;
        centers.reserve(static_cast<std::size_t>(grooves_per_side));
        const std::size_t t = taper.size();
        double z = t ? taper[t / 2] * 0.5 : defect_spacing_d * 0.5;
        for (int m = 0; m < grooves_per_side; ++m) {
            if (m > 0) {
                const std::size_t gap_index = t / 2 + static_cast<std::size_t>(m);
                z += (t && gap_index < t) ? taper[gap_index] : lattice_constant_a;
            }
            centers.push_back(z);
        }
        return centers;
    }

    /// Throws config_error naming the offending field.
    void validate() const {
        auto positive = [](double v, const char* key) {
            if (!(v > 0.0)) throw config_error(key, "must be > 0");
        };
        positive(lattice_constant_a, "geometry.lattice_constant_a");
        positive(defect_spacing_d, "geometry.defect_spacing_d");
        positive(beam_height, "geometry.beam_height");
        positive(beam_width, "geometry.beam_width");
        positive(beam_length, "geometry.beam_length");
        positive(groove_width, "geometry.groove_width");
        positive(groove_length, "geometry.groove_length");
        positive(groove_depth, "geometry.groove_depth");
        positive(clearance_below, "geometry.clearance_below");
        positive(clearance_side, "geometry.clearance_side");
        positive(refractive_index, "geometry.refractive_index");
        if (grooves_per_side < 0)
            throw config_error("geometry.grooves_per_side", "must be >= 0");
        if (groove_depth > beam_height)
            throw config_error("geometry.groove_depth", "exceeds beam_height");
        if (groove_length > beam_width)
            throw config_error("geometry.groove_length", "exceeds beam_width");
        if (!taper.empty()) {
            if (taper.size() % 2 == 0)
                throw config_error("geometry.taper", "must have odd length");
            for (std::size_t i = 0; i < taper.size(); ++i) {
                if (!(taper[i] > 0.0))
                    throw config_error("geometry.taper", "entries must be > 0");
                if (taper[i] != taper[taper.size() - 1 - i])
                    throw config_error("geometry.taper", "must be palindromic");
            }
        }
        const auto centers = groove_centers();
        if (!centers.empty() && 2.0 * centers.back() + groove_width > beam_length)
            throw config_error("geometry.beam_length",
                               "groove lattice does not fit inside the beam");
    }
};

/// Material lookup at a physical point (nm). Total for a valid spec.
///
/// Uses |x| and |z| throughout so queries at mirrored points run the exact
/// same float operations; the grid mirror-symmetry invariant relies on this.
inline Material material_at(const GeometrySpec& g, double x, double y, double z) {
    const double ax = std::fabs(x);
    const double az = std::fabs(z);
    if (y < 0.0 || y > g.beam_height) return Material::vacuum;
    if (az > 0.5 * g.beam_length) return Material::vacuum;
    const double half_width = 0.5 * g.beam_width * (1.0 - y / g.beam_height);
    if (ax > half_width) return Material::vacuum;
    if (y <= g.groove_depth && ax <= 0.5 * g.groove_length) {
        const double half_groove = 0.5 * g.groove_width;
        // Grooves are sparse along z; scan outward from the innermost center.
        const auto centers = g.groove_centers();
        for (double c : centers) {
            if (az < c - half_groove) break;
            if (az <= c + half_groove) return Material::vacuum;
        }
    }
    return Material::diamond;
}

/// Named presets used throughout the CLI and tests.
inline GeometrySpec geometry_preset(std::string_view name) {
    GeometrySpec g; // defaults hold the base nm values
    if (name == "table1-base") return g;
    if (name == "fig7-highq") {
        g.beam_height = 1.65 * g.lattice_constant_a;  // 338.25 nm
        g.groove_depth = 0.5 * g.beam_height;
        g.defect_spacing_d = 0.9 * g.lattice_constant_a;
        g.taper.assign(11, 0.9 * g.lattice_constant_a); // 11 reduced gaps
        return g;
    }
    throw config_error("geometry.preset", "unknown preset '" + std::string(name) +
                                              "' (expected table1-base | fig7-highq)");
}

/// Fig 2(b) waveguide-dispersion geometry, expressed through the same spec.
inline GeometrySpec dispersion_beam(double a_nm = 205.0, bool grooved = true) {
    GeometrySpec g;
    g.lattice_constant_a = a_nm;
    g.beam_height = 2.36 * a_nm;
    g.beam_width = 6.0 * a_nm;
    g.groove_width = 0.4 * a_nm;
    g.groove_length = 0.37 * g.beam_width;
    g.groove_depth = 0.5 * g.beam_height;
    g.defect_spacing_d = a_nm; // uniform lattice, no defect
    g.beam_length = 1e9;       // effectively infinite; band runs use one period
    g.grooves_per_side = grooved ? 2000 : 0;
    return g;
}

} // namespace tribeam

#endif
