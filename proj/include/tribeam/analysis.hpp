// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_ANALYSIS_HPP
#define TRIBEAM_ANALYSIS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "tribeam/constants.hpp"
#include "tribeam/field3.hpp"
#include "tribeam/solver.hpp"
#include "tribeam/util.hpp"

namespace tribeam {

/// One cavity mode with its figures of merit. Mode volume fields stay zero
/// until a field-phasor pass fills them.
struct ResonantMode {
    double wavelength_nm = 0.0;
    double q = 0.0;
    double v_m_nm3 = 0.0;
    double v_m_normalized = 0.0; ///< units (lambda0/n)^3
    double f_cav = 0.0;          ///< Purcell factor, when v_m is known
    std::string parity = "--";   ///< H_y parity in x and z: EE|EO|OE|OO
    std::complex<double> amplitude;
    bool exceeds_cap = false;
    bool low_confidence = false;
};

/// F_cav = (3 / 4 pi^2) (lambda0/n)^3 Q / V_m; equals Gamma/Gamma_0.
inline double purcell_factor(double lambda0_nm, double n, double q, double v_m_nm3) {
    if (!(lambda0_nm > 0.0) || !(n > 0.0) || !(q > 0.0) || !(v_m_nm3 > 0.0))
        throw config_error("purcell", "all inputs must be positive");
    const double lon = lambda0_nm / n;
    return 3.0 / (4.0 * pi * pi) * lon * lon * lon * q / v_m_nm3;
}

/// V_m = sum(eps |E|^2 dV) / max(eps |E|^2) over co-located samples.
/// `multiplicity` scales the integral for folded (mirror-quadrant) domains.
inline double mode_volume(const Field3<double>& ex, const Field3<double>& ey,
                          const Field3<double>& ez, const Field3<double>& eps,
                          double cell_nm, double multiplicity = 1.0) {
    if (!ex.same_shape(ey) || !ex.same_shape(ez) || !ex.same_shape(eps))
        throw config_error("mode_volume", "field and eps grids must be congruent");
    double total = 0.0, peak = 0.0;
    const double* px = ex.data();
    const double* py = ey.data();
    const double* pz = ez.data();
    const double* pe = eps.data();
    for (std::size_t s = 0; s < ex.size(); ++s) {
        const double u = pe[s] * (px[s] * px[s] + py[s] * py[s] + pz[s] * pz[s]);
        total += u;
        peak = std::max(peak, u);
    }
    if (peak <= 0.0) throw config_error("mode_volume", "field is identically zero");
    return multiplicity * total * cell_nm * cell_nm * cell_nm / peak;
}

struct EnergyDensities {
    Field3<double> u_e, u_m, u;
};

/// U_E = eps|E|^2 / 2, U_M = mu|H|^2 / 2, U = U_E + U_M, pointwise.
inline EnergyDensities energy_density(const Field3<double>& ex, const Field3<double>& ey,
                                      const Field3<double>& ez, const Field3<double>& hx,
                                      const Field3<double>& hy, const Field3<double>& hz,
                                      const Field3<double>& eps, double mu = 1.0) {
    if (!ex.same_shape(eps) || !ex.same_shape(hx))
        throw config_error("energy_density", "grids must be congruent");
    EnergyDensities out;
    out.u_e = Field3<double>(ex.nx(), ex.ny(), ex.nz());
    out.u_m = Field3<double>(ex.nx(), ex.ny(), ex.nz());
    out.u = Field3<double>(ex.nx(), ex.ny(), ex.nz());
    for (std::size_t s = 0; s < ex.size(); ++s) {
        const double ue =
            0.5 * eps.data()[s] *
            (ex.data()[s] * ex.data()[s] + ey.data()[s] * ey.data()[s] + ez.data()[s] * ez.data()[s]);
        const double um =
            0.5 * mu *
            (hx.data()[s] * hx.data()[s] + hy.data()[s] * hy.data()[s] + hz.data()[s] * hz.data()[s]);
        out.u_e.data()[s] = ue;
        out.u_m.data()[s] = um;
        out.u.data()[s] = ue + um;
    }
    return out;
}

struct CouplingAssessment {
    double g_rabi = 0.0;      ///< s^-1
    double kappa = 0.0;       ///< s^-1, omega0 / (4 pi Q)
    double gamma_perp = 0.0;  ///< s^-1, input
    double v0_nm3 = 0.0;      ///< c lambda^2 / (8 pi gamma_perp)
    double v_m_nm3 = 0.0;
    double omega0 = 0.0;      ///< rad/s
    bool strong = false;      ///< g > margin * max(kappa, gamma_perp)
    bool q_above_3e3 = false; ///< the paper's minimum-Q gate for strong coupling
};

inline CouplingAssessment coupling_assessment(double q, double v_m_nm3, double lambda_nm,
                                              double gamma_perp, double margin = 1.0) {
    if (!(q > 0.0) || !(v_m_nm3 > 0.0) || !(lambda_nm > 0.0) || !(gamma_perp > 0.0) ||
        !(margin > 0.0))
        throw config_error("coupling", "all inputs must be positive");
    CouplingAssessment c;
    c.gamma_perp = gamma_perp;
    c.v_m_nm3 = v_m_nm3;
    c.omega0 = two_pi * c_nm_per_s / lambda_nm;
    c.kappa = c.omega0 / (4.0 * pi * q);
    c.v0_nm3 = c_nm_per_s * lambda_nm * lambda_nm / (8.0 * pi * gamma_perp);
    c.g_rabi = gamma_perp * std::sqrt(c.v0_nm3 / v_m_nm3);
    c.strong = c.g_rabi > margin * std::max(c.kappa, gamma_perp);
    c.q_above_3e3 = q > 3.0e3;
    return c;
}

struct FluxRatio {
    double ratio = 0.0; ///< |integral up| / |integral down|
    double up_integral = 0.0;
    double down_integral = 0.0;
    bool infinite = false; ///< downward integral vanished
};

/// Ratio of time-integrated power through the "up" and "down" monitors over
/// [start, end) steps (typically the post-shutoff window).
inline FluxRatio flux_ratio(const std::vector<double>& up, const std::vector<double>& down,
                            double dt, std::size_t start = 0, std::size_t end = 0) {
    if (up.empty() || down.empty())
        throw config_error("flux_ratio", "both monitors must be present");
    const std::size_t stop = end == 0 ? up.size() : end;
    FluxRatio r;
    for (std::size_t s = start; s < stop && s < up.size(); ++s) r.up_integral += up[s] * dt;
    for (std::size_t s = start; s < stop && s < down.size(); ++s) r.down_integral += down[s] * dt;
    const double u = std::fabs(r.up_integral);
    const double d = std::fabs(r.down_integral);
    if (d == 0.0) {
        r.infinite = true;
        r.ratio = u > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        return r;
    }
    r.ratio = u / d;
    return r;
}

/// Readout visibility improvement: Purcell enhancement times collection gain.
inline double readout_visibility(double f_cav, double collection_gain) {
    if (!(f_cav > 0.0) || !(collection_gain > 0.0))
        throw config_error("visibility", "inputs must be positive");
    return f_cav * collection_gain;
}

struct PhotonBudgetParams {
    double tau0_s = 13e-9;     ///< bulk spontaneous emission time
    double shelving_s = 250e-9;///< dark-state non-radiative decay time
    double collection = 0.01;  ///< detected fraction per emitted photon
    double f_cav = 1.0;        ///< Purcell enhancement of the radiative rate
    double window_s = 1e-6;    ///< counting window
};

struct PhotonBudget {
    double bright_mean = 0.0; ///< expected detected counts, m_s = 0
    double dim_mean = 0.0;    ///< expected detected counts, shelved branch
    double contrast = 0.0;    ///< (bright - dim) / (bright + dim)
};

/// Bright cycles emit every tau0/F_cav on average; dim cycles pay one
/// shelving dead time per emission attempt. Counts are Poisson with these
/// means (cross-checked against an event-driven Monte Carlo in the tests).
inline PhotonBudget photon_budget(const PhotonBudgetParams& p) {
    if (!(p.tau0_s > 0.0) || !(p.shelving_s > 0.0) || !(p.collection > 0.0) ||
        !(p.f_cav > 0.0) || !(p.window_s > 0.0))
        throw config_error("photon_budget", "inputs must be positive");
    const double tau = p.tau0_s / p.f_cav;
    PhotonBudget b;
    b.bright_mean = p.collection * p.window_s / tau;
    b.dim_mean = p.collection * p.window_s / (p.shelving_s + tau);
    b.contrast = (b.bright_mean - b.dim_mean) / (b.bright_mean + b.dim_mean);
    return b;
}

struct ParityScore {
    char x = '-';
    char z = '-';
    double residual_x = 1.0; ///< norm fraction in the rejected x-parity
    double residual_z = 1.0;
    bool assigned = false;
};

/// Score H_y parity from a y-plane snapshot of a full (unfolded) domain that
/// is mirror-symmetric about its center in x and z. H_y is dual-sampled along
/// both in-plane axes, so sample i pairs with nu-1-i.
inline ParityScore classify_parity_hy(const PlaneSnapshot<double>& sn, double max_residual = 1e-6) {
    if (sn.axis != 1) throw config_error("parity", "expected a y-plane snapshot");
    const int nu = sn.nu, nv = sn.nv;
    auto at = [&](int u, int v) { return sn.hy[static_cast<std::size_t>(v) * (nu + 1) + u]; };
    double ex = 0, ox = 0, ez = 0, oz = 0, tot = 0;
    for (int v = 0; v <= nv - 1; ++v)
        for (int u = 0; u <= nu - 1; ++u) {
            const double f = at(u, v);
            const double mx = at(nu - 1 - u, v);
            const double mz = at(u, nv - 1 - v);
            ex += 0.25 * (f + mx) * (f + mx);
            ox += 0.25 * (f - mx) * (f - mx);
            ez += 0.25 * (f + mz) * (f + mz);
            oz += 0.25 * (f - mz) * (f - mz);
            tot += f * f;
        }
    ParityScore p;
    if (tot <= 0.0) return p;
    p.residual_x = std::sqrt(std::min(ex, ox) / tot);
    p.residual_z = std::sqrt(std::min(ez, oz) / tot);
    p.x = ex >= ox ? 'E' : 'O';
    p.z = ez >= oz ? 'E' : 'O';
    p.assigned = p.residual_x <= max_residual && p.residual_z <= max_residual;
    if (!p.assigned) p.x = p.z = '-';
    return p;
}

/// Parity labels are fixed by the quadrant boundary walls: H_y even across a
/// plane needs an electric wall there, odd a magnetic wall.
inline std::string parity_of_walls(BoundaryKind at_x0, BoundaryKind at_z0) {
    auto tag = [](BoundaryKind b) {
        return b == BoundaryKind::pec ? 'E' : b == BoundaryKind::pmc ? 'O' : '-';
    };
    return std::string{tag(at_x0), tag(at_z0)};
}

} // namespace tribeam

#endif
