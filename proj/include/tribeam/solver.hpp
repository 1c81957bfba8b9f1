// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_SOLVER_HPP
#define TRIBEAM_SOLVER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "tribeam/constants.hpp"
#include "tribeam/field3.hpp"
#include "tribeam/grid.hpp"
#include "tribeam/util.hpp"

namespace tribeam {

enum class Comp { ex, ey, ez, hx, hy, hz };

inline const char* comp_name(Comp c) {
    switch (c) {
        case Comp::ex: return "ex";
        case Comp::ey: return "ey";
        case Comp::ez: return "ez";
        case Comp::hx: return "hx";
        case Comp::hy: return "hy";
        case Comp::hz: return "hz";
    }
    return "?";
}

inline Comp comp_from_name(const std::string& s) {
    for (Comp c : {Comp::ex, Comp::ey, Comp::ez, Comp::hx, Comp::hy, Comp::hz})
        if (s == comp_name(c)) return c;
    throw config_error("component", "unknown field component '" + s + "'");
}

/// Wall types. Mirror parities follow the H_y convention of the mode table:
/// H_y even across a plane is an electric wall, H_y odd a magnetic wall.
enum class BoundaryKind { pml, pec, pmc, bloch };

enum Side { x_min = 0, x_max, y_min, y_max, z_min, z_max };

struct PmlParams {
    int thickness = 10;      ///< cells
    double order = 3.0;      ///< polynomial grading exponent
    double sigma_scale = 1.0;///< multiplies the 0.8*(m+1)/dx optimum
    double kappa_max = 1.0;
    double alpha_max = 0.05; ///< CFS alpha at the inner edge, graded to 0 outside
};

/// Gaussian-modulated sinusoid, hard zero after `shutoff`. Times and
/// frequency in grid units (c = 1, lengths in cells).
struct GaussianSine {
    double amplitude = 1.0;
    double frequency = 0.1; ///< cycles per unit grid time
    double width = 20.0;    ///< Gaussian sigma of the envelope, grid time
    double t0 = 80.0;       ///< envelope center
    double shutoff = 160.0; ///< source forced to zero for t > shutoff

    double operator()(double t) const {
        if (t > shutoff) return 0.0;
        const double u = (t - t0) / width;
        return amplitude * std::exp(-0.5 * u * u) * std::sin(two_pi * frequency * (t - t0));
    }

    /// Construct from a center frequency and fractional FWHM bandwidth of the
    /// spectral power envelope, with envelope center and shutoff placed at
    /// `cut` sigmas (spec default: shut off 4 envelope widths past center).
    static GaussianSine from_bandwidth(double f_center, double fractional_bw,
                                       double amplitude = 1.0, double cut = 4.0) {
        GaussianSine s;
        s.amplitude = amplitude;
        s.frequency = f_center;
        const double df = fractional_bw * f_center; // FWHM in frequency
        s.width = std::sqrt(8.0 * std::log(2.0)) / (two_pi * df);
        s.t0 = cut * s.width;
        s.shutoff = s.t0 + cut * s.width;
        return s;
    }
};

struct PointSource {
    Comp comp = Comp::ey;
    int i = 0, j = 0, k = 0;
    GaussianSine waveform;
};

/// Uniform current sheet over a full node plane; launches plane waves.
struct SheetSource {
    Comp comp = Comp::ex;
    int axis = 2;  ///< plane normal: 0=x, 1=y, 2=z
    int index = 0; ///< node index along the normal
    GaussianSine waveform;
};

struct Probe {
    Comp comp = Comp::ey;
    int i = 0, j = 0, k = 0;
    std::string name;
};

/// Records instantaneous Poynting power through a node plane (or a
/// rectangular patch of it), positive toward +axis. u and v are the two
/// remaining axes in x<y<z order; negative bounds mean the full extent.
struct FluxPlane {
    int axis = 1;
    int index = 0;
    std::string name;
    int u0 = -1, u1 = -1, v0 = -1, v1 = -1;
};

/// All six components copied bit-exact from the slab of staggered samples
/// nearest a node plane; components dual along the plane normal sit half a
/// cell past it. u = first remaining axis, v = second (x<y<z order).
template <typename S>
struct PlaneSnapshot {
    int axis = 1;
    int index = 0;
    int nu = 0, nv = 0; ///< node counts (arrays are (nu+1) x (nv+1))
    std::vector<S> ex, ey, ez, hx, hy, hz;
};

struct DftRequest {
    std::vector<double> frequencies; ///< grid units
    long start_step = 0;             ///< window start (typically source-off)
    long end_step = -1;              ///< inclusive; -1: last step
    int stride = 8;
};

struct SimulationConfig {
    double courant = 0.5;
    long steps = 1000;
    std::array<BoundaryKind, 6> boundary{BoundaryKind::pml, BoundaryKind::pml,
                                         BoundaryKind::pml, BoundaryKind::pml,
                                         BoundaryKind::pml, BoundaryKind::pml};
    PmlParams pml;
    /// Phase advance (radians) across the z extent for Bloch boundaries,
    /// i.e. k * (domain length).
    double bloch_phase = 0.0;
    std::vector<PointSource> sources;
    std::vector<SheetSource> sheets;
    std::vector<Probe> probes;
    std::vector<FluxPlane> flux_planes;
    DftRequest dft;
    bool track_energy = false;
    int instability_check_stride = 500;

    void validate(int nx, int ny, int nz, double max_eps) const {
        if (!(courant > 0.0) || courant > courant_limit_3d + 1e-12)
            throw config_error("run.courant", "must satisfy 0 < S <= 1/sqrt(3)");
        if (steps < 1) throw config_error("run.steps", "must be >= 1");
        bool bloch_z = boundary[z_min] == BoundaryKind::bloch;
        if (bloch_z != (boundary[z_max] == BoundaryKind::bloch))
            throw config_error("run.boundary", "Bloch must be set on both z sides");
        for (int s = x_min; s <= y_max; ++s)
            if (boundary[s] == BoundaryKind::bloch)
                throw config_error("run.boundary", "Bloch boundaries are z-only");
        bool any_pml = false;
        for (auto b : boundary) any_pml |= (b == BoundaryKind::pml);
        if (any_pml && pml.thickness < 8)
            throw config_error("run.pml.thickness", "absorbing layer must be >= 8 cells");
        auto axis_room = [&](Side mn, Side mx, int n, const char* name) {
            const int layers = (boundary[mn] == BoundaryKind::pml ? 1 : 0) +
                               (boundary[mx] == BoundaryKind::pml ? 1 : 0);
            if (layers > 0 && n < layers * pml.thickness + 4)
                throw config_error(std::string("run.boundary.") + name,
                                   "domain too small for the absorbing layers");
        };
        axis_room(x_min, x_max, nx, "x");
        axis_room(y_min, y_max, ny, "y");
        axis_room(z_min, z_max, nz, "z");
        auto dim_ok = [&](int v, int n) { return v >= 0 && v <= n; };
        for (std::size_t p = 0; p < probes.size(); ++p)
            if (!dim_ok(probes[p].i, nx) || !dim_ok(probes[p].j, ny) || !dim_ok(probes[p].k, nz))
                throw config_error("run.probes[" + std::to_string(p) + "]", "outside grid");
        for (std::size_t s = 0; s < sources.size(); ++s) {
            const auto& src = sources[s];
            if (!dim_ok(src.i, nx) || !dim_ok(src.j, ny) || !dim_ok(src.k, nz))
                throw config_error("run.sources[" + std::to_string(s) + "]", "outside grid");
            const double cells_per_lambda = 1.0 / (src.waveform.frequency * std::sqrt(max_eps));
            if (cells_per_lambda < 10.0)
                throw config_error("run.sources[" + std::to_string(s) + "]",
                                   "center wavelength under 10 cells in the dielectric");
        }
        for (std::size_t m = 0; m < flux_planes.size(); ++m) {
            const auto& f = flux_planes[m];
            const int n = f.axis == 0 ? nx : f.axis == 1 ? ny : nz;
            if (f.axis < 0 || f.axis > 2 || f.index < 1 || f.index > n - 1)
                throw config_error("run.monitors[" + std::to_string(m) + "]",
                                   "plane outside grid interior");
            const int nu = f.axis == 0 ? ny : nx;
            const int nv = f.axis == 2 ? ny : nz;
            const bool patch_ok = (f.u0 < 0 || (f.u0 >= 0 && f.u1 > f.u0 && f.u1 <= nu)) &&
                                  (f.v0 < 0 || (f.v0 >= 0 && f.v1 > f.v0 && f.v1 <= nv));
            if (!patch_ok)
                throw config_error("run.monitors[" + std::to_string(m) + "]",
                                   "patch bounds outside the plane");
        }
    }
};

class solver_error : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
struct scalar_traits {
    using real = T;
    static constexpr bool is_complex = false;
    static T conj(T v) { return v; }
    static double abs2(T v) { return static_cast<double>(v) * static_cast<double>(v); }
};
template <typename R>
struct scalar_traits<std::complex<R>> {
    using real = R;
    static constexpr bool is_complex = true;
    static std::complex<R> conj(std::complex<R> v) { return std::conj(v); }
    static double abs2(std::complex<R> v) { return std::norm(std::complex<double>(v)); }
};

/// Per-axis CPML coefficient tables at node (integer) and dual (half)
/// positions, plus the inclusive index ranges where they are non-trivial.
struct PmlAxis {
    std::vector<double> rk_node, b_node, a_node; // rk = 1/kappa - 1
    std::vector<double> rk_dual, b_dual, a_dual;
    std::vector<std::pair<int, int>> node_ranges, dual_ranges;
    bool active() const { return !node_ranges.empty(); }
};

inline PmlAxis make_pml_axis(int n, bool at_min, bool at_max, const PmlParams& p, double dt) {
    PmlAxis ax;
    ax.rk_node.assign(n + 1, 0.0);
    ax.b_node.assign(n + 1, 1.0);
    ax.a_node.assign(n + 1, 0.0);
    ax.rk_dual.assign(n + 1, 0.0);
    ax.b_dual.assign(n + 1, 1.0);
    ax.a_dual.assign(n + 1, 0.0);
    if (at_min) {
        ax.node_ranges.emplace_back(0, p.thickness - 1);
        ax.dual_ranges.emplace_back(0, p.thickness - 1);
    }
    if (at_max) {
        ax.node_ranges.emplace_back(n - p.thickness + 1, n);
        ax.dual_ranges.emplace_back(n - p.thickness, n - 1);
    }
    const double sigma_max = p.sigma_scale * 0.8 * (p.order + 1.0);
    auto coeff = [&](double depth, double& rk, double& b, double& a) {
        if (depth <= 0.0) return;
        const double d = std::min(depth, 1.0);
        const double sg = sigma_max * std::pow(d, p.order);
        const double kp = 1.0 + (p.kappa_max - 1.0) * std::pow(d, p.order);
        const double al = p.alpha_max * (1.0 - d);
        rk = 1.0 / kp - 1.0;
        b = std::exp(-(sg / kp + al) * dt);
        const double den = kp * (sg + kp * al);
        a = den > 0.0 ? sg * (b - 1.0) / den : 0.0;
    };
    const double T = p.thickness;
    for (int i = 0; i <= n; ++i) {
        double dn = 0.0, dd = 0.0;
        if (at_min) {
            dn = std::max(dn, (T - i) / T);
            dd = std::max(dd, (T - i - 0.5) / T);
        }
        if (at_max) {
            dn = std::max(dn, (i - (n - T)) / T);
            dd = std::max(dd, (i + 0.5 - (n - T)) / T);
        }
        coeff(dn, ax.rk_node[i], ax.b_node[i], ax.a_node[i]);
        coeff(dd, ax.rk_dual[i], ax.b_dual[i], ax.a_dual[i]);
    }
    return ax;
}

} // namespace detail

/// Explicit staggered-grid time-domain Maxwell stepper in normalized units
/// (c = 1, cell = 1, eps0 = mu0 = 1). Scalar is float or double for plain
/// runs, std::complex<double> for Bloch-periodic band runs.
template <typename Scalar>
class Fdtd {
public:
    using S = Scalar;
    using Real = typename detail::scalar_traits<S>::real;
    static constexpr bool is_complex = detail::scalar_traits<S>::is_complex;

    Fdtd(const DielectricGrid& grid, const SimulationConfig& cfg)
        : cfg_(cfg), nx_(grid.layout.nx), ny_(grid.layout.ny), nz_(grid.layout.nz),
          dt_(cfg.courant) {
        double max_eps = 1.0;
        for (double e : grid.eps_x) max_eps = std::max(max_eps, e);
        cfg_.validate(nx_, ny_, nz_, max_eps);
        if (!is_complex) {
            const double ph = cfg_.bloch_phase;
            const bool real_phase = std::fabs(std::sin(ph)) < 1e-14;
            if (bloch() && !real_phase)
                throw config_error("run.bloch_phase",
                                   "complex Bloch phase requires the complex solver");
        }

        ex_ = GhostField3<S>(nx_, ny_, nz_);
        ey_ = GhostField3<S>(nx_, ny_, nz_);
        ez_ = GhostField3<S>(nx_, ny_, nz_);
        hx_ = GhostField3<S>(nx_, ny_, nz_);
        hy_ = GhostField3<S>(nx_, ny_, nz_);
        hz_ = GhostField3<S>(nx_, ny_, nz_);
        inv_eps_x_ = GhostField3<Real>(nx_, ny_, nz_);
        inv_eps_y_ = GhostField3<Real>(nx_, ny_, nz_);
        inv_eps_z_ = GhostField3<Real>(nx_, ny_, nz_);
        for (int k = 0; k <= nz_; ++k)
            for (int j = 0; j <= ny_; ++j)
                for (int i = 0; i <= nx_; ++i) {
                    inv_eps_x_(i, j, k) = Real(1.0 / grid.eps_x(i, j, k));
                    inv_eps_y_(i, j, k) = Real(1.0 / grid.eps_y(i, j, k));
                    inv_eps_z_(i, j, k) = Real(1.0 / grid.eps_z(i, j, k));
                }

        const bool px_min = cfg_.boundary[x_min] == BoundaryKind::pml;
        const bool px_max = cfg_.boundary[x_max] == BoundaryKind::pml;
        const bool py_min = cfg_.boundary[y_min] == BoundaryKind::pml;
        const bool py_max = cfg_.boundary[y_max] == BoundaryKind::pml;
        const bool pz_min = cfg_.boundary[z_min] == BoundaryKind::pml;
        const bool pz_max = cfg_.boundary[z_max] == BoundaryKind::pml;
        pml_x_ = detail::make_pml_axis(nx_, px_min, px_max, cfg_.pml, dt_);
        pml_y_ = detail::make_pml_axis(ny_, py_min, py_max, cfg_.pml, dt_);
        pml_z_ = detail::make_pml_axis(nz_, pz_min, pz_max, cfg_.pml, dt_);
        if (px_min || px_max) {
            psi_ey_x_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_ez_x_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_hy_x_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_hz_x_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
        }
        if (py_min || py_max) {
            psi_ex_y_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_ez_y_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_hx_y_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_hz_y_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
        }
        if (pz_min || pz_max) {
            psi_ex_z_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_ey_z_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_hx_z_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
            psi_hy_z_ = Field3<S>(nx_ + 1, ny_ + 1, nz_ + 1);
        }

        probe_series_.assign(cfg_.probes.size(), {});
        flux_series_.assign(cfg_.flux_planes.size(), {});
        for (auto& v : probe_series_) v.reserve(static_cast<std::size_t>(cfg_.steps));
        for (auto& v : flux_series_) v.reserve(static_cast<std::size_t>(cfg_.steps));
        flux_pre_.assign(cfg_.flux_planes.size(), 0.0);

        if (!cfg_.dft.frequencies.empty()) {
            dft_end_ = cfg_.dft.end_step < 0 ? cfg_.steps - 1 : cfg_.dft.end_step;
            for (std::size_t f = 0; f < cfg_.dft.frequencies.size(); ++f) {
                dft_ex_.emplace_back(nx_ + 1, ny_ + 1, nz_ + 1);
                dft_ey_.emplace_back(nx_ + 1, ny_ + 1, nz_ + 1);
                dft_ez_.emplace_back(nx_ + 1, ny_ + 1, nz_ + 1);
                dft_hy_.emplace_back(nx_ + 1, ny_ + 1, nz_ + 1);
            }
        }
        if (cfg_.track_energy) {
            hx_prev_ = hx_;
            hy_prev_ = hy_;
            hz_prev_ = hz_;
        }
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double dt() const { return dt_; }
    long step_index() const { return n_; }
    long source_off_step() const {
        double t_off = 0.0;
        for (const auto& s : cfg_.sources) t_off = std::max(t_off, s.waveform.shutoff);
        for (const auto& s : cfg_.sheets) t_off = std::max(t_off, s.waveform.shutoff);
        return static_cast<long>(std::ceil(t_off / dt_));
    }

    const GhostField3<S>& field(Comp c) const {
        switch (c) {
            case Comp::ex: return ex_;
            case Comp::ey: return ey_;
            case Comp::ez: return ez_;
            case Comp::hx: return hx_;
            case Comp::hy: return hy_;
            default: return hz_;
        }
    }
    GhostField3<S>& field(Comp c) { return const_cast<GhostField3<S>&>(std::as_const(*this).field(c)); }
    const GhostField3<Real>& inv_eps(int axis) const {
        return axis == 0 ? inv_eps_x_ : axis == 1 ? inv_eps_y_ : inv_eps_z_;
    }

    const std::vector<std::vector<S>>& probe_series() const { return probe_series_; }
    const std::vector<std::vector<double>>& flux_series() const { return flux_series_; }
    const std::vector<Field3<std::complex<Real>>>& dft_ex() const { return dft_ex_; }
    const std::vector<Field3<std::complex<Real>>>& dft_ey() const { return dft_ey_; }
    const std::vector<Field3<std::complex<Real>>>& dft_ez() const { return dft_ez_; }
    const std::vector<Field3<std::complex<Real>>>& dft_hy() const { return dft_hy_; }

    /// Advance one full leapfrog step: E to t=(n+1)dt, then H to (n+3/2)dt.
    void step() {
        fill_h_ghosts();
        update_e();
        pml_correct_e();
        inject_sources((n_ + 0.5) * dt_);
        enforce_pec();
        if (bloch()) fill_e_ghosts();
        if (cfg_.track_energy) {
            hx_prev_ = hx_;
            hy_prev_ = hy_;
            hz_prev_ = hz_;
        }
        record_flux_pre();
        update_h();
        pml_correct_h();
        record();
        ++n_;
        if (cfg_.instability_check_stride > 0 && n_ % cfg_.instability_check_stride == 0)
            check_finite();
    }

    void run() {
        while (n_ < cfg_.steps) step();
    }

    void run(const std::function<void(long)>& after_step) {
        while (n_ < cfg_.steps) {
            step();
            after_step(n_);
        }
    }

    /// Discrete EM energy 1/2 sum(eps E^2) + 1/2 sum(H(n+1/2) H(n+3/2));
    /// exactly conserved in a closed lossless box. Needs track_energy.
    double discrete_energy() const {
        if (!cfg_.track_energy) throw solver_error("discrete_energy requires track_energy");
        double ue = 0.0, uh = 0.0;
        for (int k = 0; k <= nz_; ++k)
            for (int j = 0; j <= ny_; ++j)
                for (int i = 0; i <= nx_; ++i) {
                    ue += detail::scalar_traits<S>::abs2(ex_(i, j, k)) / inv_eps_x_(i, j, k);
                    ue += detail::scalar_traits<S>::abs2(ey_(i, j, k)) / inv_eps_y_(i, j, k);
                    ue += detail::scalar_traits<S>::abs2(ez_(i, j, k)) / inv_eps_z_(i, j, k);
                    uh += product(hx_prev_(i, j, k), hx_(i, j, k));
                    uh += product(hy_prev_(i, j, k), hy_(i, j, k));
                    uh += product(hz_prev_(i, j, k), hz_(i, j, k));
                }
        return 0.5 * (ue + uh);
    }

    PlaneSnapshot<S> snapshot(int axis, int index) const {
        const int n_axis = axis == 0 ? nx_ : axis == 1 ? ny_ : nz_;
        if (axis < 0 || axis > 2 || index < 0 || index > n_axis)
            throw config_error("snapshot.plane", "plane outside domain");
        PlaneSnapshot<S> sn;
        sn.axis = axis;
        sn.index = index;
        sn.nu = axis == 0 ? ny_ : nx_;
        sn.nv = axis == 2 ? ny_ : nz_;
        const std::size_t count = static_cast<std::size_t>(sn.nu + 1) * (sn.nv + 1);
        auto grab = [&](const GhostField3<S>& f, std::vector<S>& out) {
            out.resize(count);
            std::size_t s = 0;
            for (int v = 0; v <= sn.nv; ++v)
                for (int u = 0; u <= sn.nu; ++u, ++s)
                    out[s] = axis == 0 ? f(index, u, v) : axis == 1 ? f(u, index, v)
                                                                    : f(u, v, index);
        };
        grab(ex_, sn.ex);
        grab(ey_, sn.ey);
        grab(ez_, sn.ez);
        grab(hx_, sn.hx);
        grab(hy_, sn.hy);
        grab(hz_, sn.hz);
        return sn;
    }

    double max_field_norm() const {
        double m = 0.0;
        for (Comp c : {Comp::ex, Comp::ey, Comp::ez, Comp::hx, Comp::hy, Comp::hz}) {
            const auto& f = field(c);
            const S* d = f.data();
            for (std::size_t s = 0; s < f.storage_size(); ++s)
                m = std::max(m, detail::scalar_traits<S>::abs2(d[s]));
        }
        return std::sqrt(m);
    }

private:
    static double product(S a, S b) {
        if constexpr (is_complex)
            return std::real(std::complex<double>(detail::scalar_traits<S>::conj(a)) *
                             std::complex<double>(b));
        else
            return static_cast<double>(a) * static_cast<double>(b);
    }

    bool bloch() const { return cfg_.boundary[z_min] == BoundaryKind::bloch; }
    S bloch_factor() const {
        if constexpr (is_complex)
            return std::polar(Real(1), Real(cfg_.bloch_phase));
        else
            return Real(std::cos(cfg_.bloch_phase));
    }

    // Valid index upper bounds (inclusive) per component along z shrink by one
    // under Bloch, where node nz aliases node 0.
    int ztop_primal() const { return bloch() ? nz_ - 1 : nz_; }

    void fill_h_ghosts() {
        auto mirror_min_x = [&](GhostField3<S>& f) {
#pragma omp parallel for schedule(static)
            for (int k = -1; k <= nz_ + 1; ++k)
                for (int j = -1; j <= ny_ + 1; ++j) f(-1, j, k) = -f(0, j, k);
        };
        auto mirror_max_x = [&](GhostField3<S>& f) {
#pragma omp parallel for schedule(static)
            for (int k = -1; k <= nz_ + 1; ++k)
                for (int j = -1; j <= ny_ + 1; ++j) f(nx_, j, k) = -f(nx_ - 1, j, k);
        };
        auto mirror_min_y = [&](GhostField3<S>& f) {
#pragma omp parallel for schedule(static)
            for (int k = -1; k <= nz_ + 1; ++k)
                for (int i = -1; i <= nx_ + 1; ++i) f(i, -1, k) = -f(i, 0, k);
        };
        auto mirror_max_y = [&](GhostField3<S>& f) {
#pragma omp parallel for schedule(static)
            for (int k = -1; k <= nz_ + 1; ++k)
                for (int i = -1; i <= nx_ + 1; ++i) f(i, ny_, k) = -f(i, ny_ - 1, k);
        };
        auto mirror_min_z = [&](GhostField3<S>& f) {
#pragma omp parallel for schedule(static)
            for (int j = -1; j <= ny_ + 1; ++j)
                for (int i = -1; i <= nx_ + 1; ++i) f(i, j, -1) = -f(i, j, 0);
        };
        auto mirror_max_z = [&](GhostField3<S>& f) {
#pragma omp parallel for schedule(static)
            for (int j = -1; j <= ny_ + 1; ++j)
                for (int i = -1; i <= nx_ + 1; ++i) f(i, j, nz_) = -f(i, j, nz_ - 1);
        };

        if (cfg_.boundary[x_min] == BoundaryKind::pmc) {
            mirror_min_x(hy_);
            mirror_min_x(hz_);
        }
        if (cfg_.boundary[x_max] == BoundaryKind::pmc) {
            mirror_max_x(hy_);
            mirror_max_x(hz_);
        }
        if (cfg_.boundary[y_min] == BoundaryKind::pmc) {
            mirror_min_y(hx_);
            mirror_min_y(hz_);
        }
        if (cfg_.boundary[y_max] == BoundaryKind::pmc) {
            mirror_max_y(hx_);
            mirror_max_y(hz_);
        }
        if (cfg_.boundary[z_min] == BoundaryKind::pmc) {
            mirror_min_z(hx_);
            mirror_min_z(hy_);
        }
        if (cfg_.boundary[z_max] == BoundaryKind::pmc) {
            mirror_max_z(hx_);
            mirror_max_z(hy_);
        }
        if (bloch()) {
            const S ph = bloch_factor();
            const S phc = detail::scalar_traits<S>::conj(ph);
#pragma omp parallel for schedule(static)
            for (int j = -1; j <= ny_ + 1; ++j)
                for (int i = -1; i <= nx_ + 1; ++i) {
                    hx_(i, j, -1) = phc * hx_(i, j, nz_ - 1);
                    hy_(i, j, -1) = phc * hy_(i, j, nz_ - 1);
                }
        }
    }

    void fill_e_ghosts() {
        const S ph = bloch_factor();
#pragma omp parallel for schedule(static)
        for (int j = -1; j <= ny_ + 1; ++j)
            for (int i = -1; i <= nx_ + 1; ++i) {
                ex_(i, j, nz_) = ph * ex_(i, j, 0);
                ey_(i, j, nz_) = ph * ey_(i, j, 0);
            }
    }

    void update_e() {
        const Real dt = Real(dt_);
        const std::size_t sj = ex_.stride_j();
        const std::size_t sk = ex_.stride_k();
        S* ex = ex_.data();
        S* ey = ey_.data();
        S* ez = ez_.data();
        const S* hx = hx_.data();
        const S* hy = hy_.data();
        const S* hz = hz_.data();
        const Real* iex = inv_eps_x_.data();
        const Real* iey = inv_eps_y_.data();
        const Real* iez = inv_eps_z_.data();
        const int zp = ztop_primal();
        const int zd = nz_ - 1; // top dual z index is nz-1 always
#pragma omp parallel for schedule(static)
        for (int k = 0; k <= zp; ++k) {
            const bool kd_ok = k <= zd;
            for (int j = 0; j <= ny_; ++j) {
                const std::size_t r = ex_.index(0, j, k);
                if (j <= ny_ - 1) {
                    for (int i = 0; i <= nx_; ++i) { // Ey
                        const std::size_t s = r + i;
                        ey[s] += dt * iey[s] * ((hx[s] - hx[s - sk]) - (hz[s] - hz[s - 1]));
                    }
                }
                for (int i = 0; i <= nx_ - 1; ++i) { // Ex
                    const std::size_t s = r + i;
                    ex[s] += dt * iex[s] * ((hz[s] - hz[s - sj]) - (hy[s] - hy[s - sk]));
                }
                if (kd_ok) {
                    for (int i = 0; i <= nx_; ++i) { // Ez
                        const std::size_t s = r + i;
                        ez[s] += dt * iez[s] * ((hy[s] - hy[s - 1]) - (hx[s] - hx[s - sj]));
                    }
                }
            }
        }
    }

    void update_h() {
        const Real dt = Real(dt_);
        const std::size_t sj = ex_.stride_j();
        const std::size_t sk = ex_.stride_k();
        const S* ex = ex_.data();
        const S* ey = ey_.data();
        const S* ez = ez_.data();
        S* hx = hx_.data();
        S* hy = hy_.data();
        S* hz = hz_.data();
        const int zp = ztop_primal();
        const int zd = nz_ - 1;
#pragma omp parallel for schedule(static)
        for (int k = 0; k <= zp; ++k) {
            const bool kd_ok = k <= zd;
            for (int j = 0; j <= ny_; ++j) {
                const std::size_t r = ex_.index(0, j, k);
                if (j <= ny_ - 1 && kd_ok) {
                    for (int i = 0; i <= nx_; ++i) { // Hx
                        const std::size_t s = r + i;
                        hx[s] -= dt * ((ez[s + sj] - ez[s]) - (ey[s + sk] - ey[s]));
                    }
                }
                if (kd_ok) {
                    for (int i = 0; i <= nx_ - 1; ++i) { // Hy
                        const std::size_t s = r + i;
                        hy[s] -= dt * ((ex[s + sk] - ex[s]) - (ez[s + 1] - ez[s]));
                    }
                }
                if (j <= ny_ - 1) {
                    for (int i = 0; i <= nx_ - 1; ++i) { // Hz
                        const std::size_t s = r + i;
                        hz[s] -= dt * ((ey[s + 1] - ey[s]) - (ex[s + sj] - ex[s]));
                    }
                }
            }
        }
    }

    // CPML corrections: the plain sweep applied the raw derivative D; inside a
    // layer the update must read D/kappa + psi with psi <- b psi + a D, so add
    // (1/kappa - 1) D + psi after updating psi.
    void pml_correct_e() {
        const Real dt = Real(dt_);
        const std::size_t sj = ex_.stride_j();
        const std::size_t sk = ex_.stride_k();
        if (pml_x_.active()) {
            const auto& ax = pml_x_;
            for (auto [a, b] : ax.node_ranges) {
#pragma omp parallel for schedule(static)
                for (int k = 0; k <= ztop_primal(); ++k)
                    for (int j = 0; j <= ny_; ++j)
                        for (int i = a; i <= b; ++i) {
                            const Real bn = Real(ax.b_node[i]);
                            const Real an = Real(ax.a_node[i]);
                            const Real rk = Real(ax.rk_node[i]);
                            const std::size_t s = ex_.index(i, j, k);
                            if (j <= ny_ - 1) { // Ey: -dx Hz
                                const S d = hz_.data()[s] - hz_.data()[s - 1];
                                S& psi = psi_ey_x_(i, j, k);
                                psi = bn * psi + an * d;
                                ey_(i, j, k) -= dt * inv_eps_y_(i, j, k) * (rk * d + psi);
                            }
                            if (k <= nz_ - 1) { // Ez: +dx Hy
                                const S d = hy_.data()[s] - hy_.data()[s - 1];
                                S& psi = psi_ez_x_(i, j, k);
                                psi = bn * psi + an * d;
                                ez_(i, j, k) += dt * inv_eps_z_(i, j, k) * (rk * d + psi);
                            }
                        }
            }
        }
        if (pml_y_.active()) {
            const auto& ax = pml_y_;
            for (auto [a, b] : ax.node_ranges) {
#pragma omp parallel for schedule(static)
                for (int k = 0; k <= ztop_primal(); ++k)
                    for (int j = a; j <= b; ++j) {
                        const Real bn = Real(ax.b_node[j]);
                        const Real an = Real(ax.a_node[j]);
                        const Real rk = Real(ax.rk_node[j]);
                        for (int i = 0; i <= nx_; ++i) {
                            const std::size_t s = ex_.index(i, j, k);
                            if (i <= nx_ - 1) { // Ex: +dy Hz
                                const S d = hz_.data()[s] - hz_.data()[s - sj];
                                S& psi = psi_ex_y_(i, j, k);
                                psi = bn * psi + an * d;
                                ex_(i, j, k) += dt * inv_eps_x_(i, j, k) * (rk * d + psi);
                            }
                            if (k <= nz_ - 1) { // Ez: -dy Hx
                                const S d = hx_.data()[s] - hx_.data()[s - sj];
                                S& psi = psi_ez_y_(i, j, k);
                                psi = bn * psi + an * d;
                                ez_(i, j, k) -= dt * inv_eps_z_(i, j, k) * (rk * d + psi);
                            }
                        }
                    }
            }
        }
        if (pml_z_.active()) {
            const auto& ax = pml_z_;
            for (auto [a, b] : ax.node_ranges) {
                const int b_clamped = std::min(b, ztop_primal());
#pragma omp parallel for schedule(static)
                for (int k = a; k <= b_clamped; ++k) {
                    const Real bn = Real(ax.b_node[k]);
                    const Real an = Real(ax.a_node[k]);
                    const Real rk = Real(ax.rk_node[k]);
                    for (int j = 0; j <= ny_; ++j)
                        for (int i = 0; i <= nx_; ++i) {
                            const std::size_t s = ex_.index(i, j, k);
                            if (i <= nx_ - 1) { // Ex: -dz Hy
                                const S d = hy_.data()[s] - hy_.data()[s - sk];
                                S& psi = psi_ex_z_(i, j, k);
                                psi = bn * psi + an * d;
                                ex_(i, j, k) -= dt * inv_eps_x_(i, j, k) * (rk * d + psi);
                            }
                            if (j <= ny_ - 1) { // Ey: +dz Hx
                                const S d = hx_.data()[s] - hx_.data()[s - sk];
                                S& psi = psi_ey_z_(i, j, k);
                                psi = bn * psi + an * d;
                                ey_(i, j, k) += dt * inv_eps_y_(i, j, k) * (rk * d + psi);
                            }
                        }
                }
            }
        }
    }

    void pml_correct_h() {
        const Real dt = Real(dt_);
        const std::size_t sj = ex_.stride_j();
        const std::size_t sk = ex_.stride_k();
        if (pml_x_.active()) {
            const auto& ax = pml_x_;
            for (auto [a, b] : ax.dual_ranges) {
#pragma omp parallel for schedule(static)
                for (int k = 0; k <= ztop_primal(); ++k)
                    for (int j = 0; j <= ny_; ++j)
                        for (int i = a; i <= b; ++i) {
                            const Real bd = Real(ax.b_dual[i]);
                            const Real ad = Real(ax.a_dual[i]);
                            const Real rk = Real(ax.rk_dual[i]);
                            const std::size_t s = ex_.index(i, j, k);
                            if (k <= nz_ - 1) { // Hy: +dx Ez
                                const S d = ez_.data()[s + 1] - ez_.data()[s];
                                S& psi = psi_hy_x_(i, j, k);
                                psi = bd * psi + ad * d;
                                hy_(i, j, k) += dt * (rk * d + psi);
                            }
                            if (j <= ny_ - 1) { // Hz: -dx Ey
                                const S d = ey_.data()[s + 1] - ey_.data()[s];
                                S& psi = psi_hz_x_(i, j, k);
                                psi = bd * psi + ad * d;
                                hz_(i, j, k) -= dt * (rk * d + psi);
                            }
                        }
            }
        }
        if (pml_y_.active()) {
            const auto& ax = pml_y_;
            for (auto [a, b] : ax.dual_ranges) {
#pragma omp parallel for schedule(static)
                for (int k = 0; k <= ztop_primal(); ++k)
                    for (int j = a; j <= b; ++j) {
                        const Real bd = Real(ax.b_dual[j]);
                        const Real ad = Real(ax.a_dual[j]);
                        const Real rk = Real(ax.rk_dual[j]);
                        for (int i = 0; i <= nx_; ++i) {
                            const std::size_t s = ex_.index(i, j, k);
                            if (k <= nz_ - 1) { // Hx: -dy Ez
                                const S d = ez_.data()[s + sj] - ez_.data()[s];
                                S& psi = psi_hx_y_(i, j, k);
                                psi = bd * psi + ad * d;
                                hx_(i, j, k) -= dt * (rk * d + psi);
                            }
                            if (i <= nx_ - 1) { // Hz: +dy Ex
                                const S d = ex_.data()[s + sj] - ex_.data()[s];
                                S& psi = psi_hz_y_(i, j, k);
                                psi = bd * psi + ad * d;
                                hz_(i, j, k) += dt * (rk * d + psi);
                            }
                        }
                    }
            }
        }
        if (pml_z_.active()) {
            const auto& ax = pml_z_;
            for (auto [a, b] : ax.dual_ranges) {
#pragma omp parallel for schedule(static)
                for (int k = a; k <= b; ++k) {
                    const Real bd = Real(ax.b_dual[k]);
                    const Real ad = Real(ax.a_dual[k]);
                    const Real rk = Real(ax.rk_dual[k]);
                    for (int j = 0; j <= ny_; ++j)
                        for (int i = 0; i <= nx_; ++i) {
                            const std::size_t s = ex_.index(i, j, k);
                            if (j <= ny_ - 1) { // Hx: +dz Ey
                                const S d = ey_.data()[s + sk] - ey_.data()[s];
                                S& psi = psi_hx_z_(i, j, k);
                                psi = bd * psi + ad * d;
                                hx_(i, j, k) += dt * (rk * d + psi);
                            }
                            if (i <= nx_ - 1) { // Hy: -dz Ex
                                const S d = ex_.data()[s + sk] - ex_.data()[s];
                                S& psi = psi_hy_z_(i, j, k);
                                psi = bd * psi + ad * d;
                                hy_(i, j, k) -= dt * (rk * d + psi);
                            }
                        }
                }
            }
        }
    }

    void inject_sources(double t) {
        for (const auto& src : cfg_.sources) {
            const double s = src.waveform(t);
            if (s == 0.0) continue;
            const int axis = src.comp == Comp::ex ? 0 : src.comp == Comp::ey ? 1 : 2;
            field(src.comp)(src.i, src.j, src.k) -=
                Real(dt_ * s) * inv_eps(axis)(src.i, src.j, src.k);
        }
        for (const auto& sh : cfg_.sheets) {
            const double s = sh.waveform(t);
            if (s == 0.0) continue;
            const int axis = sh.comp == Comp::ex ? 0 : sh.comp == Comp::ey ? 1 : 2;
            auto& f = field(sh.comp);
            const auto& ie = inv_eps(axis);
            const Real amp = Real(dt_ * s);
            auto apply = [&](int i, int j, int k) { f(i, j, k) -= amp * ie(i, j, k); };
            if (sh.axis == 2) {
                for (int j = 0; j <= ny_; ++j)
                    for (int i = 0; i <= nx_; ++i) apply(i, j, sh.index);
            } else if (sh.axis == 1) {
                for (int k = 0; k <= nz_; ++k)
                    for (int i = 0; i <= nx_; ++i) apply(i, sh.index, k);
            } else {
                for (int k = 0; k <= nz_; ++k)
                    for (int j = 0; j <= ny_; ++j) apply(sh.index, j, k);
            }
        }
    }

    void enforce_pec() {
        auto wall = [&](Side s) {
            return cfg_.boundary[s] == BoundaryKind::pec || cfg_.boundary[s] == BoundaryKind::pml;
        };
        if (wall(x_min))
            for (int k = 0; k <= nz_; ++k)
                for (int j = 0; j <= ny_; ++j) ey_(0, j, k) = ez_(0, j, k) = S{};
        if (wall(x_max))
            for (int k = 0; k <= nz_; ++k)
                for (int j = 0; j <= ny_; ++j) ey_(nx_, j, k) = ez_(nx_, j, k) = S{};
        if (wall(y_min))
            for (int k = 0; k <= nz_; ++k)
                for (int i = 0; i <= nx_; ++i) ex_(i, 0, k) = ez_(i, 0, k) = S{};
        if (wall(y_max))
            for (int k = 0; k <= nz_; ++k)
                for (int i = 0; i <= nx_; ++i) ex_(i, ny_, k) = ez_(i, ny_, k) = S{};
        if (wall(z_min))
            for (int j = 0; j <= ny_; ++j)
                for (int i = 0; i <= nx_; ++i) ex_(i, j, 0) = ey_(i, j, 0) = S{};
        if (wall(z_max))
            for (int j = 0; j <= ny_; ++j)
                for (int i = 0; i <= nx_; ++i) ex_(i, j, nz_) = ey_(i, j, nz_) = S{};
    }

    /// Poynting power through flux plane m, toward +axis, using current E and
    /// the H at its current half-step. Node-sampled in-plane directions get
    /// trapezoid half-weights at the patch edges; dual-sampled ones tile the
    /// patch cells exactly.
    double plane_flux(const FluxPlane& f) const {
        double p = 0.0;
        const int nu = f.axis == 0 ? ny_ : nx_;
        const int nv = f.axis == 2 ? ny_ : nz_;
        const int u0 = f.u0 < 0 ? 0 : f.u0;
        const int u1 = f.u1 < 0 ? nu : f.u1;
        const int v0 = f.v0 < 0 ? 0 : f.v0;
        const int v1 = f.v1 < 0 ? nv : f.v1;
        auto wt = [](int v, int lo, int hi) { return (v == lo || v == hi) ? 0.5 : 1.0; };
        if (f.axis == 1) { // (E x H)_y = Ez Hx - Ex Hz
            const int j = f.index;
            for (int k = v0; k <= v1 - 1; ++k)
                for (int i = u0; i <= u1; ++i)
                    p += wt(i, u0, u1) * product(S(0.5) * (hx_(i, j - 1, k) + hx_(i, j, k)),
                                                 ez_(i, j, k));
            for (int k = v0; k <= v1; ++k)
                for (int i = u0; i <= u1 - 1; ++i)
                    p -= wt(k, v0, v1) * product(S(0.5) * (hz_(i, j - 1, k) + hz_(i, j, k)),
                                                 ex_(i, j, k));
        } else if (f.axis == 0) { // (E x H)_x = Ey Hz - Ez Hy
            const int i = f.index;
            for (int k = v0; k <= v1; ++k)
                for (int j = u0; j <= u1 - 1; ++j)
                    p += wt(k, v0, v1) * product(S(0.5) * (hz_(i - 1, j, k) + hz_(i, j, k)),
                                                 ey_(i, j, k));
            for (int k = v0; k <= v1 - 1; ++k)
                for (int j = u0; j <= u1; ++j)
                    p -= wt(j, u0, u1) * product(S(0.5) * (hy_(i - 1, j, k) + hy_(i, j, k)),
                                                 ez_(i, j, k));
        } else { // (E x H)_z = Ex Hy - Ey Hx
            const int k = f.index;
            for (int j = v0; j <= v1; ++j)
                for (int i = u0; i <= u1 - 1; ++i)
                    p += wt(j, v0, v1) * product(S(0.5) * (hy_(i, j, k - 1) + hy_(i, j, k)),
                                                 ex_(i, j, k));
            for (int j = v0; j <= v1 - 1; ++j)
                for (int i = u0; i <= u1; ++i)
                    p -= wt(i, u0, u1) * product(S(0.5) * (hx_(i, j, k - 1) + hx_(i, j, k)),
                                                 ey_(i, j, k));
        }
        return p;
    }

    void record_flux_pre() {
        for (std::size_t m = 0; m < cfg_.flux_planes.size(); ++m)
            flux_pre_[m] = plane_flux(cfg_.flux_planes[m]);
    }

    void record() {
        for (std::size_t p = 0; p < cfg_.probes.size(); ++p) {
            const auto& pr = cfg_.probes[p];
            probe_series_[p].push_back(field(pr.comp)(pr.i, pr.j, pr.k));
        }
        // Time-centered flux: average of the plane sum before and after the H
        // half-step, pairing E(n+1) with H at the midpoint.
        for (std::size_t m = 0; m < cfg_.flux_planes.size(); ++m)
            flux_series_[m].push_back(0.5 * (flux_pre_[m] + plane_flux(cfg_.flux_planes[m])));
        if (!cfg_.dft.frequencies.empty() && n_ >= cfg_.dft.start_step && n_ <= dft_end_ &&
            (n_ - cfg_.dft.start_step) % cfg_.dft.stride == 0) {
            accumulate_dft();
        }
    }

    void accumulate_dft() {
        const double span = std::max<long>(1, dft_end_ - cfg_.dft.start_step);
        const double u = double(n_ - cfg_.dft.start_step) / span;
        const double w = 0.5 * (1.0 - std::cos(two_pi * u)); // Hann
        const double t = (n_ + 1) * dt_;
        for (std::size_t fq = 0; fq < cfg_.dft.frequencies.size(); ++fq) {
            const double om = two_pi * cfg_.dft.frequencies[fq];
            const std::complex<Real> ph(Real(w * std::cos(om * t)), Real(w * std::sin(om * t)));
            auto add = [&](Field3<std::complex<Real>>& acc, const GhostField3<S>& f) {
#pragma omp parallel for schedule(static)
                for (int k = 0; k <= nz_; ++k)
                    for (int j = 0; j <= ny_; ++j)
                        for (int i = 0; i <= nx_; ++i) {
                            if constexpr (is_complex)
                                acc(i, j, k) += std::complex<Real>(ph * f(i, j, k));
                            else
                                acc(i, j, k) += ph * Real(f(i, j, k));
                        }
            };
            add(dft_ex_[fq], ex_);
            add(dft_ey_[fq], ey_);
            add(dft_ez_[fq], ez_);
            add(dft_hy_[fq], hy_);
        }
    }

    void check_finite() const {
        const double m = max_field_norm();
        if (!std::isfinite(m))
            throw solver_error("instability detected: non-finite field at step " +
                               std::to_string(n_));
    }

    SimulationConfig cfg_;
    int nx_, ny_, nz_;
    double dt_;
    long n_ = 0;
    long dft_end_ = -1;

    GhostField3<S> ex_, ey_, ez_, hx_, hy_, hz_;
    GhostField3<S> hx_prev_, hy_prev_, hz_prev_;
    GhostField3<Real> inv_eps_x_, inv_eps_y_, inv_eps_z_;
    detail::PmlAxis pml_x_, pml_y_, pml_z_;
    Field3<S> psi_ex_y_, psi_ex_z_, psi_ey_x_, psi_ey_z_, psi_ez_x_, psi_ez_y_;
    Field3<S> psi_hx_y_, psi_hx_z_, psi_hy_x_, psi_hy_z_, psi_hz_x_, psi_hz_y_;

    std::vector<std::vector<S>> probe_series_;
    std::vector<std::vector<double>> flux_series_;
    std::vector<double> flux_pre_;
    std::vector<Field3<std::complex<Real>>> dft_ex_, dft_ey_, dft_ez_, dft_hy_;
};

} // namespace tribeam

#endif
