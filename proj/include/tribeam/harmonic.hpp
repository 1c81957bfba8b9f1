// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_HARMONIC_HPP
#define TRIBEAM_HARMONIC_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tribeam/constants.hpp"
#include "tribeam/util.hpp"

namespace tribeam {

/// One decaying sinusoid recovered from a ringdown record.
struct ModeEstimate {
    double frequency = 0.0;  ///< cycles per unit time, same units as 1/dt
    double decay_rate = 0.0; ///< field amplitude rate gamma (1/time)
    double q = 0.0;          ///< omega0 * tau_field / 2 = pi f / gamma
    std::complex<double> amplitude; ///< a e^{i phi} of a cos(2 pi f t + phi) e^{-gamma t}
    double q_cap = 0.0;      ///< pi N f dt: Q at one amplitude e-fold per window
    bool exceeds_cap = false;
    bool crosscheck_done = false;
    double q_dft = 0.0;      ///< Lorentzian-FWHM Q from the DFT power spectrum
    bool low_confidence = false; ///< cross-check disagreed by more than 10%
};

struct HarmonicOptions {
    int max_modes = 12;
    double rel_singular_tol = 1e-7; ///< rank cut relative to the top singular value
    int target_samples = 1536;      ///< decimation aims at this analyzed length
    int max_pencil_rows = 400;
    double min_amplitude_rel = 1e-4; ///< drop modes this far below the strongest
    double crosscheck_tol = 0.10;
};

struct HarmonicResult {
    std::vector<ModeEstimate> modes; ///< sorted by frequency
    bool reduced_order = false;      ///< pencil rank fell short of max_modes
};

namespace detail {

using cd = std::complex<double>;

/// X(f) = sum_n x[n] e^{-2 pi i f dt n}; rectangular window.
template <typename T>
cd goertzel(std::span<const T> x, double dt, double f) {
    const double w = -two_pi * f * dt;
    const cd rot = std::polar(1.0, w);
    cd acc = 0.0, ph = 1.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        acc += ph * cd(x[n]);
        ph *= rot;
    }
    return acc;
}

/// Least-squares Lorentzian A / (1 + ((f-f0)/(G/2))^2) + B on power samples;
/// seeded from the peak and half-power width, refined by Levenberg-Marquardt.
/// Returns false if it cannot produce a positive width.
inline bool fit_power_lorentzian(const std::vector<double>& fs, const std::vector<double>& ps,
                                 double& f0, double& fwhm) {
    const std::size_t n = fs.size();
    std::size_t imax = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (ps[i] > ps[imax]) imax = i;
    double a = ps[imax], b = *std::min_element(ps.begin(), ps.end());
    f0 = fs[imax];
    // half-max crossings for the initial width
    const double half = b + 0.5 * (a - b);
    double lo = fs.front(), hi = fs.back();
    for (std::size_t i = imax; i-- > 0;)
        if (ps[i] < half) {
            const double t = (half - ps[i]) / (ps[i + 1] - ps[i]);
            lo = fs[i] + t * (fs[i + 1] - fs[i]);
            break;
        }
    for (std::size_t i = imax + 1; i < n; ++i)
        if (ps[i] < half) {
            const double t = (half - ps[i - 1]) / (ps[i] - ps[i - 1]);
            hi = fs[i - 1] + t * (fs[i] - fs[i - 1]);
            break;
        }
    fwhm = hi - lo;
    if (!(fwhm > 0.0)) return false;

    Eigen::Vector4d p(a - b, f0, fwhm, b);
    double lambda = 1e-3;
    auto residuals = [&](const Eigen::Vector4d& q, Eigen::VectorXd& r, Eigen::MatrixX4d* J) {
        r.resize(static_cast<long>(n));
        if (J) J->resize(static_cast<long>(n), 4);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (fs[i] - q[1]) / (0.5 * q[2]);
            const double den = 1.0 + u * u;
            r[static_cast<long>(i)] = q[0] / den + q[3] - ps[i];
            if (J) {
                const double d2 = den * den;
                (*J)(static_cast<long>(i), 0) = 1.0 / den;
                (*J)(static_cast<long>(i), 1) = q[0] * 2.0 * u / (0.5 * q[2]) / d2;
                (*J)(static_cast<long>(i), 2) = q[0] * 2.0 * u * u / q[2] / d2;
                (*J)(static_cast<long>(i), 3) = 1.0;
            }
        }
    };
    Eigen::VectorXd r;
    Eigen::MatrixX4d J;
    residuals(p, r, &J);
    double cost = r.squaredNorm();
    for (int it = 0; it < 60; ++it) {
        Eigen::Matrix4d h = J.transpose() * J;
        h.diagonal() *= (1.0 + lambda);
        const Eigen::Vector4d step = h.ldlt().solve(-J.transpose() * r);
        Eigen::Vector4d cand = p + step;
        if (!(cand[2] > 0.0)) {
            lambda *= 10.0;
            continue;
        }
        Eigen::VectorXd rc;
        residuals(cand, rc, nullptr);
        if (rc.squaredNorm() < cost) {
            p = cand;
            cost = rc.squaredNorm();
            lambda = std::max(lambda * 0.3, 1e-12);
            residuals(p, r, &J);
            if (step.norm() < 1e-12 * (1.0 + p.norm())) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    f0 = p[1];
    fwhm = p[2];
    return fwhm > 0.0;
}

template <typename T>
HarmonicResult harmonic_inversion_impl(std::span<const T> x, double dt, double f_lo,
                                       double f_hi, const HarmonicOptions& opt) {
    constexpr bool input_complex = std::is_same_v<T, cd>;
    const std::size_t n_in = x.size();
    if (n_in < 200) throw config_error("harmonic.signal", "need at least 200 samples");
    if (!(dt > 0.0) || !(f_hi > f_lo))
        throw config_error("harmonic.band", "need dt > 0 and f_hi > f_lo");

    HarmonicResult out;
    const double f_mid = 0.5 * (f_lo + f_hi);
    const double bw_samples = 0.5 * (f_hi - f_lo) * dt; // baseband half-width, cycles/sample

    // Heterodyne to baseband, two moving averages of length R, decimate by R.
    // For exponential signals the filter multiplies each mode amplitude by an
    // exactly computable complex gain, undone after the fit.
    int R = static_cast<int>(std::max<std::size_t>(1, n_in / static_cast<std::size_t>(opt.target_samples)));
    if (bw_samples > 1e-12)
        R = std::min<int>(R, std::max(1, static_cast<int>(std::floor(0.35 / bw_samples))));
    if (!input_complex) {
        // A real signal carries the mirror image of every in-band line at
        // -(f + f_mid) in baseband. Decimation may alias that image back into
        // the analysis band where it would surface as a spurious weak mode;
        // shrink R until no image of any in-band frequency lands there.
        const double guard = 0.1 * (f_hi - f_lo);
        while (R > 1) {
            bool collision = false;
            for (int sgrid = 0; sgrid <= 64 && !collision; ++sgrid) {
                const double f = f_lo + (f_hi - f_lo) * sgrid / 64.0;
                const double nu = -(f + f_mid) * dt * R;
                const double wrapped = nu - std::round(nu);
                const double f_rec = f_mid + wrapped / (R * dt);
                collision = f_rec > f_lo - guard && f_rec < f_hi + guard;
            }
            if (!collision) break;
            --R;
        }
    }
    std::vector<cd> base(n_in);
    {
        const cd rot = std::polar(1.0, -two_pi * f_mid * dt);
        cd ph = 1.0;
        for (std::size_t n = 0; n < n_in; ++n) {
            base[n] = ph * cd(x[n]);
            ph *= rot;
        }
    }
    auto moving_average = [&](std::vector<cd>& v) {
        if (R <= 1) return;
        std::vector<cd> acc(v.size() + 1, 0.0);
        for (std::size_t n = 0; n < v.size(); ++n) acc[n + 1] = acc[n] + v[n];
        for (std::size_t n = v.size(); n-- > 0;) {
            const std::size_t m = n + 1 >= static_cast<std::size_t>(R) ? n + 1 - R : 0;
            v[n] = (acc[n + 1] - acc[m]) / double(R);
        }
    };
    moving_average(base);
    moving_average(base);
    const std::size_t n0 = static_cast<std::size_t>(2 * (R - 1)); // fully filled region
    std::vector<cd> y;
    for (std::size_t n = n0; n < n_in; n += static_cast<std::size_t>(R)) y.push_back(base[n]);
    const long ns = static_cast<long>(y.size());
    if (ns < 32) throw config_error("harmonic.signal", "window too short after decimation");

    // Matrix pencil on the Hankel pair Y0/Y1.
    const long L = std::min<long>(opt.max_pencil_rows, ns / 3);
    const long cols = ns - L + 1;
    Eigen::MatrixXcd Y0(L, cols - 1), Y1(L, cols - 1);
    for (long c = 0; c < cols - 1; ++c)
        for (long r = 0; r < L; ++r) {
            Y0(r, c) = y[static_cast<std::size_t>(r + c)];
            Y1(r, c) = y[static_cast<std::size_t>(r + c + 1)];
        }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(Y0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv.size() > 0) || !(sv[0] > 0.0)) return out;
    int rank = 0;
    while (rank < sv.size() && sv[rank] > opt.rel_singular_tol * sv[0]) ++rank;
    const int m = std::min(rank, opt.max_modes);
    out.reduced_order = m < opt.max_modes;
    if (m == 0) return out;

    const Eigen::MatrixXcd U = svd.matrixU().leftCols(m);
    const Eigen::MatrixXcd V = svd.matrixV().leftCols(m);
    const Eigen::VectorXd s = sv.head(m);
    Eigen::MatrixXcd G = U.adjoint() * Y1 * V;
    for (int c = 0; c < m; ++c) G.col(c) /= s[c];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(G);

    // Vandermonde least squares for the baseband amplitudes.
    std::vector<cd> roots;
    for (int j = 0; j < m; ++j) {
        const cd z = eig.eigenvalues()[j];
        if (std::abs(z) < 1e-12 || std::abs(z) > 2.0) continue;
        roots.push_back(z);
    }
    if (roots.empty()) return out;
    Eigen::MatrixXcd Vd(ns, static_cast<long>(roots.size()));
    for (std::size_t j = 0; j < roots.size(); ++j) {
        cd p = 1.0;
        for (long n = 0; n < ns; ++n) {
            Vd(n, static_cast<long>(j)) = p;
            p *= roots[j];
        }
    }
    Eigen::Map<const Eigen::VectorXcd> yv(y.data(), ns);
    const Eigen::VectorXcd c = Vd.colPivHouseholderQr().solve(yv);

    double amp_max = 0.0;
    std::vector<ModeEstimate> modes;
    for (std::size_t j = 0; j < roots.size(); ++j) {
        const cd lnz = std::log(roots[j]);
        const double f = f_mid + lnz.imag() / (two_pi * R * dt);
        const double gamma = -lnz.real() / (R * dt);
        if (f < f_lo || f > f_hi) continue;
        ModeEstimate me;
        me.frequency = f;
        me.decay_rate = gamma;
        // undo heterodyne/filter/decimation-origin on the amplitude
        const cd zeta = std::polar(1.0, two_pi * (f - f_mid) * dt) * std::exp(-gamma * dt);
        cd gain = 1.0;
        if (R > 1) {
            cd g = 0.0, p = 1.0;
            for (int q = 0; q < R; ++q) {
                g += p;
                p /= zeta;
            }
            g /= double(R);
            gain = g * g;
        }
        cd a = c[static_cast<long>(j)] / gain;
        a /= std::pow(zeta, double(n0)); // decimation started at sample n0
        if (!input_complex) a *= 2.0;    // analytic-part convention for real input
        me.amplitude = a;
        amp_max = std::max(amp_max, std::abs(a));
        me.q_cap = pi * double(n_in) * f * dt;
        if (gamma <= 0.0 || pi * f / gamma > 1e3 * me.q_cap) {
            // Non-decaying (or decaying below anything the window can
            // support): report the cap itself rather than a roundoff-driven
            // number.
            me.exceeds_cap = true;
            me.q = me.q_cap;
            me.decay_rate = 0.0;
        } else {
            me.q = pi * f / gamma;
            me.exceeds_cap = me.q > me.q_cap;
        }
        modes.push_back(me);
    }
    // keep significant modes only, then order by frequency
    std::erase_if(modes, [&](const ModeEstimate& me) {
        return std::abs(me.amplitude) < opt.min_amplitude_rel * amp_max;
    });
    std::sort(modes.begin(), modes.end(),
              [](const ModeEstimate& a, const ModeEstimate& b) { return a.frequency < b.frequency; });
    // merge near-duplicates (within half a DFT bin), keeping the stronger
    const double df_merge = 0.5 / (double(n_in) * dt);
    for (std::size_t j = 1; j < modes.size();) {
        if (modes[j].frequency - modes[j - 1].frequency < df_merge) {
            if (std::abs(modes[j].amplitude) > std::abs(modes[j - 1].amplitude))
                modes[j - 1] = modes[j];
            modes.erase(modes.begin() + static_cast<long>(j));
        } else {
            ++j;
        }
    }

    // DFT cross-check where the line is resolvable and isolated.
    const double window = double(n_in) * dt;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        auto& me = modes[j];
        if (me.exceeds_cap || me.decay_rate * window < 3.0) continue;
        const double fw = me.decay_rate / pi; // Lorentzian FWHM in frequency
        const bool isolated =
            (j == 0 || modes[j].frequency - modes[j - 1].frequency > 5.0 * fw) &&
            (j + 1 == modes.size() || modes[j + 1].frequency - modes[j].frequency > 5.0 * fw);
        if (!isolated) continue;
        const int npts = 41;
        std::vector<double> fs(npts), ps(npts);
        for (int q = 0; q < npts; ++q) {
            fs[q] = me.frequency + (q - npts / 2) * (6.0 * fw / npts);
            ps[q] = std::norm(goertzel(x, dt, fs[q]));
        }
        double f0 = 0.0, fwhm = 0.0;
        if (!fit_power_lorentzian(fs, ps, f0, fwhm)) continue;
        me.crosscheck_done = true;
        me.q_dft = f0 / fwhm;
        me.low_confidence = std::fabs(me.q_dft - me.q) > opt.crosscheck_tol * me.q;
    }

    out.modes = std::move(modes);
    return out;
}

} // namespace detail

/// Decompose a post-shutoff ringdown into decaying sinusoids inside
/// [f_lo, f_hi] via a matrix-pencil (ESPRIT-style) fit, cross-checked against
/// a Lorentzian read of the DFT power spectrum.
inline HarmonicResult harmonic_inversion(std::span<const double> signal, double dt,
                                         double f_lo, double f_hi,
                                         const HarmonicOptions& opt = {}) {
    return detail::harmonic_inversion_impl<double>(signal, dt, f_lo, f_hi, opt);
}

inline HarmonicResult harmonic_inversion(std::span<const std::complex<double>> signal,
                                         double dt, double f_lo, double f_hi,
                                         const HarmonicOptions& opt = {}) {
    return detail::harmonic_inversion_impl<std::complex<double>>(signal, dt, f_lo, f_hi, opt);
}

} // namespace tribeam

#endif
