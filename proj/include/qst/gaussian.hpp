#pragma once

#include <algorithm>
#include <cmath>

#include "qst/common.hpp"

// Closed-form Gaussian (covariance-matrix) treatment of zero-mean single-mode
// degraded squeezed states: S(xi) rho_thermal S(xi)^dag with xi = r e^{i 2
// theta}. Conventions used throughout the library:
//
//   hbar = 1,  x = (a + a^dag)/sqrt(2),  vacuum variance 1/2.
//
// Every function here is a pure total function of its value arguments.

namespace qst {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// The three estimated state parameters: squeezing magnitude r >= 0,
/// squeezing-axis angle theta canonicalized into [0, pi), and environmental
/// mean thermal photon number nbar >= 0.
struct StateParams {
    double r = 0.0;
    double theta = 0.0;
    double nbar = 0.0;

    /// Canonicalize: clamp tiny negative r/nbar from floating-point noise,
    /// wrap theta into [0, pi). The covariance is invariant under
    /// theta -> theta + pi, so the wrap loses nothing.
    static StateParams make(double r, double theta, double nbar) {
        StateParams p;
        p.r = std::max(r, 0.0);
        p.nbar = std::max(nbar, 0.0);
        double t = std::fmod(theta, kPi);
        if (t < 0) t += kPi;
        if (t >= kPi) t = 0.0; // fmod rounding can land exactly on pi
        p.theta = t;
        return p;
    }
};

/// 2x2 real symmetric covariance matrix over the (x, p) quadratures.
struct Covariance {
    double xx = 0.5;
    double xp = 0.0;
    double pp = 0.5;

    double det() const { return xx * pp - xp * xp; }
};

/// Squeezing/anti-squeezing noise levels in dB relative to vacuum.
/// squeezing_db counts noise *reduction* below vacuum (positive when
/// squeezed); antisqueezing_db counts excess noise above vacuum.
struct DbLevels {
    double squeezing_db = 0.0;
    double antisqueezing_db = 0.0;
};

/// V = R(theta) diag((nbar+1/2)e^{-2r}, (nbar+1/2)e^{+2r}) R(theta)^T.
/// det(V) = (nbar + 1/2)^2.
inline Covariance covariance_from_params(const StateParams& p) {
    const double vmin = (p.nbar + 0.5) * std::exp(-2.0 * p.r);
    const double vmax = (p.nbar + 0.5) * std::exp(+2.0 * p.r);
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    Covariance v;
    v.xx = vmin * c * c + vmax * s * s;
    v.pp = vmin * s * s + vmax * c * c;
    v.xp = (vmax - vmin) * s * c;
    return v;
}

/// Variance of the rotated quadrature x cos(phi) + p sin(phi):
/// (nbar+1/2)(e^{-2r} cos^2(phi-theta) + e^{+2r} sin^2(phi-theta)).
inline double quadrature_variance(const StateParams& p, double phi) {
    const double c = std::cos(phi - p.theta), s = std::sin(phi - p.theta);
    return (p.nbar + 0.5) * (std::exp(-2.0 * p.r) * c * c + std::exp(2.0 * p.r) * s * s);
}

inline DbLevels db_from_params(const StateParams& p) {
    const double vmin = (p.nbar + 0.5) * std::exp(-2.0 * p.r);
    const double vmax = (p.nbar + 0.5) * std::exp(+2.0 * p.r);
    return {-10.0 * std::log10(vmin / 0.5), 10.0 * std::log10(vmax / 0.5)};
}

/// Inverse of db_from_params: V_min = 1/2 10^{-S/10}, V_max = 1/2 10^{+A/10},
/// nbar + 1/2 = sqrt(V_min V_max), r = ln(V_max/V_min)/4.
/// Rejects A < S (that would mean det V < 1/4, an unphysical state).
inline StateParams params_from_db(const DbLevels& d, double theta) {
    if (d.antisqueezing_db < d.squeezing_db)
        throw Error("params_from_db: antisqueezing_db < squeezing_db is unphysical");
    const double vmin = 0.5 * std::pow(10.0, -d.squeezing_db / 10.0);
    const double vmax = 0.5 * std::pow(10.0, +d.antisqueezing_db / 10.0);
    const double nbar = std::sqrt(vmin * vmax) - 0.5;
    const double r = 0.25 * std::log(vmax / vmin);
    return StateParams::make(r, theta, nbar);
}

struct PhotonTriple {
    double n_total = 0.0; // mean photon number of the state
    double n_pure = 0.0;  // sinh^2(r): the squeezing contribution
    double n_env = 0.0;   // thermal contribution from the environment
};

/// n_total = (nbar+1/2) cosh(2r) - 1/2; n_pure = sinh^2(r);
/// n_env = n_total - n_pure. All are >= 0 and n_env = 0 iff nbar = 0.
inline PhotonTriple photon_decomposition(const StateParams& p) {
    PhotonTriple t;
    t.n_total = (p.nbar + 0.5) * std::cosh(2.0 * p.r) - 0.5;
    t.n_pure = std::sinh(p.r) * std::sinh(p.r);
    t.n_env = t.n_total - t.n_pure;
    return t;
}

/// Uhlmann fidelity of two zero-mean single-mode Gaussian states, closed
/// form: F = 1/(sqrt(Delta + delta) - sqrt(delta)) with
/// Delta = det(V_a + V_b), delta = 4 (det V_a - 1/4)(det V_b - 1/4).
inline double gaussian_fidelity(const StateParams& a, const StateParams& b) {
    const Covariance va = covariance_from_params(a);
    const Covariance vb = covariance_from_params(b);
    const Covariance sum{va.xx + vb.xx, va.xp + vb.xp, va.pp + vb.pp};
    const double big = sum.det();
    const double small = std::max(0.0, 4.0 * (va.det() - 0.25) * (vb.det() - 0.25));
    const double f = 1.0 / (std::sqrt(big + small) - std::sqrt(small));
    return std::min(f, 1.0);
}

/// Gaussian Wigner density W(x, p) = exp(-xi^T V^{-1} xi / 2) / (2 pi
/// sqrt(det V)); strictly positive everywhere.
inline double wigner_gaussian(const StateParams& p, double x, double pq) {
    const Covariance v = covariance_from_params(p);
    const double det = v.det();
    // V^{-1} = [[pp, -xp], [-xp, xx]] / det
    const double quad = (v.pp * x * x - 2.0 * v.xp * x * pq + v.xx * pq * pq) / det;
    return std::exp(-0.5 * quad) / (2.0 * kPi * std::sqrt(det));
}

/// Homodyne outcome density at local-oscillator phase phi: a zero-mean
/// normal with variance quadrature_variance(p, phi).
inline double marginal_pdf(const StateParams& p, double phi, double x) {
    const double var = quadrature_variance(p, phi);
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * kPi * var);
}

} // namespace qst
