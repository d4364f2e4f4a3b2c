#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qst/common.hpp"
#include "qst/gaussian.hpp"

// Truncated Fock-basis numerics: the brute-force counterpart of the Gaussian
// closed forms and the reconstruction backend. Density matrices are dim x dim
// complex matrices over photon-number levels 0..dim-1.
//
// Accuracy regime certified by the test suite: squeezing <= 10 dB, nbar <= 1,
// dim >= 128. Truncation deficits are reported, never silently renormalized.

namespace qst::fock {

using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

struct DensityMatrix {
    int dim = 0;
    ComplexMatrix data;
};

/// 1 - Re tr(rho): the probability mass lost to truncation.
inline double trace_deficit(const DensityMatrix& rho) {
    return 1.0 - rho.data.trace().real();
}

/// Explicit renormalization (display helper; nothing in the library calls
/// this implicitly).
inline DensityMatrix normalized(const DensityMatrix& rho) {
    DensityMatrix out = rho;
    out.data /= rho.data.trace().real();
    return out;
}

/// Annihilation operator: a[n-1, n] = sqrt(n).
inline ComplexMatrix annihilation_matrix(int dim) {
    if (dim < 2) throw Error("annihilation_matrix: dim must be >= 2");
    ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

namespace detail {

/// exp(G) by scaling-and-squaring with a Taylor kernel. The generator norm
/// grows like r*dim, so the scaling count comes from the 1-norm.
inline ComplexMatrix expm(const ComplexMatrix& g) {
    const double norm1 = g.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    const ComplexMatrix b = g / std::pow(2.0, squarings);

    const int dim = static_cast<int>(g.rows());
    ComplexMatrix sum = ComplexMatrix::Identity(dim, dim);
    ComplexMatrix term = ComplexMatrix::Identity(dim, dim);
    // ||b|| <= 1/2, so ~25 terms reach double precision
    for (int k = 1; k <= 32; ++k) {
        term = (term * b) / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

} // namespace detail

/// Squeezing operator S(xi) = exp((conj(xi) a^2 - xi a^dag^2)/2) with
/// xi = r e^{i 2 theta}, built by matrix exponential of the truncated
/// generator. Approximately unitary on the leading dim/2 block.
inline ComplexMatrix squeeze_operator(double r, double theta, int dim) {
    if (dim < 16) throw Error("squeeze_operator: dim must be >= 16");
    if (r > 1.5) throw Error("squeeze_operator: r > 1.5 is outside the truncation-sound range");
    const Complex xi = std::polar(r, 2.0 * theta);
    const ComplexMatrix a = annihilation_matrix(dim);
    const ComplexMatrix a2 = a * a;
    const ComplexMatrix gen = 0.5 * (std::conj(xi) * a2 - xi * a2.adjoint());
    return detail::expm(gen);
}

/// Thermal state: diagonal p_n = nbar^n / (nbar+1)^{n+1}. Truncation leaves
/// a trace deficit of (nbar/(nbar+1))^dim.
inline DensityMatrix thermal_state(double nbar, int dim) {
    if (nbar < 0) throw Error("thermal_state: nbar must be >= 0");
    DensityMatrix rho{dim, ComplexMatrix::Zero(dim, dim)};
    if (nbar == 0.0) {
        rho.data(0, 0) = 1.0;
        return rho;
    }
    const double ratio = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    for (int n = 0; n < dim; ++n) {
        rho.data(n, n) = p;
        p *= ratio;
    }
    return rho;
}

/// rho = S(xi) rho_thermal S(xi)^dag. Emits a structured warning when the
/// truncation deficit exceeds 1e-4; the matrix is returned as computed.
inline DensityMatrix density_from_params(const StateParams& p, int dim) {
    const ComplexMatrix s = squeeze_operator(p.r, p.theta, dim);
    const DensityMatrix th = thermal_state(p.nbar, dim);
    DensityMatrix rho{dim, ComplexMatrix::Zero(dim, dim)};
    rho.data = s * th.data * s.adjoint();
    const double deficit = trace_deficit(rho);
    if (deficit > 1e-4)
        log::warn("density_from_params: trace deficit %.3e at dim=%d (r=%.4f nbar=%.4f)",
                  deficit, dim, p.r, p.nbar);
    return rho;
}

/// Tr(rho diag(0..dim-1)).
inline double mean_photon(const DensityMatrix& rho) {
    double sum = 0.0;
    for (int n = 0; n < rho.dim; ++n) sum += n * rho.data(n, n).real();
    return sum;
}

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via Hermitian
/// eigendecomposition; eigenvalues below zero are clamped to zero.
inline double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim != sigma.dim) throw Error("uhlmann_fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho.data + rho.data.adjoint()));
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const ComplexMatrix sqrt_rho =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    const ComplexMatrix inner = sqrt_rho * sigma.data * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es2(0.5 * (inner + inner.adjoint()));
    const double tr = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return tr * tr;
}

/// Wigner function of rho at one phase-space point, by the associated-
/// Laguerre series with the standard stable recurrences:
///
///   W = (e^{-u}/pi) sum_k mult_k Re[ (sqrt2 (x-ip))^k / sqrt(k!) *
///         sum_n rho_{n,n+k} (-1)^n sqrt(n! k!/(n+k)!) L_n^{(k)}(2u) ]
///
/// with u = x^2 + p^2, mult_0 = 1, mult_{k>0} = 2 (Hermitian pairing of the
/// +-k diagonals). The (x-ip) orientation pairs with the e^{+i n phi} phase
/// convention of quadrature_pdf_fock, so rotated-state marginals come out
/// along the right axis. Every factor is kept bounded: the prefactor chain
/// carries e^{-u}, so no intermediate overflows for |x|, |p| <= 8.
inline double wigner_fock_point(const DensityMatrix& rho, double x, double p) {
    const int dim = rho.dim;
    const double u = x * x + p * p;
    const double z = 2.0 * u;
    const Complex step = std::sqrt(2.0) * Complex(x, -p);

    Complex base = std::exp(-u); // base_k = e^{-u} (sqrt2 (x+ip))^k / sqrt(k!)
    double w = 0.0;
    for (int k = 0; k < dim; ++k) {
        // skip empty diagonals (parity states have every other one zero)
        double diag_mag = 0.0;
        for (int n = 0; n + k < dim; ++n) diag_mag += std::norm(rho.data(n, n + k));
        if (diag_mag > 0.0) {
            double l_prev = 0.0, l_cur = 1.0; // L_{-1}, L_0
            double q = 1.0;                   // sqrt(n! k! / (n+k)!)
            double sign = 1.0;
            Complex acc = 0.0;
            for (int n = 0; n + k < dim; ++n) {
                acc += sign * q * l_cur * rho.data(n, n + k);
                const double l_next = ((2.0 * n + k + 1.0 - z) * l_cur - (n + k) * l_prev) / (n + 1.0);
                l_prev = l_cur;
                l_cur = l_next;
                q *= std::sqrt((n + 1.0) / (n + 1.0 + k));
                sign = -sign;
            }
            const Complex term = base * acc;
            w += (k == 0) ? term.real() : 2.0 * term.real();
        }
        base *= step / std::sqrt(k + 1.0);
    }
    return w / kPi;
}

/// Batch evaluation over a list of (x, p) points. Points are independent, so
/// the result does not depend on evaluation order.
inline std::vector<double> wigner_fock(const DensityMatrix& rho,
                                       const std::vector<std::pair<double, double>>& grid) {
    std::vector<double> out(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        out[i] = wigner_fock_point(rho, grid[i].first, grid[i].second);
    return out;
}

namespace detail {

/// Harmonic-oscillator eigenfunctions psi_0..psi_{dim-1} at x, by the
/// normalized three-term recurrence (numerically stable for |x| <= 10).
inline void oscillator_eigenfunctions(int dim, double x, std::vector<double>& psi) {
    psi.resize(dim);
    psi[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (dim > 1) psi[1] = std::sqrt(2.0) * x * psi[0];
    for (int n = 1; n + 1 < dim; ++n)
        psi[n + 1] = std::sqrt(2.0 / (n + 1.0)) * x * psi[n] -
                     std::sqrt(n / (n + 1.0)) * psi[n - 1];
}

} // namespace detail

/// Homodyne outcome density p(x | phi) = sum_{m,n} rho_{mn} e^{i(n-m)phi}
/// psi_m(x) psi_n(x); equals Re(c^dag rho c) with c_n = psi_n(x) e^{i n phi}.
inline double quadrature_pdf_fock(const DensityMatrix& rho, double phi, double x) {
    std::vector<double> psi;
    detail::oscillator_eigenfunctions(rho.dim, x, psi);
    Eigen::VectorXcd c(rho.dim);
    for (int n = 0; n < rho.dim; ++n) c(n) = std::polar(psi[n], n * phi);
    const Complex val = c.adjoint() * rho.data * c;
    return val.real();
}

} // namespace qst::fock
