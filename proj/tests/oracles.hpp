// oracles.hpp: slow, independent reference computations for the unit tests.
#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "qrt/rational_filters.hpp"

namespace oracle {

using cplx = std::complex<double>;

template <class F>
auto simpson_rec(const F& f, double a, double b, decltype(f(0.0)) fa, decltype(f(0.0)) fm, decltype(f(0.0)) fb,
                 decltype(f(0.0)) whole, double tol, int depth) -> decltype(f(0.0))
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const auto flm = f(lm), frm = f(rm);
    const auto left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const auto right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const auto diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson quadrature, real or complex integrand. The tolerance is
// relative to a coarse 64-panel estimate of the integral magnitude.
template <class F>
auto integrate(const F& f, double a, double b, double rtol = 1e-13, int depth = 24) -> decltype(f(0.0))
{
    double mag = 0.0;
    for (int i = 0; i <= 64; ++i) mag += std::abs(f(a + (b - a) * i / 64.0));
    mag *= std::fabs(b - a) / 65.0;
    using R = decltype(f(0.0));
    if (mag == 0.0) return R(0.0);
    // split into 64 panels so the top-level estimate resolves narrow peaks
    R acc = R(0.0);
    for (int i = 0; i < 64; ++i) {
        const double lo = a + (b - a) * i / 64.0, hi = a + (b - a) * (i + 1) / 64.0;
        const double m = 0.5 * (lo + hi);
        const auto fa = f(lo), fm = f(m), fb = f(hi);
        const auto whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        acc += simpson_rec(f, lo, hi, fa, fm, fb, whole, rtol * mag / 64.0, depth);
    }
    return acc;
}

// Scaling-and-squaring Taylor exponential of a general complex matrix.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a)
{
    const double nrm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int s = 0;
    while (nrm / std::ldexp(1.0, s) > 0.25) ++s;
    const Eigen::MatrixXcd x = a / std::ldexp(1.0, s);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    Eigen::MatrixXcd acc = term;
    for (int k = 1; k < 30; ++k) {
        term = term * x / static_cast<double>(k);
        acc += term;
    }
    for (int i = 0; i < s; ++i) acc = acc * acc;
    return acc;
}

inline Eigen::MatrixXcd random_hermitian(int n, std::uint64_t seed, double scale = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cplx(nd(rng), nd(rng));
    Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    // spectral norm via the singular values of an independent decomposition
    const double nrm = Eigen::JacobiSVD<Eigen::MatrixXcd>(h).singularValues()(0);
    return h * (scale / nrm);
}

// (z - H)^{-1} by LU solve against the identity.
inline Eigen::MatrixXcd resolvent_lu(const Eigen::MatrixXcd& h, cplx z)
{
    const Eigen::Index n = h.rows();
    const Eigen::MatrixXcd a = z * Eigen::MatrixXcd::Identity(n, n) - h;
    return a.fullPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// int rho_mix(gamma|b) phi_g(q; gamma) dgamma with gamma = s^2.
inline double laplace_gaussian(double q, double b)
{
    const double smax = std::sqrt(90.0) / b;
    const double pi = 3.14159265358979323846;
    return integrate(
        [&](double s) {
            if (s == 0.0) return 0.0;
            const double rho = 0.5 * b * b * std::exp(-0.5 * b * b * s * s);
            return rho * 2.0 / std::sqrt(2.0 * pi) * std::exp(-q * q / (2.0 * s * s));
        },
        0.0, smax, 1e-12);
}

// Simple-pole spec applied to a matrix through LU resolvents and powers.
inline Eigen::MatrixXcd rational_on_matrix(const qrt::RationalSpec& spec, const Eigen::MatrixXcd& h)
{
    const Eigen::Index n = h.rows();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(n, n);
    for (const cplx& beta : spec.polynomial_part) {
        out += beta * pw;
        pw = pw * h;
    }
    for (const auto& t : spec.terms) out += t.coeffs[0] * resolvent_lu(h, t.pole);
    return out;
}

// prod_{d=0}^{D} base((H - Em)/xi^d + Em) as an explicit matrix product.
inline Eigen::MatrixXcd composed_product(const qrt::RationalSpec& base, double xi, int D, double Em,
                                         const Eigen::MatrixXcd& h)
{
    const Eigen::Index n = h.rows();
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd acc = I;
    for (int d = 0; d <= D; ++d) acc = acc * rational_on_matrix(base, (h - Em * I) / std::pow(xi, d) + Em * I);
    return acc;
}

}  // namespace oracle
