#include "qrt/special_functions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "qrt/errors.hpp"

namespace qrt {

namespace {

// erfi(x) * sqrt(pi)/2 by its all-positive Maclaurin series; no cancellation.
double half_sqrtpi_erfi_series(double x)
{
    if (x < 0.0) return -half_sqrtpi_erfi_series(-x);
    const double x2 = x * x;
    double term = x;  // x^{2n+1}/n!
    double sum = x;
    for (int n = 1; n < 400; ++n) {
        term *= x2 / n;
        const double add = term / (2 * n + 1);
        sum += add;
        if (add < 1e-17 * sum) break;
    }
    return sum;
}

// Continued fraction of Laplace type, fast for |x| >= 4.
double dawson_cf(double x)
{
    const double x2 = x * x;
    double t = 0.0;
    for (int n = 200; n >= 1; --n) t = 4.0 * n * x2 / ((2 * n + 1) + 2 * x2 - t);
    return x / (1 + 2 * x2 - t);
}

}  // namespace

double dawson(double x)
{
    const double ax = std::fabs(x);
    if (ax < 4.0) return std::exp(-x * x) * half_sqrtpi_erfi_series(x);
    return dawson_cf(x);
}

double erfi(double x)
{
    if (!(std::fabs(x) <= 25.0)) {
        std::ostringstream os;
        os << "erfi: argument " << x << " exceeds the overflow guard |x| <= 25";
        throw NumericalError(os.str());
    }
    if (std::fabs(x) < 4.0) return 2.0 / std::sqrt(std::numbers::pi) * half_sqrtpi_erfi_series(x);
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(x * x) * dawson_cf(x);
}

double erfc(double x) { return std::erfc(x); }

double elliptic_K(double k)
{
    if (!(k >= 0.0 && k < 1.0)) throw ConfigError("elliptic_K: modulus must satisfy 0 <= k < 1");
    double a = 1.0;
    double b = std::sqrt((1.0 - k) * (1.0 + k));
    for (int it = 0; it < 64; ++it) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
        if (std::fabs(a - b) <= 1e-16 * a) break;
    }
    return std::numbers::pi / (a + b);
}

JacobiSnCnDn jacobi_sn_cn_dn(double u, double k)
{
    if (!(k >= 0.0 && k < 1.0)) throw ConfigError("jacobi_sn_cn_dn: modulus must satisfy 0 <= k < 1");
    if (k == 0.0) return {std::sin(u), std::cos(u), 1.0};

    // Descending Landen / AGM sequence.
    std::vector<double> a{1.0}, c{k};
    double b = std::sqrt((1.0 - k) * (1.0 + k));
    while (std::fabs(c.back()) > 1e-16 * a.back() && a.size() < 64) {
        const double an = 0.5 * (a.back() + b);
        const double cn = 0.5 * (a.back() - b);
        b = std::sqrt(a.back() * b);
        a.push_back(an);
        c.push_back(cn);
    }
    const std::size_t n = a.size() - 1;
    double phi = std::ldexp(a[n] * u, static_cast<int>(n));
    for (std::size_t j = n; j >= 1; --j) phi = 0.5 * (phi + std::asin(c[j] / a[j] * std::sin(phi)));
    const double sn = std::sin(phi);
    const double cn = std::cos(phi);
    // dn^2 = k'^2 + k^2 cn^2 avoids the 0/0 of the Landen quotient at u = K
    const double dn = std::sqrt((1.0 - k) * (1.0 + k) + k * k * cn * cn);
    return {sn, cn, dn};
}

}  // namespace qrt
