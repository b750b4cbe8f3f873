#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qrt/errors.hpp"
#include "qrt/special_functions.hpp"

using namespace qrt;

namespace {

double dawson_oracle(double x)
{
    return oracle::integrate([x](double t) { return std::exp((t - x) * (t + x)); }, 0.0, x, 1e-14);
}

double elliptic_K_oracle(double k)
{
    return oracle::integrate(
        [k](double th) { return 1.0 / std::sqrt(1.0 - k * k * std::sin(th) * std::sin(th)); }, 0.0,
        0.5 * std::numbers::pi, 1e-14);
}

// Incomplete F(phi, k) inverted by bisection on the oracle integral.
double amplitude_oracle(double u, double k)
{
    double lo = 0.0, hi = std::numbers::pi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double F = oracle::integrate(
            [k](double th) { return 1.0 / std::sqrt(1.0 - k * k * std::sin(th) * std::sin(th)); }, 0.0, mid, 1e-14);
        (F < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("dawson matches direct quadrature")
{
    for (double x : {-7.5, -3.9, -1.0, -0.25, 0.0, 1e-3, 0.5, 1.0, 2.0, 3.99, 4.01, 6.0, 12.0}) {
        const double ref = dawson_oracle(x);
        CHECK(dawson(x) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("dawson is odd and decays like 1/(2x)")
{
    for (double x : {0.3, 2.5, 5.0, 40.0}) CHECK(dawson(-x) == -dawson(x));
    CHECK(dawson(1e6) == doctest::Approx(0.5e-6).epsilon(1e-10));
    CHECK(dawson(0.0) == 0.0);
}

TEST_CASE("erfi is 2/sqrt(pi) e^{x^2} F(x) and guards overflow")
{
    for (double x : {-2.0, -0.3, 0.0, 0.7, 3.0, 10.0}) {
        const double ref = 2.0 / std::sqrt(std::numbers::pi) * std::exp(x * x) * dawson_oracle(x);
        CHECK(erfi(x) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(erfi(1.0) == doctest::Approx(1.6504257587975428).epsilon(1e-14));
    CHECK_THROWS_AS(erfi(26.0), NumericalError);
    CHECK(qrt::erfc(0.0) == 1.0);
    CHECK(qrt::erfc(1.0) == std::erfc(1.0));
}

TEST_CASE("complete elliptic K")
{
    CHECK(elliptic_K(0.0) == doctest::Approx(0.5 * std::numbers::pi).epsilon(1e-15));
    CHECK(elliptic_K(1.0 / std::sqrt(2.0)) == doctest::Approx(1.8540746773013719).epsilon(1e-14));
    for (double k : {0.1, 0.5, 0.9, 0.99, 0.99875}) CHECK(elliptic_K(k) == doctest::Approx(elliptic_K_oracle(k)).epsilon(1e-11));
}

TEST_CASE("Jacobi sn cn dn")
{
    for (double k : {0.0, 0.3, 0.8, 0.995}) {
        const double K = elliptic_K(k);
        for (double frac : {0.05, 0.3, 0.5, 0.77, 1.0}) {
            const double u = frac * K;
            const JacobiSnCnDn j = jacobi_sn_cn_dn(u, k);
            CHECK(j.sn * j.sn + j.cn * j.cn == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(j.dn * j.dn + k * k * j.sn * j.sn == doctest::Approx(1.0).epsilon(1e-14));
            const double phi = amplitude_oracle(u, k);
            CHECK(j.sn == doctest::Approx(std::sin(phi)).epsilon(1e-11));
            CHECK(j.cn == doctest::Approx(std::cos(phi)).epsilon(1e-11).scale(1.0));
        }
        CHECK(jacobi_sn_cn_dn(K, k).sn == doctest::Approx(1.0).epsilon(1e-13));
    }
    const JacobiSnCnDn z = jacobi_sn_cn_dn(0.7, 0.0);
    CHECK(z.sn == doctest::Approx(std::sin(0.7)).epsilon(1e-15));
    CHECK(z.dn == doctest::Approx(1.0));
}
