#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qrt/errors.hpp"
#include "qrt/hamiltonians.hpp"
#include "qrt/quadrature.hpp"
#include "qrt/resolvent_discrete.hpp"

using namespace qrt;

namespace {

const SpectralInterval kUnit{-1.0, 1.0};

SplitHamiltonian mfim(int L)
{
    SpinModelConfig c;
    c.sites = L;
    return build(c);
}

double probe_max_error(const LCUPlan& plan, cplx z, int m, double lo, double hi, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double lam = u(rng);
        worst = std::max(worst, std::abs(plan_scalar(plan, lam) - std::pow(z - lam, -m)));
    }
    return worst;
}

}  // namespace

TEST_CASE("pole classification")
{
    CHECK(classify_pole({0.0, 1.0}, 1, kUnit).cls == PoleClass::ComplexUpper);
    CHECK(classify_pole({0.0, -1.0}, 1, kUnit).cls == PoleClass::ComplexLower);
    CHECK(classify_pole(-1.1, 1, kUnit).cls == PoleClass::RealOutside);
    CHECK(classify_pole(0.2, 1, kUnit).cls == PoleClass::RealInside);
    CHECK(pole_a_minus(-1.1, kUnit) == doctest::Approx(0.1));
    CHECK(pole_a_plus(-1.1, kUnit) == doctest::Approx(2.1));
    CHECK(pole_a_plus({-0.8, 0.1}, kUnit) == doctest::Approx(1.8));
}

TEST_CASE("plan metrics")
{
    LCUPlan p;
    p.times = {0.0};
    p.weights = {1.0};
    PlanMetrics m = plan_metrics(p);
    CHECK(m.t_max == 0.0);
    CHECK(m.t_tot == 0.0);
    CHECK(m.J == 1);
    p.times = {1.0, 2.0, 3.0};
    p.weights = {1.0, 1.0, 1.0};
    m = plan_metrics(p);
    CHECK(m.t_max == 3.0);
    CHECK(m.t_tot == 6.0);
    CHECK(m.J == 3);

    // the truncation T is 168.112; Legendre nodes stay strictly inside [0, T]
    const LCUPlan leg = plan_complex_pole({-0.8, 0.1}, 1e-6, kUnit);
    CHECK(std::fabs(leg.meta.T - 168.112) < 1e-3);
    CHECK(plan_metrics(leg).t_max < leg.meta.T);
    CHECK(plan_metrics(leg).t_max > 0.999 * leg.meta.T);
}

TEST_CASE("complex pole plans: scalar probes")
{
    const cplx z(0.0, 1.0);
    for (ComplexRule r : {ComplexRule::Legendre, ComplexRule::Trapezoidal, ComplexRule::Laguerre}) {
        const LCUPlan p = plan_complex_pole(z, 1e-6, kUnit, std::nullopt, r);
        CHECK(std::abs(plan_scalar(p, 0.0) - cplx(0.0, -1.0)) < 1e-6);
        CHECK(probe_max_error(p, z, 1, -1.0, 1.0, 1) < 1e-6);
        CHECK(p.times.size() == p.weights.size());
        for (std::size_t j = 1; j < p.times.size(); ++j) CHECK(p.times[j] >= p.times[j - 1]);
    }
    const cplx w(-0.8, 0.1);
    CHECK(probe_max_error(plan_complex_pole(w, 1e-6, kUnit), w, 1, -1.0, 1.0, 2) < 1e-6);
    CHECK_THROWS_AS(plan_complex_pole({0.0, -1.0}, 1e-6, kUnit), ConfigError);
    CHECK_THROWS_AS(plan_complex_pole(z, 2.0, kUnit), ConfigError);
}

TEST_CASE("Legendre weights follow the mapped rule")
{
    const cplx z(-0.3, 0.5);
    const LCUPlan p = plan_complex_pole(z, 1e-6, kUnit, 12);
    const double T = tmax_complex(0.5, 1e-6);
    const QuadratureRule q = gauss_legendre(12);
    for (int j = 0; j < 12; ++j) {
        const double t = 0.5 * T * (1.0 + q.nodes[j]);
        const cplx x = cplx(0.0, -1.0) * (0.5 * T) * q.weights[j] * std::exp(cplx(-0.5 * t, -0.3 * t));
        CHECK(p.times[j] == doctest::Approx(t).epsilon(1e-14));
        CHECK(std::abs(p.weights[j] - x) < 1e-14);
    }
}

TEST_CASE("Legendre converges exponentially, trapezoidal quadratically")
{
    const SplitHamiltonian s = mfim(4);
    const RVector& E = s.total.eigenvalues();
    const cplx z(-0.8, 0.25);
    auto target = [z](double e) { return 1.0 / (z - e); };
    std::vector<double> lerr;
    for (int J = 36; J <= 60; J += 4)
        lerr.push_back(plan_error_spectral(plan_complex_pole(z, 1e-12, kUnit, J), E, target));
    // past the onset and above the truncation floor the slope in log(error)
    // per node is at least log(sqrt2)
    int checked = 0;
    for (std::size_t i = 1; i < lerr.size(); ++i) {
        if (lerr[i] < 1e-11) break;
        INFO("legendre " << lerr[i - 1] << " -> " << lerr[i]);
        CHECK(std::log(lerr[i - 1] / lerr[i]) / 4.0 >= std::log(std::sqrt(2.0)));
        ++checked;
    }
    CHECK(checked >= 2);
    double prev = 0.0;
    for (int J : {64, 128, 256}) {
        const double e = plan_error_spectral(plan_complex_pole(z, 1e-12, kUnit, J, ComplexRule::Trapezoidal), E, target);
        if (prev > 0.0) CHECK(prev / e == doctest::Approx(4.0).epsilon(0.25));
        prev = e;
    }
}

TEST_CASE("conjugate pole through the adjoint")
{
    const SplitHamiltonian s = mfim(3);
    const cplx z(0.2, 0.3);
    const LCUPlan p = plan_complex_pole(z, 1e-8, kUnit);
    const CMatrix r = evaluate_plan_exact(p, s.total);
    CHECK(opnorm2(CMatrix(r.adjoint()) - resolvent_exact(s.total, std::conj(z))) < 1e-8);
}

TEST_CASE("real pole plans")
{
    const LCUPlan p = plan_real_pole(-1.0 - 0.5, kUnit, 1e-6);
    CHECK(probe_max_error(p, -1.5, 1, -1.0, 1.0, 3) < 1e-6);
    const LCUPlan above = plan_real_pole(1.4, kUnit, 1e-6);
    CHECK(probe_max_error(above, 1.4, 1, -1.0, 1.0, 4) < 1e-6);

    const LCUPlan m1 = plan_real_pole(-1.0, {-0.5, 1.0}, 1e-6);
    CHECK(std::abs(plan_scalar(m1, 0.0) + 1.0) < 1e-6);

    for (YRule y : {YRule::Legendre, YRule::Hermite}) {
        RealPoleOptions o;
        o.y_rule = y;
        const LCUPlan q = plan_real_pole(-1.5, kUnit, 1e-5, o);
        CHECK(probe_max_error(q, -1.5, 1, -1.0, 1.0, 5) < 1e-5);
    }
    RealPoleOptions tt;
    tt.q_rule = QRule::Trapezoidal;
    tt.L_q = 400;
    tt.L_y = 64;
    const LCUPlan t = plan_real_pole(-1.5, kUnit, 1e-4, tt);
    CHECK(t.meta.L_q == 400);
    CHECK(t.meta.y_rule == to_string(YRule::Trapezoidal));
    CHECK_THROWS_AS(plan_real_pole(0.3, kUnit, 1e-6), ConfigError);
}

TEST_CASE("merging duplicate times leaves the sum unchanged")
{
    RealPoleOptions o;
    o.L_y = 21;
    o.L_q = 10;
    const LCUPlan merged = plan_real_pole(-1.2, kUnit, 1e-4, o);
    // symmetric trapezoidal y nodes with y = 0 collapse to one zero time
    CHECK(merged.times.size() < 21u * 10u);
    LCUPlan dup;
    dup.times = {0.5, 0.1, 0.5, -0.2, 0.1};
    dup.weights = {{1, 2}, {0.5, 0}, {-1, 1}, {0, 1}, {2, -3}};
    const LCUPlan m = merge_duplicate_times(dup);
    CHECK(m.times == std::vector<double>{-0.2, 0.1, 0.5});
    for (double lam : {-0.7, 0.0, 0.9}) CHECK(std::abs(plan_scalar(m, lam) - plan_scalar(dup, lam)) < 1e-14);
}

TEST_CASE("repeated poles")
{
    const cplx z(0.0, 1.0);
    const LCUPlan two = plan_repeated_pole(z, 2, 1e-6, kUnit);
    CHECK(std::abs(plan_scalar(two, 0.0) + 1.0) < 1e-6);
    CHECK(probe_max_error(two, z, 2, -1.0, 1.0, 6) < 1e-6);

    const LCUPlan one = plan_repeated_pole(z, 1, 1e-6, kUnit);
    const LCUPlan simple = plan_complex_pole(z, 1e-6, kUnit);
    CHECK(one.times == simple.times);
    CHECK(one.weights == simple.weights);

    const CMatrix h = oracle::random_hermitian(8, 21);
    HermitianOperator op(h);
    const cplx w(0.3, 0.5);
    const LCUPlan three = plan_repeated_pole(w, 3, 1e-7, kUnit);
    const CMatrix R = oracle::resolvent_lu(h, w);
    CHECK(opnorm2(evaluate_plan_exact(three, op) - R * R * R) < 1e-6);

    // Gamma(m, b) survival at T_m equals eps b^m / 2
    const double b = 0.4, T = tmax_repeated(b, 3, 1e-6);
    const double x = b * T;
    CHECK(std::exp(-x) * (1.0 + x + 0.5 * x * x) == doctest::Approx(1e-6 * std::pow(b, 3) / 2.0).epsilon(1e-9));
}

TEST_CASE("Predicted Legendre count is sufficient on MFIM L=4")
{
    const SplitHamiltonian s = mfim(4);
    const RVector& E = s.total.eigenvalues();
    const SpectralInterval iv{E[0], E[E.size() - 1]};
    for (double eps : {1e-3, 1e-6}) {
        for (int k = 1; k <= 5; ++k) {
            const cplx z(-0.8, std::ldexp(1.0, -k));
            const LCUPlan p = plan_complex_pole(z, eps, iv);
            INFO("eps=" << eps << " k=" << k);
            CHECK(plan_error_spectral(p, E, [z](double e) { return 1.0 / (z - e); }) < eps);
        }
    }
}

TEST_CASE("exact and Trotter evaluation agree to O(eps)")
{
    const SplitHamiltonian s = mfim(3);
    const cplx z(-0.8, 0.5);
    const double eps = 1e-4;
    const LCUPlan p = plan_complex_pole(z, eps, kUnit);
    const double dt = eps / plan_metrics(p).t_max;
    const CMatrix ex = evaluate_plan(p, s, {PropagatorKind::Exact, {}});
    const CMatrix tr = evaluate_plan(p, s, {PropagatorKind::Trotter, TrotterConfig{dt}});
    CHECK(opnorm2(ex - tr) < 10.0 * eps);
    CHECK(opnorm2(ex - resolvent_exact(s.total, z)) < eps);

    LCUPlan single;
    single.times = {0.0};
    single.weights = {2.5};
    HermitianOperator one(CMatrix::Constant(1, 1, 0.3));
    CHECK(std::abs(evaluate_plan_exact(single, one)(0, 0) - 2.5) < 1e-15);
}
