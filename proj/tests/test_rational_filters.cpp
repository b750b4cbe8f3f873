#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "qrt/errors.hpp"
#include "qrt/hamiltonians.hpp"
#include "qrt/odmd.hpp"
#include "qrt/rational_filters.hpp"

using namespace qrt;

namespace {

// Coefficients of prod (x - r_i), lowest degree first.
std::vector<cplx> poly_from_roots(const std::vector<cplx>& roots)
{
    std::vector<cplx> p{1.0};
    for (const cplx& r : roots) {
        std::vector<cplx> q(p.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            q[i + 1] += p[i];
            q[i] -= r * p[i];
        }
        p = q;
    }
    return p;
}

cplx horner(const std::vector<cplx>& p, cplx x)
{
    cplx acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    std::vector<cplx> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// sum_k c_k/(z_k - w) as N(w)/D(w) by explicit expansion.
cplx ratio_oracle(const RationalSpec& s, cplx w)
{
    std::vector<cplx> poles;
    for (const auto& t : s.terms) poles.push_back(t.pole);
    const std::vector<cplx> D = poly_from_roots(poles);
    std::vector<cplx> N(poles.size(), 0.0);
    for (std::size_t k = 0; k < poles.size(); ++k) {
        std::vector<cplx> others;
        for (std::size_t j = 0; j < poles.size(); ++j)
            if (j != k) others.push_back(poles[j]);
        // 1/(z_k - w) = -1/(w - z_k)
        const std::vector<cplx> part = poly_from_roots(others);
        for (std::size_t i = 0; i < part.size(); ++i) N[i] -= s.terms[k].coeffs[0] * part[i];
    }
    return horner(N, w) / horner(D, w);
}

double sup_error(const ZolotarevFilter& z, int n)
{
    double worst = 0.0;
    const double l0 = std::log(z.omega_bar);
    for (int i = 0; i < n; ++i) {
        const double w = std::exp(l0 - l0 * i / (n - 1.0));
        worst = std::max(worst, std::fabs(zolotarev_eval(z, w) - 1.0));
    }
    return worst;
}

}  // namespace

TEST_CASE("contour discretization")
{
    const RationalSpec fig1 = discretize_contour(-1.0, 1.0, 8, [](cplx) { return cplx(1.0); });
    CHECK(count_real_poles(fig1) == 2);
    CHECK(fig1.terms.size() == 8);
    CHECK(fig1.total_multiplicity() == 8);

    const RationalSpec one = discretize_contour({0.3, 0.1}, 0.5, 16, [](cplx) { return cplx(1.0); });
    CHECK(std::abs(eval_rational_scalar(one, {0.3, 0.1}) - 1.0) < 1e-10);

    const auto ex = [](cplx z) { return std::exp(z); };
    const RationalSpec e = discretize_contour(0.0, 2.0, 32, ex);
    for (cplx w : {cplx(0.0), cplx(0.5, -0.3), cplx(-0.8, 0.2)}) CHECK(std::abs(eval_rational_scalar(e, w) - std::exp(w)) < 1e-8);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = -1.5;
    d(1, 1) = -0.5;
    const RationalSpec em = discretize_contour(-1.0, 1.5, 32, ex);
    CHECK(oracle::max_abs(eval_rational_matrix(em, HermitianOperator(d)) - oracle::expm(d)) < 1e-8);

    // exponential decay of the contour error in K
    double prev = 1.0;
    for (int K : {8, 16, 32}) {
        const double err = std::abs(eval_rational_scalar(discretize_contour(0.0, 2.0, K, ex), 0.5) - std::exp(0.5));
        CHECK(err < prev * 0.05);
        prev = err;
    }
    CHECK_THROWS_AS(discretize_contour(0.0, 1.0, 1, ex), ConfigError);
    CHECK_THROWS_AS(discretize_contour(0.0, 1.0, 4, [](cplx) { return cplx(INFINITY); }), NumericalError);
}

TEST_CASE("rational evaluation")
{
    RationalSpec s;
    s.terms.push_back({cplx(0.0, 1.0), {1.0}});
    CHECK(std::abs(eval_rational_scalar(s, 0.0) - cplx(0.0, -1.0)) < 1e-15);
    s.polynomial_part = {1.0};
    CHECK(std::abs(eval_rational_scalar(s, 0.0) - cplx(1.0, -1.0)) < 1e-15);
    CHECK_THROWS_AS(eval_rational_scalar(s, cplx(0.0, 1.0)), NumericalError);

    HermitianOperator op(oracle::random_hermitian(4, 2));
    RationalSpec sq;
    sq.terms.push_back({cplx(0.1, 0.4), {0.0, 2.0}});
    const CMatrix R = oracle::resolvent_lu(op.matrix(), {0.1, 0.4});
    CHECK(oracle::max_abs(eval_rational_matrix(sq, op) - 2.0 * R * R) < 1e-10);
}

TEST_CASE("partial fractions agree with numerator/denominator expansion")
{
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int K = 1; K <= 5; ++K) {
        RationalSpec s;
        for (int k = 0; k < K; ++k) s.terms.push_back({cplx(u(rng), 0.2 + std::fabs(u(rng))), {cplx(u(rng), u(rng))}});
        for (int i = 0; i < 50; ++i) {
            const cplx w(u(rng), 0.1 * u(rng));
            CHECK(std::abs(eval_rational_scalar(s, w) - ratio_oracle(s, w)) < 1e-10);
        }
    }
}

TEST_CASE("Zolotarev filter construction")
{
    const ZolotarevFilter z = zolotarev(4, 0.1);
    double cs = 0.0;
    for (int k = 0; k < 4; ++k) {
        cs += z.c[k];
        CHECK(z.c[k] > 0.0);
        CHECK(z.b[k] > 0.0);
        if (k > 0) CHECK(z.b[k] > z.b[k - 1]);
    }
    CHECK(cs == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 100; ++i) {
        const double w = -1.0 + 2.0 * i / 99.0;
        CHECK(zolotarev_eval(z, -w) == -zolotarev_eval(z, w));
    }
    CHECK(sup_error(z, 100000) <= z.err_bound);
    CHECK(sup_error(z, 100000) == doctest::Approx(z.err).epsilon(1e-6));

    // the spec form reproduces the real formula
    const RationalSpec s = zolotarev_spec(z);
    for (double w : {-0.7, -0.1, 0.05, 0.3, 0.99}) CHECK(std::abs(eval_rational_scalar(s, w) - zolotarev_eval(z, w)) < 1e-13);

    const EquioscillationReport rep = equioscillation(z);
    CHECK(2 * rep.alternations >= 2 * 4 + 2);
    CHECK(rep.min_abs >= 0.99 * rep.max_abs);
    for (std::size_t i = 1; i < rep.values.size(); ++i) CHECK(rep.values[i] * rep.values[i - 1] < 0.0);

    CHECK_THROWS_AS(zolotarev(0, 0.1), ConfigError);
    CHECK_THROWS_AS(zolotarev(4, 1.0), ConfigError);
}

TEST_CASE("Zolotarev error decays as the bound predicts")
{
    const ZolotarevFilter z4 = zolotarev(4, 0.1), z8 = zolotarev(8, 0.1);
    const double measured = sup_error(z4, 100000) / sup_error(z8, 100000);
    const double predicted = z4.err_bound / z8.err_bound;
    INFO("measured ratio " << measured << " predicted " << predicted);
    // the measured error squares faster than the bound; check the direction and magnitude
    CHECK(measured >= predicted / 3.0);
    CHECK(zolotarev_err_bound(4, 0.1) == doctest::Approx(4.0 * std::exp(-4.0 * std::numbers::pi * std::numbers::pi / (2.0 * std::log(40.0)))));
}

TEST_CASE("mean mixture width is independent of K")
{
    const double g4 = zolotarev_mean_gamma(zolotarev(4, 0.2));
    const double g8 = zolotarev_mean_gamma(zolotarev(8, 0.2));
    CHECK(g4 == doctest::Approx(g8).epsilon(0.05));
}

TEST_CASE("Moebius gap")
{
    const MoebiusGap g = moebius_gap(-1.0, -0.3, 0.3, 1.0);
    CHECK(g.omega_bar == doctest::Approx(0.3).epsilon(1e-12));
    for (double x : {-1.0, -0.3, 0.3, 1.0}) CHECK(g.map.apply(x) == doctest::Approx(x).epsilon(1e-12));

    const double wa = -1.0, wb = -0.5, wc = 0.1, wd = 1.0;
    const MoebiusGap h = moebius_gap(wa, wb, wc, wd);
    const double w = h.omega_bar;
    CHECK(h.map.apply(wa) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(h.map.apply(wb) == doctest::Approx(-w).epsilon(1e-12));
    CHECK(h.map.apply(wc) == doctest::Approx(w).epsilon(1e-12));
    CHECK(h.map.apply(wd) == doctest::Approx(1.0).epsilon(1e-12));
    const double cr = (wc - wa) * (wd - wb) / ((wc - wb) * (wd - wa));
    CHECK((1.0 + w) * (1.0 + w) / (4.0 * w) == doctest::Approx(cr).epsilon(1e-12));
    CHECK_THROWS_AS(moebius_gap(0.0, -1.0, 0.5, 1.0), ConfigError);
}

TEST_CASE("step filter")
{
    const ZolotarevFilter z = zolotarev(4, 0.1);
    const double E = -0.2;
    const RationalSpec s = step_filter(z, E, -1.0, 1.0);
    const double dE = step_filter_delta(z, -1.0, 1.0);
    CHECK(dE == doctest::Approx(0.1));
    CHECK(std::abs(eval_rational_scalar(s, E - 5.0 * dE) - 1.0) <= z.err);
    CHECK(std::abs(eval_rational_scalar(s, E + 5.0 * dE)) <= z.err);
    for (double w : {-0.9, -0.4, 0.0, 0.6})
        CHECK(std::abs(eval_rational_scalar(s, w) - 0.5 * (1.0 - zolotarev_eval(z, w - E))) < 1e-13);
    CHECK_THROWS_AS(step_filter(z, 2.0, -1.0, 1.0), ConfigError);
}

TEST_CASE("Chebyshev step baseline")
{
    const ChebyshevSeries c0 = chebyshev_step(0, 0.0);
    CHECK(c0.eval(0.3) == doctest::Approx(0.5).epsilon(1e-12));
    // residual decreases with degree
    auto l2 = [](const ChebyshevSeries& c) {
        return oracle::integrate([&c](double th) {
            const double x = std::cos(th);
            const double f = x < 0.0 ? 1.0 : 0.0;
            return (c.eval(x) - f) * (c.eval(x) - f);
        }, 0.0, std::numbers::pi, 1e-9);
    };
    CHECK(l2(chebyshev_step(16, 0.0)) < l2(chebyshev_step(8, 0.0)));
    // Clenshaw against the direct cosine sum
    const ChebyshevSeries c8 = chebyshev_step(8, 0.1);
    for (double x : {-0.9, 0.0, 0.45}) {
        double s = 0.0;
        for (int n = 0; n <= 8; ++n) s += c8.coeffs[n] * std::cos(n * std::acos(x));
        CHECK(c8.eval(x) == doctest::Approx(s).epsilon(1e-13));
    }
}

TEST_CASE("stochastic Zolotarev")
{
    const ZolotarevFilter z = zolotarev(4, 0.2);
    RVector grid = RVector::LinSpaced(21, -1.0, 1.0);
    const GaussianMixturePlan p = zolotarev_stochastic(z, {8}, 8, 5);
    CHECK(p.components.size() == 64u);
    CHECK(p.kind == MixtureKind::StochasticZolotarev);
    const RVector a = stochastic_sign_values(p, grid);
    CHECK(a.size() == 21);
    // deterministic under a pinned seed
    CHECK((stochastic_sign_values(zolotarev_stochastic(z, {8}, 8, 5), grid) - a).norm() == 0.0);

    // many unbiased samples approach the exact filter
    const int trials = 400;
    RVector mean = RVector::Zero(grid.size()), sq = RVector::Zero(grid.size());
    for (int t = 0; t < trials; ++t) {
        const RVector v = stochastic_sign_values(zolotarev_stochastic(z, {1}, 64, 100 + t, true), grid);
        mean += v;
        sq += v.cwiseAbs2();
    }
    mean /= trials;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const double var = sq[i] / trials - mean[i] * mean[i];
        const double se = std::sqrt(std::max(var, 1e-30) / trials);
        CHECK(std::fabs(mean[i] - zolotarev_eval(z, grid[i])) <= 3.5 * se + 1e-12);
    }
}

TEST_CASE("iterative composition")
{
    const ZolotarevFilter z = zolotarev(2, 0.2);
    const double Em = -1.0, Ep = 1.0, E = -0.3;
    const RationalSpec base = step_filter(z, E, Em, Ep);
    const double xi = composition_ratio(E, step_filter_delta(z, Em, Ep), Em, Ep);

    const RationalSpec d0 = compose_iterative(base, xi, 0, Em);
    for (double w : {-0.8, 0.0, 0.7}) CHECK(std::abs(eval_rational_scalar(d0, w) - eval_rational_scalar(base, w)) < 1e-14);

    for (int n : {4, 8}) {
        const CMatrix h = oracle::random_hermitian(n, 40 + n);
        const HermitianOperator op(h);
        for (int D : {1, 2}) {
            const RationalSpec c = compose_iterative(base, xi, D, Em);
            CHECK(c.terms.size() == static_cast<std::size_t>((D + 1) * base.terms.size()));
            CHECK(oracle::max_abs(eval_rational_matrix(c, op) - oracle::composed_product(base, xi, D, Em, h)) < 1e-9);
        }
    }

    const RationalSpec c3 = compose_iterative(step_filter(zolotarev(4, 0.1), E, Em, Ep), xi, 3, Em);
    CHECK(c3.terms.size() == 32u);
    for (double w : {-0.95, -0.5, 0.2, 0.9})
        CHECK(std::abs(eval_rational_scalar(c3, w) - eval_composed_direct(step_filter(zolotarev(4, 0.1), E, Em, Ep), xi, 3, Em, w)) <
              1e-10);
}

TEST_CASE("composition narrows the pass band")
{
    SpinModelConfig cfg;
    cfg.model = ModelKind::MFIM;
    cfg.sites = 4;
    const HermitianOperator op = build(cfg).total;
    const RVector& ev = op.eigenvalues();
    const double Em = -1.0, Ep = 1.0;
    const ZolotarevFilter z = zolotarev(4, 0.1);
    const double dE = step_filter_delta(z, Em, Ep);
    const double target = 0.5 * (ev[0] + ev[1]);
    const double E = composed_threshold(target, 2, dE, Em, Ep);
    const double xi = composition_ratio(E, dE, Em, Ep);
    CHECK(Em + xi * xi * (E - Em) == doctest::Approx(target).epsilon(1e-10));
    const RationalSpec c = compose_iterative(step_filter(z, E, Em, Ep), xi, 2, Em);
    const CVector v = eval_rational_spectral(c, ev);
    const double w = xi * xi * dE;
    REQUIRE(ev[0] < target - w);
    CHECK(std::abs(v[0] - 1.0) < 1e-2);
    for (Eigen::Index i = 1; i < ev.size(); ++i)
        if (ev[i] > target + w) CHECK(std::abs(v[i]) < 1e-2);
}

TEST_CASE("range reduction")
{
    CHECK(spectral_range_reduction(0.5, 3) == doctest::Approx(0.125));
    CHECK(spectral_range_reduction(0.5, 0) == 1.0);
    const int D = depth_for_range(0.5, 0.05, -1.0, 1.0);
    CHECK(spectral_range_reduction(0.5, D) <= 0.05 / 2.0);
    CHECK(spectral_range_reduction(0.5, D - 1) > 0.05 / 2.0);
}
