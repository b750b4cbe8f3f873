#include "qrt/rational_filters.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qrt/errors.hpp"
#include "qrt/special_functions.hpp"

namespace qrt {

std::size_t RationalSpec::total_multiplicity() const
{
    std::size_t m = 0;
    for (const auto& t : terms) m += t.coeffs.size();
    return m;
}

// ----- partial fractions -----

RationalSpec discretize_contour(cplx center, double radius, int K, const std::function<cplx(cplx)>& f)
{
    if (K < 2) throw ConfigError("discretize_contour: K must be >= 2");
    if (!(radius > 0.0)) throw ConfigError("discretize_contour: radius must be positive");
    RationalSpec spec;
    spec.label = "contour";
    for (int k = 0; k < K; ++k) {
        cplx z = center + radius * std::polar(1.0, 2.0 * std::numbers::pi * k / K);
        if (std::fabs(z.imag()) < 1e-12) z = {z.real(), 0.0};
        const cplx fz = f(z);
        if (!std::isfinite(fz.real()) || !std::isfinite(fz.imag())) {
            std::ostringstream os;
            os << "discretize_contour: f is not finite at node " << z;
            throw NumericalError(os.str());
        }
        spec.terms.push_back({z, {fz * (z - center) / static_cast<double>(K)}});
    }
    return spec;
}

int count_real_poles(const RationalSpec& spec)
{
    int n = 0;
    for (const auto& t : spec.terms)
        if (std::fabs(t.pole.imag()) < 1e-12) ++n;
    return n;
}

cplx eval_rational_scalar(const RationalSpec& spec, cplx omega)
{
    cplx acc = 0.0;
    for (const auto& t : spec.terms) {
        const cplx d = t.pole - omega;
        if (std::abs(d) < 1e-10) {
            std::ostringstream os;
            os << "eval_rational: evaluation point " << omega << " collides with pole " << t.pole;
            throw NumericalError(os.str());
        }
        const cplx inv = 1.0 / d;
        cplx p = inv;
        for (const cplx& c : t.coeffs) {
            acc += c * p;
            p *= inv;
        }
    }
    cplx wp = 1.0;
    for (const cplx& beta : spec.polynomial_part) {
        acc += beta * wp;
        wp *= omega;
    }
    return acc;
}

CVector eval_rational_spectral(const RationalSpec& spec, const RVector& energies)
{
    CVector out(energies.size());
    for (Eigen::Index n = 0; n < energies.size(); ++n) out[n] = eval_rational_scalar(spec, energies[n]);
    return out;
}

CMatrix eval_rational_matrix(const RationalSpec& spec, const HermitianOperator& op)
{
    const Eigen::Index n = op.dim();
    CMatrix acc = CMatrix::Zero(n, n);
    for (const auto& t : spec.terms) {
        for (std::size_t m = 0; m < t.coeffs.size(); ++m) {
            if (t.coeffs[m] == cplx(0.0)) continue;
            acc += t.coeffs[m] * resolvent_power_exact(op, t.pole, static_cast<int>(m) + 1);
        }
    }
    CMatrix hp = CMatrix::Identity(n, n);
    for (const cplx& beta : spec.polynomial_part) {
        acc += beta * hp;
        hp = hp * op.matrix();
    }
    return acc;
}

// ----- Zolotarev -----

double zolotarev_err_bound(int K, double omega_bar)
{
    return 4.0 * std::exp(-K * std::numbers::pi * std::numbers::pi / (2.0 * std::log(4.0 / omega_bar)));
}

double zolotarev_eval(const ZolotarevFilter& z, double omega)
{
    double acc = 0.0;
    for (int k = 0; k < z.K; ++k) acc += z.c[k] * omega / (omega * omega + z.b[k] * z.b[k]);
    return 2.0 * z.gamma_K * acc;
}

namespace {

double golden_extremum(const std::function<double(double)>& f, double lo, double hi, bool maximize)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto val = [&](double x) { return maximize ? -f(x) : f(x); };
    double a = lo, b = hi;
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = val(x1), f2 = val(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::fabs(b)); ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = val(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = val(x2);
        }
    }
    return 0.5 * (a + b);
}

// Local extrema of f on [lo, hi] on a log-spaced grid, refined.
void local_extrema(const std::function<double(double)>& f, double lo, double hi, int n, std::vector<double>& xs,
                   std::vector<double>& vs)
{
    std::vector<double> grid(n), val(n);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < n; ++i) {
        grid[i] = std::exp(llo + (lhi - llo) * i / (n - 1.0));
        val[i] = f(grid[i]);
    }
    grid.front() = lo;
    grid.back() = hi;
    val.front() = f(lo);
    val.back() = f(hi);
    xs.assign(1, lo);
    vs.assign(1, val.front());
    for (int i = 1; i + 1 < n; ++i) {
        const bool is_max = val[i] >= val[i - 1] && val[i] > val[i + 1];
        const bool is_min = val[i] <= val[i - 1] && val[i] < val[i + 1];
        if (!is_max && !is_min) continue;
        const double x = golden_extremum(f, grid[i - 1], grid[i + 1], is_max);
        xs.push_back(x);
        vs.push_back(f(x));
    }
    xs.push_back(hi);
    vs.push_back(val.back());
}

}  // namespace

EquioscillationReport equioscillation(const ZolotarevFilter& z)
{
    EquioscillationReport rep;
    auto e = [&z](double x) { return zolotarev_eval(z, x) - 1.0; };
    std::vector<double> xs, vs;
    local_extrema(e, z.omega_bar, 1.0, 40001, xs, vs);
    double top = 0.0;
    for (double v : vs) top = std::max(top, std::fabs(v));
    // keep extrema at the common level; tiny wiggles at roundoff are ignored
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::fabs(vs[i]) < 0.5 * top) continue;
        if (!rep.values.empty() && (rep.values.back() > 0) == (vs[i] > 0)) {
            if (std::fabs(vs[i]) > std::fabs(rep.values.back())) {
                rep.values.back() = vs[i];
                rep.points.back() = xs[i];
            }
            continue;
        }
        rep.points.push_back(xs[i]);
        rep.values.push_back(vs[i]);
    }
    rep.alternations = static_cast<int>(rep.values.size());
    rep.max_abs = 0.0;
    rep.min_abs = top;
    for (double v : rep.values) {
        rep.max_abs = std::max(rep.max_abs, std::fabs(v));
        rep.min_abs = std::min(rep.min_abs, std::fabs(v));
    }
    return rep;
}

ZolotarevFilter zolotarev(int K, double omega_bar)
{
    if (K < 1 || K > 64) throw ConfigError("zolotarev: K must lie in [1, 64]");
    if (!(omega_bar > 0.0 && omega_bar < 1.0)) throw ConfigError("zolotarev: omega_bar must lie in (0, 1)");
    const double kappa = std::sqrt((1.0 - omega_bar) * (1.0 + omega_bar));
    const double Kp = elliptic_K(kappa);
    std::vector<double> cc(2 * K);  // cc[i] for i = 1 .. 2K-1
    for (int i = 1; i < 2 * K; ++i) {
        const JacobiSnCnDn j = jacobi_sn_cn_dn(i * Kp / (2.0 * K), kappa);
        cc[i] = omega_bar * omega_bar * j.sn * j.sn / (j.cn * j.cn);
    }
    // x prod_j (x^2 + cc[2j]) / prod_k (x^2 + cc[2k-1]) in partial fractions
    std::vector<double> R(K);
    for (int k = 1; k <= K; ++k) {
        const double ck = cc[2 * k - 1];
        double logmag = 0.0;
        int sign = 1;
        for (int j = 1; j < K; ++j) {
            const double num = cc[2 * j] - ck;
            logmag += std::log(std::fabs(num));
            if (num < 0) sign = -sign;
        }
        for (int j = 1; j <= K; ++j) {
            if (j == k) continue;
            const double den = cc[2 * j - 1] - ck;
            logmag -= std::log(std::fabs(den));
            if (den < 0) sign = -sign;
        }
        R[k - 1] = sign * std::exp(logmag);
    }
    ZolotarevFilter z;
    z.K = K;
    z.omega_bar = omega_bar;
    double sumR = 0.0;
    for (int k = 0; k < K; ++k) {
        z.b.push_back(std::sqrt(cc[2 * k + 1]));
        sumR += R[k];
    }
    for (int k = 0; k < K; ++k) z.c.push_back(R[k] / sumR);

    // unscaled odd function f = sum R_k x/(x^2+b_k^2); centre its range on 1
    z.gamma_K = 0.5;
    std::vector<double> xs, vs;
    local_extrema([&z](double x) { return zolotarev_eval(z, x); }, omega_bar, 1.0, 40001, xs, vs);
    const double fmax = *std::max_element(vs.begin(), vs.end());
    const double fmin = *std::min_element(vs.begin(), vs.end());
    z.gamma_K = 0.5 * 2.0 / (fmax + fmin);
    z.err = (fmax - fmin) / (fmax + fmin);
    z.err_bound = zolotarev_err_bound(K, omega_bar);

    const EquioscillationReport rep = equioscillation(z);
    z.alternations = 2 * rep.alternations;
    if (z.err >= 1e-12) {
        if (rep.alternations < K + 1 || rep.min_abs < 0.99 * rep.max_abs) {
            std::ostringstream os;
            os << "zolotarev: equioscillation certificate failed for K=" << K << ", omega_bar=" << omega_bar << " ("
               << rep.alternations << " alternations, extrema ratio " << rep.min_abs / rep.max_abs << ")";
            throw NumericalError(os.str());
        }
    }
    return z;
}

RationalSpec zolotarev_spec(const ZolotarevFilter& z)
{
    RationalSpec spec;
    spec.label = "zolotarev";
    for (int k = 0; k < z.K; ++k) {
        const cplx coef = -z.gamma_K * z.c[k];
        spec.terms.push_back({cplx(0.0, z.b[k]), {coef}});
        spec.terms.push_back({cplx(0.0, -z.b[k]), {coef}});
    }
    return spec;
}

double zolotarev_mean_gamma(const ZolotarevFilter& z)
{
    double m = 0.0;
    for (int k = 0; k < z.K; ++k) m += z.c[k] * 2.0 / (z.b[k] * z.b[k]);
    return m;
}

// ----- step filter -----

double step_filter_delta(const ZolotarevFilter& z, double E_minus, double E_plus)
{
    return z.omega_bar * 0.5 * (E_plus - E_minus);
}

RationalSpec step_filter(const ZolotarevFilter& z, double E, double E_minus, double E_plus)
{
    if (!(E_plus > E_minus)) throw ConfigError("step_filter: require E_minus < E_plus");
    if (E < E_minus || E > E_plus) throw ConfigError("step_filter: threshold E must lie within the spectral bounds");
    const double s = 0.5 * (E_plus - E_minus);
    if (z.omega_bar * s > s) throw ConfigError("step_filter: transition width exceeds the spectral half-range");
    RationalSpec spec;
    spec.label = "step";
    spec.polynomial_part = {0.5};
    for (int k = 0; k < z.K; ++k) {
        const cplx coef = 0.5 * z.gamma_K * s * z.c[k];
        spec.terms.push_back({cplx(E, s * z.b[k]), {coef}});
        spec.terms.push_back({cplx(E, -s * z.b[k]), {coef}});
    }
    return spec;
}

double ChebyshevSeries::eval(double x) const
{
    // Clenshaw
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t n = coeffs.size(); n-- > 1;) {
        const double b0 = 2.0 * x * b1 - b2 + coeffs[n];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + (coeffs.empty() ? 0.0 : coeffs[0]);
}

ChebyshevSeries chebyshev_step(int degree, double E)
{
    if (degree < 0) throw ConfigError("chebyshev_step: degree must be >= 0");
    constexpr int N = 2048;
    ChebyshevSeries s;
    s.coeffs.assign(degree + 1, 0.0);
    for (int k = 0; k < N; ++k) {
        const double th = std::numbers::pi * (k + 0.5) / N;
        const double x = std::cos(th);
        const double f = x < E ? 1.0 : (x > E ? 0.0 : 0.5);
        for (int n = 0; n <= degree; ++n) s.coeffs[n] += f * std::cos(n * th);
    }
    for (int n = 0; n <= degree; ++n) s.coeffs[n] *= (n == 0 ? 1.0 : 2.0) / N;
    return s;
}

// ----- stochastic Zolotarev -----

GaussianMixturePlan zolotarev_stochastic(const ZolotarevFilter& z, const std::vector<int>& per_pole_G, int N_MC,
                                         std::uint64_t seed, bool unbiased_inner)
{
    if (N_MC < 1) throw ConfigError("zolotarev_stochastic: N_MC must be >= 1");
    if (static_cast<int>(per_pole_G.size()) != z.K && per_pole_G.size() != 1)
        throw ConfigError("zolotarev_stochastic: per_pole_G must have 1 or K entries");
    double csum = 0.0;
    for (double c : z.c) csum += c;
    if (std::fabs(csum - 1.0) > 1e-12) throw ConfigError("zolotarev_stochastic: residues must sum to 1");

    std::vector<double> cdf(z.K);
    double run = 0.0;
    for (int k = 0; k < z.K; ++k) cdf[k] = (run += z.c[k]);
    std::mt19937_64 rng(seed);

    GaussianMixturePlan plan;
    plan.kind = MixtureKind::StochasticZolotarev;
    plan.pole = {cplx(0.0, z.b.front()), 1, PoleClass::ComplexUpper};
    plan.seed = seed;
    plan.shift = 0.0;
    for (int alpha = 0; alpha < N_MC; ++alpha) {
        const double u = uniform01(rng);
        int k = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        k = std::min(k, z.K - 1);
        const int G = per_pole_G.size() == 1 ? per_pole_G[0] : per_pole_G[k];
        if (G < 1) throw ConfigError("zolotarev_stochastic: G_k must be >= 1");
        const double b = z.b[k];
        const cplx w = -z.gamma_K / (N_MC * b * G);
        for (int j = 1; j <= G; ++j) {
            double g;
            if (unbiased_inner)
                g = -2.0 / (b * b) * std::log1p(-uniform01(rng));
            else
                g = -2.0 / (b * b) * std::log((1.0 + 2.0 * (j - 1)) / (2.0 * G));
            plan.components.push_back({g, w, 0.0, b});
        }
    }
    return plan;
}

RVector stochastic_sign_values(const GaussianMixturePlan& plan, const RVector& energies)
{
    const CVector a = mixture_values(plan, energies);
    return 2.0 * a.imag();
}

// ----- composition -----

double spectral_range_reduction(double xi, int D)
{
    if (!(xi > 0.0 && xi < 1.0) || D < 0) throw ConfigError("spectral_range_reduction: require 0 < xi < 1, D >= 0");
    return std::pow(xi, D);
}

int depth_for_range(double xi, double delta_E, double E_minus, double E_plus)
{
    if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("depth_for_range: require 0 < xi < 1");
    if (!(delta_E > 0.0) || !(E_plus > E_minus)) throw ConfigError("depth_for_range: invalid range");
    const double r = delta_E / (E_plus - E_minus);
    if (r >= 1.0) return 0;
    return static_cast<int>(std::ceil(std::log(r) / std::log(xi) - 1e-12));
}

namespace {

RationalSpec scaled_level(const RationalSpec& base, double s, double E_minus)
{
    RationalSpec out;
    out.polynomial_part = base.polynomial_part;
    for (const auto& t : base.terms) out.terms.push_back({E_minus + s * (t.pole - E_minus), {s * t.coeffs[0]}});
    return out;
}

RationalSpec multiply(const RationalSpec& P, const RationalSpec& Q)
{
    const cplx cp = P.polynomial_part.empty() ? cplx(0.0) : P.polynomial_part[0];
    const cplx cq = Q.polynomial_part.empty() ? cplx(0.0) : Q.polynomial_part[0];
    RationalSpec out;
    out.polynomial_part = {cp * cq};
    auto eval_at_pole = [](const RationalSpec& S, cplx c0, cplx z) {
        cplx v = c0;
        for (const auto& t : S.terms) {
            const cplx d = t.pole - z;
            if (std::abs(d) < 1e-10) {
                std::ostringstream os;
                os << "compose_iterative: pole collision between levels at " << z;
                throw NumericalError(os.str());
            }
            v += t.coeffs[0] / d;
        }
        return v;
    };
    for (const auto& t : P.terms) out.terms.push_back({t.pole, {t.coeffs[0] * eval_at_pole(Q, cq, t.pole)}});
    for (const auto& t : Q.terms) out.terms.push_back({t.pole, {t.coeffs[0] * eval_at_pole(P, cp, t.pole)}});
    return out;
}

}  // namespace

RationalSpec compose_iterative(const RationalSpec& base, double xi, int D, double E_minus)
{
    if (!(xi > 0.0 && xi < 1.0) || D < 0) throw ConfigError("compose_iterative: require 0 < xi < 1, D >= 0");
    if (base.polynomial_part.size() > 1) throw ConfigError("compose_iterative: base may only carry a constant term");
    for (const auto& t : base.terms)
        if (t.coeffs.size() != 1) throw ConfigError("compose_iterative: base must have simple poles");
    if (D == 0) return base;
    RationalSpec acc = base;
    for (int d = 1; d <= D; ++d) acc = multiply(scaled_level(base, std::pow(xi, d), E_minus), acc);
    std::ostringstream os;
    os << base.label << "_star" << D;
    acc.label = os.str();
    return acc;
}

cplx eval_composed_direct(const RationalSpec& base, double xi, int D, double E_minus, cplx omega)
{
    cplx v = 1.0;
    for (int d = 0; d <= D; ++d) v *= eval_rational_scalar(base, (omega - E_minus) / std::pow(xi, d) + E_minus);
    return v;
}

// ----- Moebius gap -----

MoebiusGap moebius_gap(double wa, double wb, double wc, double wd)
{
    if (!(wa < wb && wb < wc && wc < wd)) throw ConfigError("moebius_gap: require wa < wb < wc < wd");
    const double cr = (wc - wa) * (wd - wb) / ((wc - wb) * (wd - wa));
    const double t = 2.0 * cr - 1.0;
    const double wbar = t - std::sqrt(t * t - 1.0);
    if (!(wbar > 0.0 && wbar < 1.0)) throw NumericalError("moebius_gap: degenerate cross ratio");
    // S(p,q,r): (p,q,r) -> (0,1,inf)
    auto S = [](double p, double q, double r) {
        return std::array<double, 4>{q - r, -p * (q - r), q - p, -r * (q - p)};
    };
    const auto s1 = S(wa, wb, wd);
    const auto s2 = S(-1.0, -wbar, 1.0);
    // inverse of s2 (up to scale) is [[d, -b], [-c, a]]
    const std::array<double, 4> inv{s2[3], -s2[1], -s2[2], s2[0]};
    MoebiusMap m{inv[0] * s1[0] + inv[1] * s1[2], inv[0] * s1[1] + inv[1] * s1[3], inv[2] * s1[0] + inv[3] * s1[2],
                 inv[2] * s1[1] + inv[3] * s1[3]};
    const double nrm = std::max({std::fabs(m.m11), std::fabs(m.m12), std::fabs(m.m21), std::fabs(m.m22)});
    m.m11 /= nrm;
    m.m12 /= nrm;
    m.m21 /= nrm;
    m.m22 /= nrm;
    return {wbar, m};
}

}  // namespace qrt
