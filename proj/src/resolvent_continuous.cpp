#include "qrt/resolvent_continuous.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qrt/errors.hpp"
#include "qrt/special_functions.hpp"

namespace qrt {

cplx gaussian_block_scalar(double lam, double gamma)
{
    if (!(gamma > 0.0)) throw ConfigError("gaussian_block_scalar: gamma must be positive");
    const double x = std::sqrt(0.5 * gamma) * lam;
    return {std::exp(-x * x), -2.0 / std::sqrt(std::numbers::pi) * dawson(x)};
}

double mixing_density(double gamma, double b)
{
    if (gamma < 0.0) return 0.0;
    return 0.5 * b * b * std::exp(-0.5 * b * b * gamma);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> sample_mixing_density(double b, int G, std::uint64_t seed)
{
    if (!(b > 0.0) || G < 1) throw ConfigError("sample_mixing_density: require b > 0 and G >= 1");
    std::mt19937_64 rng(seed);
    std::vector<double> out(G);
    for (int j = 0; j < G; ++j) out[j] = -2.0 / (b * b) * std::log1p(-uniform01(rng));
    return out;
}

std::string to_string(MixtureKind k)
{
    switch (k) {
    case MixtureKind::UnbiasedMC: return "unbiased_mc";
    case MixtureKind::BiasedDeterministic: return "biased_deterministic";
    case MixtureKind::GammaQuantile: return "gamma_quantile";
    case MixtureKind::StochasticZolotarev: return "stochastic_zolotarev";
    }
    return "unknown";
}

MixtureMetrics mixture_metrics(const GaussianMixturePlan& plan)
{
    return {plan.duration, plan.duration, plan.components.size()};
}

namespace {

void require_upper(cplx z, const char* who)
{
    if (!(z.imag() > 0.0)) {
        std::ostringstream os;
        os << who << ": pole must satisfy Im z > 0";
        throw ConfigError(os.str());
    }
}

Pole upper_pole(cplx z, int m)
{
    return {z, m, PoleClass::ComplexUpper};
}

}  // namespace

GaussianMixturePlan plan_complex_pole_mc(cplx z, int G, std::uint64_t seed, double duration)
{
    require_upper(z, "plan_complex_pole_mc");
    if (G < 1 || !(duration > 0.0)) throw ConfigError("plan_complex_pole_mc: require G >= 1 and duration > 0");
    const double b = z.imag();
    GaussianMixturePlan plan;
    plan.kind = MixtureKind::UnbiasedMC;
    plan.pole = upper_pole(z, 1);
    plan.seed = seed;
    plan.duration = duration;
    plan.shift = z.real();
    const cplx w(0.0, -1.0 / (b * G));
    for (double g : sample_mixing_density(duration * b, G, seed)) plan.components.push_back({g, w, 0.0, b});
    return plan;
}

GaussianMixturePlan plan_complex_pole_biased(cplx z, int G, double duration)
{
    require_upper(z, "plan_complex_pole_biased");
    if (G < 1 || !(duration > 0.0)) throw ConfigError("plan_complex_pole_biased: require G >= 1 and duration > 0");
    const double b = z.imag();
    const double tb = duration * b;
    GaussianMixturePlan plan;
    plan.kind = MixtureKind::BiasedDeterministic;
    plan.pole = upper_pole(z, 1);
    plan.duration = duration;
    plan.shift = z.real();
    const cplx w(0.0, -1.0 / (b * G));
    for (int j = 1; j <= G; ++j) {
        const double g = -2.0 / (tb * tb) * std::log((1.0 + 2.0 * (j - 1)) / (2.0 * G));
        plan.components.push_back({g, w, 0.0, b});
    }
    return plan;
}

double gamma_quantile(int m, double p)
{
    if (m < 1 || !(p > 0.0 && p < 1.0)) throw ConfigError("gamma_quantile: require m >= 1 and 0 < p < 1");
    // upper tail Q(m, x) = e^{-x} sum_{k<m} x^k/k!
    auto upper = [m](double x) {
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < m; ++k) {
            term *= x / k;
            sum += term;
        }
        return std::exp(-x) * sum;
    };
    const double q = 1.0 - p;
    double lo = 0.0, hi = std::max(1.0, 2.0 * m);
    while (upper(hi) > q) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (upper(mid) > q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

GaussianMixturePlan repeated_pole_gamma_mixture(cplx z, int m, int G)
{
    if (m < 1) throw ConfigError("repeated_pole_gamma_mixture: multiplicity must be >= 1");
    if (G < 1) throw ConfigError("repeated_pole_gamma_mixture: G must be >= 1");
    if (m == 1) return plan_complex_pole_biased(z, G);
    require_upper(z, "repeated_pole_gamma_mixture");
    const double b = z.imag();
    const double mean = m / b;
    std::vector<double> centers(G);
    for (int j = 0; j < G; ++j) centers[j] = gamma_quantile(m, (2.0 * j + 1.0) / (2.0 * G)) / b;
    const double cm = std::accumulate(centers.begin(), centers.end(), 0.0) / G;
    double s2 = 0.0;
    for (double& c : centers) {
        c += mean - cm;
        s2 += (c - mean) * (c - mean);
    }
    s2 /= G;
    const double gamma = m / (b * b) - s2;
    if (!(gamma > 0.0)) throw NumericalError("repeated_pole_gamma_mixture: residual variance is not positive");
    GaussianMixturePlan plan;
    plan.kind = MixtureKind::GammaQuantile;
    plan.pole = upper_pole(z, m);
    plan.shift = z.real();
    const cplx w = std::pow(cplx(0.0, -1.0), m) / (std::pow(b, m) * G);
    for (double c : centers) plan.components.push_back({gamma, w, c, b});
    return plan;
}

CVector mixture_values(const GaussianMixturePlan& plan, const RVector& energies)
{
    CVector out = CVector::Zero(energies.size());
    for (Eigen::Index n = 0; n < energies.size(); ++n) {
        const double lam = energies[n] - plan.shift;
        cplx acc = 0.0;
        for (const auto& c : plan.components) {
            if (plan.kind == MixtureKind::GammaQuantile)
                acc += c.weight * std::exp(cplx(-0.5 * c.gamma * lam * lam, -lam * c.center));
            else
                acc += c.weight * gaussian_block_scalar(plan.duration * lam, c.gamma);
        }
        out[n] = acc;
    }
    return out;
}

CMatrix evaluate_mixture(const GaussianMixturePlan& plan, const HermitianOperator& op)
{
    if (plan.components.empty()) throw ConfigError("evaluate_mixture: empty plan");
    return apply_spectral(op, mixture_values(plan, op.eigenvalues()));
}

// ----- reference states and success probabilities -----

ReferenceState reference_state(std::size_t dim, double p0)
{
    if (dim < 1 || !(p0 >= 0.0 && p0 <= 1.0)) throw ConfigError("reference_state: invalid dimension or p0");
    ReferenceState ref;
    ref.p.assign(dim, dim > 1 ? (1.0 - p0) / (dim - 1.0) : 0.0);
    ref.p[0] = dim > 1 ? p0 : 1.0;
    return ref;
}

void validate(const ReferenceState& ref)
{
    double s = 0.0;
    for (double p : ref.p) {
        if (p < 0.0) throw ConfigError("reference state: negative overlap");
        s += p;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw ConfigError("reference state: overlaps must sum to 1");
}

double success_probability_resolvent(const ReferenceState& ref, const RVector& spectrum, cplx z)
{
    validate(ref);
    const double a = z.real(), b = z.imag();
    double s = 0.0;
    for (Eigen::Index n = 0; n < spectrum.size(); ++n) {
        const double d = a - spectrum[n];
        s += ref.p[n] * b * b / (d * d + b * b);
    }
    return s;
}

double success_probability_block(const ReferenceState& ref, const RVector& spectrum, double a, double gamma)
{
    validate(ref);
    double s = 0.0;
    for (Eigen::Index n = 0; n < spectrum.size(); ++n) {
        const double x = std::sqrt(0.5 * gamma) * (spectrum[n] - a);
        const double f = dawson(x);
        s += ref.p[n] * (std::exp(-2.0 * x * x) + 4.0 / std::numbers::pi * f * f);
    }
    return s;
}

double success_probability_statevector(const ReferenceState& ref, const CVector& filter_values)
{
    // |phi> = sum_n sqrt(p_n) |E_n>, so ||f(H) phi||^2 = sum_n p_n |f(E_n)|^2
    CVector phi(filter_values.size());
    for (Eigen::Index n = 0; n < phi.size(); ++n) phi[n] = std::sqrt(ref.p[n]);
    const CVector out = filter_values.cwiseProduct(phi);
    return out.squaredNorm();
}

// ----- real poles -----

double uniform_gaussian_qmax(double a_minus, double eps)
{
    if (!(a_minus > 0.0) || !(eps > 0.0) || eps * a_minus >= 1.0)
        throw ConfigError("uniform_gaussian_qmax: require eps*a_minus < 1");
    return 2.0 / a_minus * std::sqrt(std::log(1.0 / (eps * a_minus)));
}

double uniform_gaussian_value(double d, double q)
{
    if (d == 0.0) return q * std::sqrt(2.0 / std::numbers::pi);
    return std::erf(std::fabs(d) * q / std::numbers::sqrt2) / d;
}

double double_gaussian_value(double d, double gamma0)
{
    const double s = d < 0.0 ? -1.0 : 1.0;
    return s / std::sqrt(d * d + 1.0 / gamma0);
}

namespace {

double leading_sum(const ReferenceState& ref, const RVector& e, double a)
{
    double s = 0.0;
    for (Eigen::Index n = 0; n < e.size(); ++n) s += ref.p[n] / ((a - e[n]) * (a - e[n]));
    return s;
}

void check_real_pole(double a, SpectralInterval iv, const ReferenceState& ref, const HermitianOperator& op)
{
    if (a >= iv.lo && a <= iv.hi) throw ConfigError("real pole lies inside the spectral interval");
    validate(ref);
    if (static_cast<Eigen::Index>(ref.p.size()) != op.dim())
        throw ConfigError("reference state dimension does not match the operator");
}

}  // namespace

RealPoleContinuous real_pole_uniform_gaussian(double a, SpectralInterval iv, double eps, const ReferenceState& ref,
                                              const HermitianOperator& op)
{
    check_real_pole(a, iv, ref, op);
    const double am = pole_a_minus(a, iv);
    RealPoleContinuous out;
    out.q_max = uniform_gaussian_qmax(am, eps);
    const RVector& e = op.eigenvalues();
    out.values.resize(e.size());
    for (Eigen::Index n = 0; n < e.size(); ++n) out.values[n] = uniform_gaussian_value(a - e[n], out.q_max);
    out.approx = apply_spectral(op, out.values);
    out.success_prob =
        std::numbers::pi / (2.0 * out.q_max * out.q_max) * success_probability_statevector(ref, out.values);
    out.success_prob_leading = std::numbers::pi * am * am / 8.0 / std::log(1.0 / (eps * am)) * leading_sum(ref, e, a);
    return out;
}

RealPoleContinuous real_pole_double_gaussian(double a, SpectralInterval iv, double eps, const ReferenceState& ref,
                                             const HermitianOperator& op)
{
    check_real_pole(a, iv, ref, op);
    const double am = pole_a_minus(a, iv);
    if (!(eps > 0.0)) throw ConfigError("real_pole_double_gaussian: eps must be positive");
    RealPoleContinuous out;
    out.gamma0 = 1.0 / (eps * am * am * am);
    const RVector& e = op.eigenvalues();
    out.values.resize(e.size());
    for (Eigen::Index n = 0; n < e.size(); ++n) out.values[n] = double_gaussian_value(a - e[n], out.gamma0);
    out.approx = apply_spectral(op, out.values);
    out.success_prob = success_probability_statevector(ref, out.values) / out.gamma0;
    out.success_prob_leading = eps * am * am * am * leading_sum(ref, e, a);
    return out;
}

}  // namespace qrt
