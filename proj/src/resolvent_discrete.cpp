#include "qrt/resolvent_discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "qrt/errors.hpp"

namespace qrt {

namespace {

constexpr int kAutoCap = 1 << 22;

// Neumaier summation of complex terms.
struct CompensatedSum {
    double re = 0.0, im = 0.0, cre = 0.0, cim = 0.0;
    static void add1(double& s, double& c, double x)
    {
        const double t = s + x;
        if (std::fabs(s) >= std::fabs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    void add(cplx x)
    {
        add1(re, cre, x.real());
        add1(im, cim, x.imag());
    }
    cplx value() const { return {re + cre, im + cim}; }
};

std::function<cplx(double)> power_target(cplx z, int m)
{
    return [z, m](double x) { return std::pow(z - x, -m); };
}

void require_upper(cplx z, const char* who)
{
    if (!(z.imag() > 0.0)) {
        std::ostringstream os;
        os << who << ": pole must satisfy Im z > 0 (conjugate lower poles first)";
        throw ConfigError(os.str());
    }
}

LCUPlan complex_plan_fixed(cplx z, double eps, int J, ComplexRule rule)
{
    const double a = z.real(), b = z.imag();
    LCUPlan plan;
    plan.meta.kernel = KernelKind::DiracDelta;
    plan.meta.q_rule = to_string(rule);
    plan.meta.eps = eps;
    plan.meta.J = J;
    const cplx mi(0.0, -1.0);
    switch (rule) {
    case ComplexRule::Legendre: {
        const double T = tmax_complex(b, eps);
        const QuadratureRule q = gauss_legendre(J);
        plan.meta.T = T;
        for (int j = 0; j < J; ++j) {
            const double t = 0.5 * T * (1.0 + q.nodes[j]);
            plan.times.push_back(t);
            plan.weights.push_back(mi * (0.5 * T) * q.weights[j] * std::exp(cplx(-b * t, a * t)));
        }
        break;
    }
    case ComplexRule::Trapezoidal: {
        const double T = tmax_complex(b, eps);
        const QuadratureRule q = trapezoidal(J, 0.0, T);
        plan.meta.T = T;
        for (int j = 0; j < J; ++j) {
            const double t = q.nodes[j];
            plan.times.push_back(t);
            plan.weights.push_back(mi * q.weights[j] * std::exp(cplx(-b * t, a * t)));
        }
        break;
    }
    case ComplexRule::Laguerre: {
        const QuadratureRule q = gauss_laguerre(J);
        for (int j = 0; j < J; ++j) {
            const double t = q.nodes[j] / b;
            plan.times.push_back(t);
            plan.weights.push_back(mi * (q.weights[j] / b) * std::polar(1.0, a * t));
        }
        plan.meta.T = plan.times.back();
        break;
    }
    }
    return plan;
}

}  // namespace

std::string to_string(PoleClass cls)
{
    switch (cls) {
    case PoleClass::ComplexUpper: return "complex_upper";
    case PoleClass::ComplexLower: return "complex_lower";
    case PoleClass::RealOutside: return "real_outside";
    case PoleClass::RealInside: return "real_inside";
    }
    return "unknown";
}

std::string to_string(ComplexRule r)
{
    switch (r) {
    case ComplexRule::Legendre: return "legendre";
    case ComplexRule::Trapezoidal: return "trapezoidal";
    case ComplexRule::Laguerre: return "laguerre";
    }
    return "unknown";
}

std::string to_string(YRule r)
{
    switch (r) {
    case YRule::Trapezoidal: return "trapezoidal";
    case YRule::Legendre: return "legendre";
    case YRule::Hermite: return "hermite";
    }
    return "unknown";
}

std::string to_string(QRule r) { return r == QRule::Legendre ? "legendre" : "trapezoidal"; }

std::string to_string(KernelKind k) { return k == KernelKind::DiracDelta ? "dirac_delta" : "gaussian"; }

Pole classify_pole(cplx z, int multiplicity, SpectralInterval iv)
{
    if (multiplicity < 1) throw ConfigError("pole: multiplicity must be >= 1");
    Pole p{z, multiplicity, PoleClass::ComplexUpper};
    if (z.imag() > 0.0)
        p.cls = PoleClass::ComplexUpper;
    else if (z.imag() < 0.0)
        p.cls = PoleClass::ComplexLower;
    else if (z.real() < iv.lo || z.real() > iv.hi)
        p.cls = PoleClass::RealOutside;
    else
        p.cls = PoleClass::RealInside;
    return p;
}

double pole_a_plus(cplx z, SpectralInterval iv)
{
    return std::max(std::fabs(z.real() - iv.lo), std::fabs(z.real() - iv.hi));
}

double pole_a_minus(cplx z, SpectralInterval iv)
{
    const double a = z.real();
    if (a >= iv.lo && a <= iv.hi) return 0.0;
    return std::min(std::fabs(a - iv.lo), std::fabs(a - iv.hi));
}

PlanMetrics plan_metrics(const LCUPlan& plan)
{
    PlanMetrics m;
    m.J = static_cast<long long>(plan.times.size());
    for (double t : plan.times) {
        m.t_max = std::max(m.t_max, std::fabs(t));
        m.t_tot += std::fabs(t);
    }
    return m;
}

// ----- evaluation -----

CVector plan_values(const LCUPlan& plan, const RVector& energies)
{
    const std::size_t J = plan.times.size();
    std::vector<double> wr(J), wi(J);
    for (std::size_t j = 0; j < J; ++j) {
        wr[j] = plan.weights[j].real();
        wi[j] = plan.weights[j].imag();
    }
    CVector out(energies.size());
    for (Eigen::Index n = 0; n < energies.size(); ++n) {
        CompensatedSum acc;
        const double e = energies[n];
        for (std::size_t j = 0; j < J; ++j) {
            const double ph = -e * plan.times[j];
            const double c = std::cos(ph), s = std::sin(ph);
            CompensatedSum::add1(acc.re, acc.cre, wr[j] * c - wi[j] * s);
            CompensatedSum::add1(acc.im, acc.cim, wr[j] * s + wi[j] * c);
        }
        out[n] = acc.value();
    }
    return out;
}

cplx plan_scalar(const LCUPlan& plan, double lambda)
{
    RVector e(1);
    e[0] = lambda;
    return plan_values(plan, e)[0];
}

double plan_probe_error(const LCUPlan& plan, SpectralInterval iv, const std::function<cplx(double)>& target,
                        int points)
{
    RVector grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = points == 1 ? iv.lo : iv.lo + (iv.hi - iv.lo) * i / (points - 1.0);
    const CVector v = plan_values(plan, grid);
    double err = 0.0;
    for (int i = 0; i < points; ++i) err = std::max(err, std::abs(v[i] - target(grid[i])));
    return err;
}

double plan_error_spectral(const LCUPlan& plan, const RVector& energies, const std::function<cplx(double)>& target)
{
    // degenerate eigenvalues (equal to 1e-14) share one plan evaluation
    std::vector<Eigen::Index> order(energies.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return energies[a] < energies[b]; });
    std::vector<double> reps;
    std::vector<std::size_t> rep_of(energies.size());
    for (Eigen::Index n : order) {
        if (reps.empty() || energies[n] - reps.back() > 1e-14) reps.push_back(energies[n]);
        rep_of[n] = reps.size() - 1;
    }
    const CVector v = plan_values(plan, Eigen::Map<const RVector>(reps.data(), static_cast<Eigen::Index>(reps.size())));
    double err = 0.0;
    for (Eigen::Index n = 0; n < energies.size(); ++n)
        err = std::max(err, std::abs(v[rep_of[n]] - target(energies[n])));
    return err;
}

CMatrix evaluate_plan_exact(const LCUPlan& plan, const HermitianOperator& op)
{
    if (plan.times.empty()) throw ConfigError("evaluate_plan: empty plan");
    return apply_spectral(op, plan_values(plan, op.eigenvalues()));
}

CMatrix evaluate_plan(const LCUPlan& plan, const TrotterPropagator& prop)
{
    if (plan.times.empty()) throw ConfigError("evaluate_plan: empty plan");
    return prop.weighted_sum(plan.times, plan.weights);
}

CMatrix evaluate_plan(const LCUPlan& plan, const SplitHamiltonian& split, const PropagatorChoice& choice)
{
    if (choice.kind == PropagatorKind::Exact) return evaluate_plan_exact(plan, split.total);
    TrotterPropagator prop(split, choice.trotter);
    return evaluate_plan(plan, prop);
}

// ----- plan construction -----

LCUPlan merge_duplicate_times(LCUPlan plan)
{
    const std::size_t n = plan.times.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return plan.times[i] < plan.times[j]; });
    std::vector<double> t;
    std::vector<cplx> w;
    t.reserve(n);
    w.reserve(n);
    for (std::size_t k : idx) {
        if (!t.empty() && t.back() == plan.times[k]) {
            w.back() += plan.weights[k];
        } else {
            t.push_back(plan.times[k]);
            w.push_back(plan.weights[k]);
        }
    }
    plan.times = std::move(t);
    plan.weights = std::move(w);
    return plan;
}

LCUPlan plan_complex_pole(cplx z, double eps, SpectralInterval iv, std::optional<int> J, ComplexRule rule)
{
    require_upper(z, "plan_complex_pole");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("plan_complex_pole: eps must lie in (0, 1)");
    LCUPlan plan;
    if (J) {
        plan = complex_plan_fixed(z, eps, *J, rule);
    } else if (rule == ComplexRule::Legendre) {
        const CostPrediction pred = predict_cost_complex(z, pole_a_plus(z, iv), eps);
        plan = complex_plan_fixed(z, eps, static_cast<int>(pred.J), rule);
    } else {
        const auto target = power_target(z, 1);
        int j = 8;
        for (;; j *= 2) {
            if (j > kAutoCap) {
                std::ostringstream os;
                os << "plan_complex_pole: " << to_string(rule) << " rule did not reach eps=" << eps << " with J <= "
                   << kAutoCap;
                throw NumericalError(os.str());
            }
            plan = complex_plan_fixed(z, eps, j, rule);
            if (plan_probe_error(plan, iv, target) < eps) break;
        }
    }
    plan.meta.pole = classify_pole(z, 1, iv);
    return plan;
}

namespace {

LCUPlan real_plan_fixed(double a, SpectralInterval iv, double eps, int Ly, int Lq, YRule yr, QRule qr)
{
    const double am = pole_a_minus(a, iv);
    const double qm = qmax(am, eps);
    const double ym = ymax(am, eps);
    const double sgn = a < iv.lo ? -1.0 : 1.0;

    const QuadratureRule qrule = qr == QRule::Legendre ? legendre_on(Lq, 0.0, qm) : trapezoidal(Lq, 0.0, qm);
    std::vector<double> ys, wy;
    switch (yr) {
    case YRule::Trapezoidal: {
        const QuadratureRule r = trapezoidal(Ly, -ym, ym);
        ys = r.nodes;
        for (int l = 0; l < Ly; ++l) wy.push_back(r.weights[l] * std::exp(-0.5 * ys[l] * ys[l]));
        break;
    }
    case YRule::Legendre: {
        const QuadratureRule r = legendre_on(Ly, -ym, ym);
        ys = r.nodes;
        for (int l = 0; l < Ly; ++l) wy.push_back(r.weights[l] * std::exp(-0.5 * ys[l] * ys[l]));
        break;
    }
    case YRule::Hermite: {
        // int e^{-y^2/2} f(y) dy = sqrt2 int e^{-s^2} f(sqrt2 s) ds
        const QuadratureRule r = gauss_hermite(Ly);
        for (int l = 0; l < Ly; ++l) {
            ys.push_back(std::numbers::sqrt2 * r.nodes[l]);
            wy.push_back(std::numbers::sqrt2 * r.weights[l]);
        }
        break;
    }
    }

    LCUPlan plan;
    plan.times.reserve(static_cast<std::size_t>(Ly) * Lq);
    plan.weights.reserve(static_cast<std::size_t>(Ly) * Lq);
    const double pre = sgn / std::numbers::pi;
    for (int l = 0; l < Ly; ++l) {
        for (int j = 0; j < Lq; ++j) {
            const double t = ys[l] * qrule.nodes[j];
            plan.times.push_back(t);
            plan.weights.push_back(pre * qrule.weights[j] * wy[l] * std::polar(1.0, a * t));
        }
    }
    plan = merge_duplicate_times(std::move(plan));
    plan.meta.kernel = KernelKind::Gaussian;
    plan.meta.q_rule = to_string(qr);
    plan.meta.y_rule = to_string(yr);
    plan.meta.L_y = Ly;
    plan.meta.L_q = Lq;
    plan.meta.J = static_cast<long long>(Ly) * Lq;
    plan.meta.T = qm;
    plan.meta.eps = eps;
    return plan;
}

}  // namespace

LCUPlan plan_real_pole(double a, SpectralInterval iv, double eps, const RealPoleOptions& opt)
{
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("plan_real_pole: eps must lie in (0, 1)");
    if (a >= iv.lo && a <= iv.hi)
        throw ConfigError("plan_real_pole: pole lies inside the spectral interval; the modified kernel for "
                          "interior real poles is not implemented");
    const double am = pole_a_minus(a, iv), ap = pole_a_plus(a, iv);
    const RealPoleFactors f = real_pole_factors(am, ap, eps);
    const int Lq = opt.L_q ? *opt.L_q : static_cast<int>(f.L_q);
    LCUPlan plan;
    if (opt.L_y || opt.y_rule == YRule::Trapezoidal) {
        const int Ly = opt.L_y ? *opt.L_y : static_cast<int>(f.L_y);
        plan = real_plan_fixed(a, iv, eps, Ly, Lq, opt.y_rule, opt.q_rule);
    } else {
        const auto target = power_target(cplx(a, 0.0), 1);
        for (long long ly = std::max<long long>(2, f.L_y);; ly *= 2) {
            if (ly * Lq > (1LL << 22)) {
                std::ostringstream os;
                os << "plan_real_pole: " << to_string(opt.y_rule) << " y-rule did not reach eps=" << eps;
                throw NumericalError(os.str());
            }
            plan = real_plan_fixed(a, iv, eps, static_cast<int>(ly), Lq, opt.y_rule, opt.q_rule);
            if (plan_probe_error(plan, iv, target) < eps) break;
        }
    }
    plan.meta.pole = classify_pole(cplx(a, 0.0), 1, iv);
    return plan;
}

double tmax_repeated(double b, int m, double eps)
{
    if (!(b > 0.0) || m < 1 || !(eps > 0.0)) throw ConfigError("tmax_repeated: invalid arguments");
    const double log_target = std::log(eps / 2.0) + m * std::log(b);
    if (!(log_target < 0.0)) throw ConfigError("tmax_repeated: eps*b^m >= 2, degenerate truncation");
    auto log_tail = [m](double x) {
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < m; ++k) {
            term *= x / k;
            sum += term;
        }
        return -x + std::log(sum);
    };
    double lo = 0.0, hi = 1.0;
    while (log_tail(hi) > log_target) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_tail(mid) > log_target ? lo : hi) = mid;
    }
    return hi / b;
}

LCUPlan plan_repeated_pole(cplx z, int m, double eps, SpectralInterval iv, std::optional<int> J)
{
    if (m < 1) throw ConfigError("plan_repeated_pole: multiplicity must be >= 1");
    if (m == 1) return plan_complex_pole(z, eps, iv, J, ComplexRule::Legendre);
    require_upper(z, "plan_repeated_pole");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("plan_repeated_pole: eps must lie in (0, 1)");
    const double a = z.real(), b = z.imag();
    const double T = tmax_repeated(b, m, eps);
    const cplx pref = std::pow(cplx(0.0, -1.0), m) / std::tgamma(static_cast<double>(m));

    auto build_fixed = [&](int n) {
        const QuadratureRule q = gauss_legendre(n);
        LCUPlan plan;
        for (int j = 0; j < n; ++j) {
            const double t = 0.5 * T * (1.0 + q.nodes[j]);
            plan.times.push_back(t);
            plan.weights.push_back(pref * (0.5 * T) * q.weights[j] * std::pow(t, m - 1) *
                                   std::exp(cplx(-b * t, a * t)));
        }
        plan.meta.kernel = KernelKind::DiracDelta;
        plan.meta.q_rule = "legendre";
        plan.meta.J = n;
        plan.meta.T = T;
        plan.meta.eps = eps;
        plan.meta.pole = classify_pole(z, m, iv);
        return plan;
    };
    if (J) return build_fixed(*J);

    const auto target = power_target(z, m);
    long long n = predict_cost_complex(z, pole_a_plus(z, iv), eps).J;
    for (;; n *= 2) {
        if (n > kAutoCap) throw NumericalError("plan_repeated_pole: did not reach eps within the node cap");
        LCUPlan plan = build_fixed(static_cast<int>(n));
        if (plan_probe_error(plan, iv, target) < eps) return plan;
    }
}

}  // namespace qrt
