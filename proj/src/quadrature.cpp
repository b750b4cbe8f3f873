#include "qrt/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qrt/errors.hpp"

namespace qrt {

std::string to_string(RuleKind kind)
{
    switch (kind) {
    case RuleKind::Trapezoidal: return "trapezoidal";
    case RuleKind::GaussLegendre: return "legendre";
    case RuleKind::GaussLaguerre: return "laguerre";
    case RuleKind::GaussHermite: return "hermite";
    }
    return "unknown";
}

// ----- Gauss-Legendre -----

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre_eval(int n, double x, double& p, double& dp)
{
    double p0 = 1.0, p1 = x;
    if (n == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre(int J)
{
    if (J < 1 || J > 10000) throw ConfigError("gauss_legendre: J must lie in [1, 10000]");
    QuadratureRule rule;
    rule.kind = RuleKind::GaussLegendre;
    rule.nodes.assign(J, 0.0);
    rule.weights.assign(J, 0.0);
    const int half = (J + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (J + 0.5));
        double p = 0.0, dp = 0.0;
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            legendre_eval(J, x, p, dp);
            const double dx = p / dp;
            x -= dx;
            if (std::fabs(dx) <= 1e-16 * std::max(1.0, std::fabs(x))) {
                converged = true;
                break;
            }
        }
        legendre_eval(J, x, p, dp);
        if (!converged && std::fabs(p) > 1e-14) {
            std::ostringstream os;
            os << "gauss_legendre: Newton failed to converge for node " << i << " of J=" << J;
            throw NumericalError(os.str());
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // node i counts down from +1; store mirrored pair ascending
        rule.nodes[J - 1 - i] = x;
        rule.nodes[i] = -x;
        rule.weights[J - 1 - i] = w;
        rule.weights[i] = w;
    }
    if (J % 2 == 1) rule.nodes[J / 2] = 0.0;
    return rule;
}

QuadratureRule legendre_on(int J, double lo, double hi)
{
    QuadratureRule rule = gauss_legendre(J);
    const double half = 0.5 * (hi - lo);
    for (int j = 0; j < J; ++j) {
        rule.nodes[j] = lo + half * (1.0 + rule.nodes[j]);
        rule.weights[j] *= half;
    }
    rule.lo = lo;
    rule.hi = hi;
    return rule;
}

// ----- Golub-Welsch -----

namespace {

struct Jacobi {
    std::vector<double> alpha;  // diagonal, size J
    std::vector<double> beta;   // off-diagonal, beta[k] couples k and k+1
    double mu0;
};

// Value and derivative of the monic-free recurrence q_J at x, rescaled to
// stay finite; only the ratio q/q' is meaningful.
void recurrence_ratio(const Jacobi& jm, double x, double& q, double& dq)
{
    const int J = static_cast<int>(jm.alpha.size());
    double qm1 = 0.0, q0 = 1.0;
    double dqm1 = 0.0, dq0 = 0.0;
    for (int k = 0; k < J; ++k) {
        const double bk = k > 0 ? jm.beta[k - 1] : 0.0;
        const double bnext = k < J - 1 ? jm.beta[k] : 1.0;
        const double q1 = ((x - jm.alpha[k]) * q0 - bk * qm1) / bnext;
        const double dq1 = (q0 + (x - jm.alpha[k]) * dq0 - bk * dqm1) / bnext;
        qm1 = q0;
        q0 = q1;
        dqm1 = dq0;
        dq0 = dq1;
        const double s = std::max(std::fabs(q0), std::fabs(dq0));
        if (s > 1e100) {
            qm1 /= s;
            q0 /= s;
            dqm1 /= s;
            dq0 /= s;
        }
    }
    q = q0;
    dq = dq0;
}

// mu0 / sum_k q_k(x)^2 with q_0 = 1, accumulated in scaled form.
double christoffel_weight(const Jacobi& jm, double x)
{
    const int J = static_cast<int>(jm.alpha.size());
    double qm1 = 0.0, q0 = 1.0;
    double sum = 1.0;
    double log_scale = 0.0;  // true q = stored q * exp(log_scale)
    for (int k = 0; k < J - 1; ++k) {
        const double bk = k > 0 ? jm.beta[k - 1] : 0.0;
        const double q1 = ((x - jm.alpha[k]) * q0 - bk * qm1) / jm.beta[k];
        qm1 = q0;
        q0 = q1;
        sum += q0 * q0;
        const double s = std::fabs(q0);
        if (s > 1e100) {
            qm1 /= s;
            q0 /= s;
            sum /= s * s;
            log_scale += std::log(s);
        }
    }
    return jm.mu0 / sum * std::exp(-2.0 * log_scale);
}

QuadratureRule golub_welsch(const Jacobi& jm, RuleKind kind)
{
    const int J = static_cast<int>(jm.alpha.size());
    QuadratureRule rule;
    rule.kind = kind;
    if (J == 1) {
        rule.nodes = {jm.alpha[0]};
        rule.weights = {jm.mu0};
        return rule;
    }
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(jm.alpha.data(), J);
    Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(jm.beta.data(), J - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "golub_welsch: tridiagonal eigensolver did not converge for J=" << J;
        throw NumericalError(os.str());
    }
    rule.nodes.resize(J);
    rule.weights.resize(J);
    for (int j = 0; j < J; ++j) {
        double x = solver.eigenvalues()[j];
        for (int it = 0; it < 3; ++it) {
            double q = 0.0, dq = 0.0;
            recurrence_ratio(jm, x, q, dq);
            if (dq == 0.0 || !std::isfinite(q / dq)) break;
            const double dx = q / dq;
            if (std::fabs(dx) > 1e-6 * (1.0 + std::fabs(x))) break;  // stay on the located root
            x -= dx;
        }
        rule.nodes[j] = x;
        rule.weights[j] = christoffel_weight(jm, x);
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_laguerre(int J)
{
    if (J < 1 || J > 10000) throw ConfigError("gauss_laguerre: J must lie in [1, 10000]");
    Jacobi jm;
    jm.mu0 = 1.0;
    for (int k = 0; k < J; ++k) jm.alpha.push_back(2.0 * k + 1.0);
    for (int k = 1; k < J; ++k) jm.beta.push_back(static_cast<double>(k));
    QuadratureRule rule = golub_welsch(jm, RuleKind::GaussLaguerre);
    rule.lo = 0.0;
    rule.hi = std::numeric_limits<double>::infinity();
    return rule;
}

QuadratureRule gauss_hermite(int J)
{
    if (J < 1 || J > 20000) throw ConfigError("gauss_hermite: J must lie in [1, 20000]");
    Jacobi jm;
    jm.mu0 = std::sqrt(std::numbers::pi);
    jm.alpha.assign(J, 0.0);
    for (int k = 1; k < J; ++k) jm.beta.push_back(std::sqrt(0.5 * k));
    QuadratureRule rule = golub_welsch(jm, RuleKind::GaussHermite);
    for (int i = 0; i < J / 2; ++i) {
        const double x = 0.5 * (rule.nodes[J - 1 - i] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[J - 1 - i] + rule.weights[i]);
        rule.nodes[i] = -x;
        rule.nodes[J - 1 - i] = x;
        rule.weights[i] = rule.weights[J - 1 - i] = w;
    }
    if (J % 2 == 1) rule.nodes[J / 2] = 0.0;
    rule.lo = -std::numeric_limits<double>::infinity();
    rule.hi = std::numeric_limits<double>::infinity();
    return rule;
}

QuadratureRule trapezoidal(int J, double lo, double hi, bool flat_weights)
{
    if (J < 2) throw ConfigError("trapezoidal: J must be at least 2");
    if (!(hi > lo)) throw ConfigError("trapezoidal: require hi > lo");
    QuadratureRule rule;
    rule.kind = RuleKind::Trapezoidal;
    rule.lo = lo;
    rule.hi = hi;
    const double dt = (hi - lo) / (J - 1);
    rule.nodes.resize(J);
    rule.weights.assign(J, flat_weights ? (hi - lo) / J : dt);
    for (int j = 0; j < J; ++j) rule.nodes[j] = lo + j * dt;
    rule.nodes[J - 1] = hi;
    if (!flat_weights) {
        rule.weights.front() = 0.5 * dt;
        rule.weights.back() = 0.5 * dt;
    }
    return rule;
}

// ----- truncation parameters and predictors -----

double tmax_complex(double b, double eps)
{
    if (!(b > 0.0) || !(eps > 0.0)) throw ConfigError("tmax_complex: b and eps must be positive");
    if (eps * b >= 2.0) throw ConfigError("tmax_complex: eps*b >= 2, no truncation needed");
    return std::log(2.0 / (eps * b)) / b;
}

CostPrediction predict_cost_complex(std::complex<double> z, double a_plus, double eps)
{
    const double b = z.imag();
    if (!(b > 0.0)) throw ConfigError("predict_cost_complex: Im z must be positive");
    if (a_plus < 0.0) throw ConfigError("predict_cost_complex: a_plus must be nonnegative");
    const double tm = tmax_complex(b, eps);
    const double eta = (3.0 * b - 2.0 * std::numbers::sqrt2 * b + a_plus) / (4.0 * std::numbers::sqrt2 * b);
    const double arg = 2.0 / (eps * b);
    const double lg = std::log(arg);
    double raw = (lg > 0.0 ? std::log2(lg) : 0.0) + (eta + 1.0) * std::log2(arg) + 3.0;
    CostPrediction out;
    out.J = std::max<long long>(1, static_cast<long long>(std::ceil(raw)));
    out.t_max = tm;
    out.t_tot = out.J * tm / 2.0;
    return out;
}

double ymax(double a_minus, double eps, bool display_variant)
{
    if (!(a_minus > 0.0) || !(eps > 0.0)) throw ConfigError("ymax: a_minus and eps must be positive");
    if (display_variant) {
        if (eps * a_minus >= 1.0) throw ConfigError("ymax: eps*a_minus >= 1 is degenerate");
        return std::sqrt(std::log(1.0 / (eps * a_minus)));
    }
    const double eps1 = eps / 2.0;
    if (eps1 * a_minus >= 2.0) throw ConfigError("ymax: eps*a_minus >= 4 is degenerate");
    return std::sqrt(2.0 * std::log(2.0 / (eps1 * a_minus)));
}

double qmax(double a_minus, double eps)
{
    if (!(a_minus > 0.0) || !(eps > 0.0)) throw ConfigError("qmax: a_minus and eps must be positive");
    const double eps1 = eps / 2.0;
    if (eps1 * a_minus >= 2.0) throw ConfigError("qmax: eps*a_minus >= 4 is degenerate");
    return 2.0 / a_minus * std::sqrt(std::log(2.0 / (eps1 * a_minus)));
}

RealPoleFactors real_pole_factors(double a_minus, double a_plus, double eps)
{
    if (!(a_minus > 0.0) || a_plus < a_minus) throw ConfigError("real_pole_factors: require 0 < a_minus <= a_plus");
    const double e1 = eps / 2.0, e2 = eps / 4.0, e3 = eps / 4.0;
    if (e1 * a_minus >= 2.0) throw ConfigError("real_pole_factors: eps*a_minus >= 4 is degenerate");
    const double zeta = a_plus / (2.0 * a_minus);
    const double L = std::log(2.0 / (e1 * a_minus));
    const double ly = (std::log(4.0 * std::exp(std::numbers::pi) /
                                (std::sqrt(std::numbers::pi) * e1 * e2 * a_plus * a_minus)) -
                       0.5 * std::log(L) + 4.0 * std::numbers::sqrt2 * zeta * L) /
                      std::numbers::pi;
    const double lq = std::log2(32.0 * std::numbers::sqrt2 / (std::numbers::pi * e3 * a_minus)) +
                      zeta * std::log2(2.0 / (e1 * a_minus)) + std::log2(L);
    RealPoleFactors f;
    f.L_y = std::max<long long>(2, static_cast<long long>(std::ceil(ly)));
    f.L_q = std::max<long long>(1, static_cast<long long>(std::ceil(lq)));
    return f;
}

CostPrediction predict_cost_real(double a_minus, double a_plus, double eps)
{
    if (!(a_minus > 0.0) || a_plus < a_minus) throw ConfigError("predict_cost_real: require 0 < a_minus <= a_plus");
    if (!(eps > 0.0) || eps * a_minus >= 4.0) throw ConfigError("predict_cost_real: eps*a_minus >= 4 is degenerate");
    const double pi = std::numbers::pi;
    const double l4 = std::log(4.0 / (eps * a_minus));
    const double by = std::log(32.0 * std::exp(pi) / (std::sqrt(pi) * eps * eps * a_plus * a_minus)) +
                      2.0 * std::numbers::sqrt2 * a_plus / a_minus * l4;
    const double bq = std::log2(std::numbers::sqrt2 / (pi * eps * a_minus)) +
                      a_plus / (2.0 * a_minus) * std::log2(4.0 / (eps * a_minus)) + 7.0;
    CostPrediction out;
    out.L_y = std::max<long long>(1, static_cast<long long>(std::ceil(by)));
    out.L_q = std::max<long long>(1, static_cast<long long>(std::ceil(bq)));
    out.J = out.L_y * out.L_q;
    out.t_max = 2.0 * std::numbers::sqrt2 / a_minus * l4;
    out.t_tot = std::numbers::sqrt2 * static_cast<double>(out.J) / (2.0 * a_minus) * l4;
    return out;
}

CostPrediction predict_cost_zolotarev(int K, const std::vector<double>& b, double gamma_K, double eps,
                                      double hnorm)
{
    if (K < 1 || static_cast<int>(b.size()) != K) throw ConfigError("predict_cost_zolotarev: need K pole heights");
    const double bm = *std::min_element(b.begin(), b.end());
    if (!(bm > 0.0)) throw ConfigError("predict_cost_zolotarev: all b_k must be positive");
    const double arg = 4.0 * gamma_K / (eps * bm);
    if (!(arg > 1.0)) throw ConfigError("predict_cost_zolotarev: degenerate log argument");
    const double eta = (3.0 * bm - 2.0 * std::numbers::sqrt2 * bm + hnorm) / (4.0 * std::numbers::sqrt2 * bm);
    const double lg = std::log(arg);
    const double raw = (lg > 0.0 ? std::log2(lg) : 0.0) + (eta + 1.0) * std::log2(arg) + 3.0;
    CostPrediction out;
    out.J = std::max<long long>(1, static_cast<long long>(std::ceil(raw)));
    out.t_max = lg / bm;
    out.t_tot = out.J * out.t_max / 2.0;
    return out;
}

CostPrediction predict_cost_iterative(int D, double xi, int K, double gamma_K, double C_K, double b_minus,
                                      double eps, double hnorm)
{
    if (D < 0 || !(xi > 0.0 && xi < 1.0)) throw ConfigError("predict_cost_iterative: require D >= 0, 0 < xi < 1");
    if (K < 1 || !(b_minus > 0.0)) throw ConfigError("predict_cost_iterative: invalid pole data");
    const double xd = std::pow(xi, D);
    const double gd = std::pow(gamma_K, D);
    const double argJ = 2.0 * gd * C_K / (eps * xd * b_minus);
    const double argT = gd * C_K / (eps * xd * b_minus);
    if (!(argJ > 1.0) || !(argT > 1.0)) throw ConfigError("predict_cost_iterative: degenerate log argument");
    const double coef =
        (3.0 * b_minus + 2.0 * std::numbers::sqrt2 * b_minus + hnorm) / (4.0 * std::numbers::sqrt2 * b_minus);
    const double lg = std::log(argJ);
    const double raw = (lg > 0.0 ? std::log2(lg) : 0.0) + coef * std::log2(argJ) + 3.0;
    CostPrediction out;
    out.J = std::max<long long>(1, static_cast<long long>(std::ceil(raw)));
    out.t_max = std::log(argT) / (xd * b_minus);
    out.t_tot = out.J * out.t_max / 2.0;
    return out;
}

}  // namespace qrt
