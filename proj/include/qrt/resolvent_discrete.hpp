// resolvent_discrete.hpp: quadrature LCU plans for resolvents.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qrt/hamiltonians.hpp"
#include "qrt/linalg.hpp"
#include "qrt/propagators.hpp"
#include "qrt/quadrature.hpp"

namespace qrt {

enum class PoleClass { ComplexUpper, ComplexLower, RealOutside, RealInside };

std::string to_string(PoleClass cls);

struct SpectralInterval {
    double lo = -1.0;
    double hi = 1.0;
};

struct Pole {
    cplx z;
    int multiplicity = 1;
    PoleClass cls = PoleClass::ComplexUpper;
};

Pole classify_pole(cplx z, int multiplicity, SpectralInterval iv);

// Largest and smallest distance from Re z to the interval [lo, hi].
double pole_a_plus(cplx z, SpectralInterval iv);
double pole_a_minus(cplx z, SpectralInterval iv);

enum class KernelKind { DiracDelta, Gaussian };
enum class ComplexRule { Legendre, Trapezoidal, Laguerre };
enum class YRule { Trapezoidal, Legendre, Hermite };
enum class QRule { Legendre, Trapezoidal };

std::string to_string(ComplexRule r);
std::string to_string(YRule r);
std::string to_string(QRule r);
std::string to_string(KernelKind k);

struct PlanMeta {
    Pole pole;
    KernelKind kernel = KernelKind::DiracDelta;
    std::string q_rule;
    std::string y_rule;
    long long J = 0;
    long long L_y = 0;
    long long L_q = 0;
    double T = 0.0;  // truncation of the outer variable
    double eps = 0.0;
};

struct LCUPlan {
    std::vector<double> times;
    std::vector<cplx> weights;
    PlanMeta meta;
};

struct PlanMetrics {
    double t_max = 0.0;
    double t_tot = 0.0;
    long long J = 0;
};

PlanMetrics plan_metrics(const LCUPlan& plan);

// Upper-half-plane pole via the Laplace representation. Without J the
// Legendre rule uses the predicted count; other rules double J until the
// 64-point scalar probe passes (cap 2^22).
LCUPlan plan_complex_pole(cplx z, double eps, SpectralInterval iv, std::optional<int> J = std::nullopt,
                          ComplexRule rule = ComplexRule::Legendre);

struct RealPoleOptions {
    std::optional<int> L_y;
    std::optional<int> L_q;
    YRule y_rule = YRule::Trapezoidal;
    QRule q_rule = QRule::Legendre;
};

// Real pole outside [lo, hi] via the Gaussian-kernel double integral.
LCUPlan plan_real_pole(double a, SpectralInterval iv, double eps, const RealPoleOptions& opt = {});

// (z - H)^{-m} through the weighted Laplace integral on [0, T_m].
LCUPlan plan_repeated_pole(cplx z, int m, double eps, SpectralInterval iv, std::optional<int> J = std::nullopt);

// Gamma(m, b) tail cut: e^{-x} sum_{k<m} x^k/k! = eps b^m / 2, returns x/b.
double tmax_repeated(double b, int m, double eps);

// Sorts by time and merges exactly equal times by summing weights.
LCUPlan merge_duplicate_times(LCUPlan plan);

// sum_j x_j e^{-i E_n t_j} for each energy, compensated summation.
CVector plan_values(const LCUPlan& plan, const RVector& energies);
cplx plan_scalar(const LCUPlan& plan, double lambda);

// max over 64 equispaced probe points of |plan(lambda) - target(lambda)|.
double plan_probe_error(const LCUPlan& plan, SpectralInterval iv, const std::function<cplx(double)>& target,
                        int points = 64);

// Exact 2-norm error against a spectral target: max_n |plan(E_n) - f(E_n)|.
double plan_error_spectral(const LCUPlan& plan, const RVector& energies, const std::function<cplx(double)>& target);

enum class PropagatorKind { Exact, Trotter };

struct PropagatorChoice {
    PropagatorKind kind = PropagatorKind::Exact;
    TrotterConfig trotter;
};

CMatrix evaluate_plan_exact(const LCUPlan& plan, const HermitianOperator& op);
CMatrix evaluate_plan(const LCUPlan& plan, const TrotterPropagator& prop);
CMatrix evaluate_plan(const LCUPlan& plan, const SplitHamiltonian& split, const PropagatorChoice& choice);

}  // namespace qrt
