// quadrature.hpp: Gauss/trapezoidal rules, truncation parameters and cost predictors.
#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace qrt {

enum class RuleKind { Trapezoidal, GaussLegendre, GaussLaguerre, GaussHermite };

std::string to_string(RuleKind kind);

struct QuadratureRule {
    RuleKind kind = RuleKind::GaussLegendre;
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = -1.0;
    double hi = 1.0;

    std::size_t size() const { return nodes.size(); }
};

// Roots of P_J on (-1, 1) by Newton iteration, 1 <= J <= 10000.
QuadratureRule gauss_legendre(int J);

// Golub-Welsch eigenvalues, Newton-polished, with weights from the
// orthonormal recurrence. Weight function e^{-t} on (0, inf).
QuadratureRule gauss_laguerre(int J);

// Weight function e^{-t^2} on the real line.
QuadratureRule gauss_hermite(int J);

// Equidistant nodes including both endpoints. With flat_weights every
// weight is (hi - lo)/J instead of the endpoint-halved composite rule.
QuadratureRule trapezoidal(int J, double lo, double hi, bool flat_weights = false);

// Affine map of a Legendre rule onto [lo, hi].
QuadratureRule legendre_on(int J, double lo, double hi);

struct CostPrediction {
    long long J = 1;
    double t_max = 0.0;
    double t_tot = 0.0;
    long long L_y = 0;  // nonzero only for real-pole predictions
    long long L_q = 0;
};

// (1/b) log(2/(eps b)).
double tmax_complex(double b, double eps);

// Complex pole with Legendre rule; a_plus = max_n |Re z - E_n|.
CostPrediction predict_cost_complex(std::complex<double> z, double a_plus, double eps);

// Real pole with Legendre(q) and trapezoidal(y). J is the product of the
// two ceiled node-count brackets.
CostPrediction predict_cost_real(double a_minus, double a_plus, double eps);

// Truncation parameters for the real-pole double integral, eps1 = eps/2.
double ymax(double a_minus, double eps, bool display_variant = false);
double qmax(double a_minus, double eps);

// Node counts from the error split eps1 = eps/2, eps2 = eps3 = eps/4.
struct RealPoleFactors {
    long long L_y;
    long long L_q;
};
RealPoleFactors real_pole_factors(double a_minus, double a_plus, double eps);

CostPrediction predict_cost_zolotarev(int K, const std::vector<double>& b, double gamma_K, double eps,
                                      double hnorm);

CostPrediction predict_cost_iterative(int D, double xi, int K, double gamma_K, double C_K, double b_minus,
                                      double eps, double hnorm);

}  // namespace qrt
