// rational_filters.hpp: partial fractions, Zolotarev sign/step filters and
// iterative filter composition.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qrt/linalg.hpp"
#include "qrt/resolvent_continuous.hpp"

namespace qrt {

struct RationalTerm {
    cplx pole;
    std::vector<cplx> coeffs;  // coeffs[m-1] multiplies (pole - w)^{-m}
};

struct RationalSpec {
    std::vector<RationalTerm> terms;
    std::vector<cplx> polynomial_part;  // beta_0 + beta_1 w + ...
    std::string label;

    std::size_t total_multiplicity() const;
};

// Trapezoidal rule on the circle |z - center| = radius with K nodes.
RationalSpec discretize_contour(cplx center, double radius, int K, const std::function<cplx(cplx)>& f);

// Poles with |Im z| < 1e-12.
int count_real_poles(const RationalSpec& spec);

cplx eval_rational_scalar(const RationalSpec& spec, cplx omega);
CVector eval_rational_spectral(const RationalSpec& spec, const RVector& energies);
// Oracle path: each term through resolvent_exact.
CMatrix eval_rational_matrix(const RationalSpec& spec, const HermitianOperator& op);

// ----- Zolotarev -----

struct ZolotarevFilter {
    int K = 0;
    double omega_bar = 0.0;
    std::vector<double> b;  // pole heights, ascending
    std::vector<double> c;  // residues normalised to sum 1
    double gamma_K = 0.0;
    double err_bound = 0.0;  // 4 exp(-K pi^2 / (2 log(4/omega_bar)))
    double err = 0.0;        // measured sup error on the window
    int alternations = 0;    // on the full window [-1,-w] u [w,1]
};

double zolotarev_err_bound(int K, double omega_bar);

// Elliptic construction, certified by equioscillation.
ZolotarevFilter zolotarev(int K, double omega_bar);

// r_K(w) = 2 gamma sum_k c_k w / (w^2 + b_k^2).
double zolotarev_eval(const ZolotarevFilter& z, double omega);

// Poles +-i b_k, coefficients -gamma c_k.
RationalSpec zolotarev_spec(const ZolotarevFilter& z);

struct EquioscillationReport {
    std::vector<double> points;  // extrema of r_K - 1 on [w, 1]
    std::vector<double> values;
    int alternations = 0;        // counted on [w, 1]
    double max_abs = 0.0;
    double min_abs = 0.0;
};

EquioscillationReport equioscillation(const ZolotarevFilter& z);

// Mean variance 2 sum_k c_k / b_k^2 of the mixture density rho_K.
double zolotarev_mean_gamma(const ZolotarevFilter& z);

// ----- step filter -----

// r_E(w) = (1 - r_K((w - E)/s))/2 with s = (E_plus - E_minus)/2.
// Transition half-width is omega_bar * s.
RationalSpec step_filter(const ZolotarevFilter& z, double E, double E_minus, double E_plus);
double step_filter_delta(const ZolotarevFilter& z, double E_minus, double E_plus);

struct ChebyshevSeries {
    std::vector<double> coeffs;
    double eval(double x) const;
};

// L2 projection of Theta(E - x) (one below E) onto T_0..T_degree.
ChebyshevSeries chebyshev_step(int degree, double E);

// ----- stochastic Zolotarev -----

// Pole index k drawn from {c_k}; inner widths either the deterministic
// biased grid of size G or G exponential draws. a = 0.
GaussianMixturePlan zolotarev_stochastic(const ZolotarevFilter& z, const std::vector<int>& per_pole_G, int N_MC,
                                         std::uint64_t seed, bool unbiased_inner = false);

// Sign estimate 2 Im A(E) of a stochastic plan.
RVector stochastic_sign_values(const GaussianMixturePlan& plan, const RVector& energies);

// ----- composition -----

// prod_{d=0}^{D} base(f_{xi^d}(w)) with f_xi(w) = (w - E_minus)/xi + E_minus,
// reduced to (D+1) * terms(base) simple poles by the resolvent identity.
RationalSpec compose_iterative(const RationalSpec& base, double xi, int D, double E_minus);

// Direct product of the D+1 scaled filters at one point.
cplx eval_composed_direct(const RationalSpec& base, double xi, int D, double E_minus, cplx omega);

double spectral_range_reduction(double xi, int D);
int depth_for_range(double xi, double delta_E, double E_minus, double E_plus);

// ----- Moebius gap -----

struct MoebiusMap {
    double m11, m12, m21, m22;
    double apply(double x) const { return (m11 * x + m12) / (m21 * x + m22); }
};

struct MoebiusGap {
    double omega_bar;
    MoebiusMap map;  // [wa, wb] -> [-1, -omega_bar], [wc, wd] -> [omega_bar, 1]
};

MoebiusGap moebius_gap(double wa, double wb, double wc, double wd);

}  // namespace qrt
