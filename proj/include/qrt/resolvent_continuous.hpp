// resolvent_continuous.hpp: Gaussian-mixture emulation of continuous-time LCU.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qrt/linalg.hpp"
#include "qrt/resolvent_discrete.hpp"

namespace qrt {

// int phi_g(q; gamma) e^{-i lam |q|} dq = e^{-x^2} - i (2/sqrt(pi)) F(x),
// x = sqrt(gamma/2) lam, F the Dawson integral. Equals
// e^{-gamma lam^2/2} (1 - i erfi(x)) without the overflow of erfi.
cplx gaussian_block_scalar(double lam, double gamma);

// Density (b^2/2) e^{-b^2 gamma/2} of the Gaussian variance.
double mixing_density(double gamma, double b);

// Uniform in [0, 1) with 53 random bits.
double uniform01(std::mt19937_64& rng);

// G exponential draws with mean 2/b^2 by inverse CDF.
std::vector<double> sample_mixing_density(double b, int G, std::uint64_t seed);

enum class MixtureKind { UnbiasedMC, BiasedDeterministic, GammaQuantile, StochasticZolotarev };

std::string to_string(MixtureKind k);

struct MixtureComponent {
    double gamma = 0.0;
    cplx weight;
    double center = 0.0;  // displaced Gaussian mean, GammaQuantile only
    double b = 0.0;       // pole height the variance belongs to
};

struct GaussianMixturePlan {
    std::vector<MixtureComponent> components;
    MixtureKind kind = MixtureKind::UnbiasedMC;
    Pole pole;
    std::optional<std::uint64_t> seed;
    double duration = 1.0;  // simulation time per block; widths scale as 1/duration^2
    double shift = 0.0;     // energies enter as E - shift
};

struct MixtureMetrics {
    double t_max = 0.0;
    double t_tot = 0.0;
    std::size_t components = 0;
};

MixtureMetrics mixture_metrics(const GaussianMixturePlan& plan);

// R(z) = (-i/b) E_mix[block], one MC draw per component.
GaussianMixturePlan plan_complex_pole_mc(cplx z, int G, std::uint64_t seed, double duration = 1.0);

// Deterministic widths gamma_j = -(2/b^2) log((2j - 1)/(2G)).
GaussianMixturePlan plan_complex_pole_biased(cplx z, int G, double duration = 1.0);

// (z - H)^{-m} with G equal-weight displaced Gaussians matched to Gamma(m, b).
GaussianMixturePlan repeated_pole_gamma_mixture(cplx z, int m, int G);

// Inverse of the Gamma(m, 1) CDF.
double gamma_quantile(int m, double p);

CVector mixture_values(const GaussianMixturePlan& plan, const RVector& energies);
CMatrix evaluate_mixture(const GaussianMixturePlan& plan, const HermitianOperator& op);

struct ReferenceState {
    std::vector<double> p;
};

// p0 on the ground state, the rest spread uniformly.
ReferenceState reference_state(std::size_t dim, double p0);
void validate(const ReferenceState& ref);

double success_probability_resolvent(const ReferenceState& ref, const RVector& spectrum, cplx z);

// energies are shifted by a before use.
double success_probability_block(const ReferenceState& ref, const RVector& spectrum, double a, double gamma);

// ||A_j phi||^2 by explicit filtering in the eigenbasis.
double success_probability_statevector(const ReferenceState& ref, const CVector& filter_values);

struct RealPoleContinuous {
    CMatrix approx;
    CVector values;           // R_eps(E_n)
    double success_prob = 0;  // exact post-selection probability
    double success_prob_leading = 0;  // closed-form leading-order expression
    double q_max = 0;         // uniform width (uniform/Gaussian)
    double gamma0 = 0;        // Gaussian width (double Gaussian)
};

// Uniform q-ancilla on [0, q] and Gaussian y-ancilla.
// R_eps(E) = erf(|d| q / sqrt2)/d with d = a - E, q = (2/a^-) sqrt(log(1/(eps a^-))).
double uniform_gaussian_qmax(double a_minus, double eps);
double uniform_gaussian_value(double d, double q);
RealPoleContinuous real_pole_uniform_gaussian(double a, SpectralInterval iv, double eps, const ReferenceState& ref,
                                              const HermitianOperator& op);

// Two Gaussian ancillae, gamma0 = 1/(eps a^-^3). R_eps(E) = sgn(d)/sqrt(d^2 + 1/gamma0).
double double_gaussian_value(double d, double gamma0);
RealPoleContinuous real_pole_double_gaussian(double a, SpectralInterval iv, double eps, const ReferenceState& ref,
                                             const HermitianOperator& op);

}  // namespace qrt
