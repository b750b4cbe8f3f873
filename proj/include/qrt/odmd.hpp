// odmd.hpp: observable dynamic mode decomposition on Hankel matrices.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrt/linalg.hpp"
#include "qrt/rational_filters.hpp"

namespace qrt {

struct ODMDConfig {
    double dtau = 0.5;
    int n_steps = 400;
    int n_rows = 40;
    double threshold = 1e-2;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    int n_energies = 3;

    void validate() const;
};

struct ObservableTrace {
    CVector values;
    bool filtered = false;
    std::string state_label;
    std::string filter_label;
};

// o(tau_j) = sum_n p_n [r(E_n)] e^{-i E_n tau_j} + noise on Re and Im.
ObservableTrace synthesize_trace(const RVector& spectrum, const std::vector<double>& p,
                                 const std::optional<RationalSpec>& filter, const ODMDConfig& cfg);

struct SystemMatrix {
    CMatrix B;
    int rank = 0;
};

// Least-squares shift operator X' ~ B X from the first n_samples entries,
// B = X' V S^+ U^H with singular values below threshold * sigma_max dropped.
SystemMatrix solve_system_matrix(const CVector& trace, int n_samples, const ODMDConfig& cfg);
SystemMatrix solve_system_matrix(const ObservableTrace& trace, const ODMDConfig& cfg);

struct EnergyEstimate {
    std::vector<double> energies;  // ascending
    bool complete = false;          // n_energies modes survived
};

EnergyEstimate extract_energies(const CMatrix& B, double dtau, int n_energies);

struct ODMDRecord {
    int j = 0;  // samples used
    std::vector<double> errors;  // |E~_i - E_i|, inf where missing
    int rank = 0;
};

// j = n_rows + 2 .. n_steps.
std::vector<ODMDRecord> run_odmd_sweep(const ObservableTrace& trace, const RVector& exact_low,
                                       const ODMDConfig& cfg);

// Step threshold midway between the n_pass-th and (n_pass+1)-th eigenvalue.
double filter_threshold_between(const RVector& spectrum, int n_pass);

// Composition ratio xi = (E + dE - E_minus)/(E_plus - E_minus).
double composition_ratio(double E, double delta_E, double E_minus, double E_plus);

// Base threshold E whose D-fold composition, with xi = composition_ratio(E, ...),
// places the innermost transition at target: E_minus + xi^D (E - E_minus) = target.
double composed_threshold(double target, int D, double delta_E, double E_minus, double E_plus);

}  // namespace qrt
