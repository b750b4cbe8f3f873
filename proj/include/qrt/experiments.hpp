// experiments.hpp: figure reproductions as plain tables, shared by the CLI and
// the acceptance suite.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrt/hamiltonians.hpp"
#include "qrt/odmd.hpp"
#include "qrt/rational_filters.hpp"
#include "qrt/resolvent_continuous.hpp"
#include "qrt/resolvent_discrete.hpp"

namespace qrt {

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct ExperimentOutput {
    std::vector<Table> tables;
    std::vector<std::pair<std::string, double>> summary;

    const Table& table(const std::string& name) const;
    double value(const std::string& key) const;
};

// Header row of column names, then one line per row in 17-significant-digit
// scientific notation.
std::string to_csv(const Table& table);

// QRT_SIM_THREADS, default hardware concurrency, at least 1.
int worker_count();

// Runs body(i) for i < n on worker_count() threads. Results must be written
// to per-index slots; the first exception is rethrown after joining.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Smallest count in [start, cap] with ok(count), assuming ok is monotone.
// Doubling then bisection until the bracket is within resolution * count;
// nullopt if cap fails.
std::optional<long long> minimal_count(const std::function<bool(long long)>& ok, long long start, long long cap,
                                       double resolution = 0.0);

SpinModelConfig mfim_config(int L);  // (h, g) = (1, 2/3), periodic, rescaled
SpinModelConfig tfim_config(int L);  // (h, g) = (0, 1), open, rescaled

SpectralInterval spectral_interval(const RVector& energies);

// ----- discrete-time complex poles (Fig 4, App C) -----

struct QuadratureSweepConfig {
    SpinModelConfig model = mfim_config(8);
    cplx z{-0.8, 0.1};
    double eps = 1e-6;
    PropagatorKind propagator = PropagatorKind::Exact;
    double trotter_dt = 0.0;  // 0 selects eps
    int trapezoidal_log2_cap = 22;
    int laguerre_log2_cap = 11;
    std::string prefix = "fig4";
};

// Tables <prefix>_{legendre,trapezoidal,laguerre}: cost_ratio, error, J, t_max.
// Summary: <rule>_crossing_cost, <rule>_min_error, trapezoidal_refinement_ratio.
ExperimentOutput run_quadrature_sweep(const QuadratureSweepConfig& cfg);

// ----- pole approach (Fig 5) -----

struct PoleApproachConfig {
    SpinModelConfig model = mfim_config(8);
    double eps = 1e-6;
    int k_max = 6;
    double offset_left = -0.8;
    double offset_right = 0.0;
    long long trapezoidal_cap = 1LL << 15;
    long long laguerre_cap = 1LL << 11;
};

struct MinimalPlan {
    long long J = 0;  // 0 when the cap was reached
    double cost_ratio = 0.0;
    double t_max = 0.0;
    double error = 0.0;
};

MinimalPlan minimal_complex_plan(cplx z, double eps, const RVector& energies, ComplexRule rule, long long cap);

// Tables fig5_left and fig5_right, one row per k with z = a + 2^{1-k} i.
ExperimentOutput run_pole_approach(const PoleApproachConfig& cfg);

// ----- real poles (Fig 6, Fig 7) -----

struct RealPoleSearch {
    long long L_y = 0;
    long long L_q = 0;
    double cost_ratio = 0.0;
    double t_max = 0.0;
    double error = 0.0;
    std::vector<std::vector<double>> curve;  // cost_ratio, error, L_y, L_q
};

// Smallest (L_y, L_q) reaching eps: each axis minimised with the other at a
// converged reference, then both raised by 5% steps until the joint plan passes.
RealPoleSearch search_real_pole(double a, double eps, const RVector& energies, YRule y_rule, QRule q_rule);

struct RealPoleSweepConfig {
    SpinModelConfig model = mfim_config(8);
    double a = -1.1;
    double eps = 1e-6;
};

// Tables fig6_q<rule>_y<rule>; summary <q>_<y>_crossing_cost.
ExperimentOutput run_real_pole_sweep(const RealPoleSweepConfig& cfg);

struct RealPoleApproachConfig {
    SpinModelConfig model = mfim_config(8);
    double eps = 1e-6;
    int k_min = 1;
    int k_max = 3;
};

// Table fig7: a = -1 - 2^{-k-1}, measured Legendre(q)+trapezoidal(y) cost and the predicted bound.
ExperimentOutput run_real_pole_approach(const RealPoleApproachConfig& cfg);

// ----- continuous time (Fig 9, Fig 10) -----

struct MixtureConvergenceConfig {
    SpinModelConfig model = mfim_config(8);
    cplx z{-0.8, 0.2};
    double eps = 1e-3;
    std::vector<int> G{4, 8, 16, 32, 64, 128, 256};
    int trials = 100;
    std::uint64_t seed = 1;
    double p0 = 0.4;
};

// Table fig9 (per G) and fig9_trials (per trial). Cost is sum_j 1/P_{A_j}
// normalised by the discrete-time t_max at eps.
ExperimentOutput run_mixture_convergence(const MixtureConvergenceConfig& cfg);

struct RealPoleContinuousConfig {
    SpinModelConfig model = mfim_config(8);
    double eps = 1e-3;
    int k_min = 0;
    int k_max = 4;
    double p0 = 0.4;
};

// Table fig10: a = -1 - 2^{-k-1}, uniform/Gaussian and Gaussian/Gaussian costs.
ExperimentOutput run_real_pole_continuous(const RealPoleContinuousConfig& cfg);

// ----- filters (Fig 11) -----

struct FilterComparisonConfig {
    int K = 4;
    double omega_bar = 0.2;
    int G = 8;
    int N_MC = 8;
    int trials = 32;
    std::uint64_t seed = 11;
    int points = 2001;
    std::vector<int> chebyshev_degrees{8, 16};
};

// Table fig11 over omega in [-1, 1]; the stochastic column is the trial with
// the smallest stop-band maximum on [2 omega_bar, 1].
ExperimentOutput run_filter_comparison(const FilterComparisonConfig& cfg);

// ----- ODMD (Fig 12) -----

struct ODMDExperimentConfig {
    SpinModelConfig model = tfim_config(8);
    ODMDConfig odmd{0.5, 400, 40, 1e-2, 1e-5, 7, 3};
    double threshold_unfiltered = 1e-1;
    double threshold_filtered = 1e-3;
    double p0 = 0.1;
    int K = 4;
    double delta_E = 0.1;
    int D = 3;
    double E_minus = -1.0;
    double E_plus = 1.0;
    std::optional<double> threshold_E;  // default: composed so the pass band holds n_energies states
    bool uniform_runs = true;
};

struct ComposedFilter {
    RationalSpec spec;
    double E = 0.0;
    double xi = 0.0;
    double target = 0.0;
};

ComposedFilter fig12_filter(const ODMDExperimentConfig& cfg, const RVector& spectrum);

// Tables odmd_unfiltered, odmd_filtered and, with uniform_runs,
// odmd_uniform_unfiltered, odmd_uniform_filtered. Columns j, E0_err, E1_err,
// E2_err, rank. Summary <table>_best_E0, _best_E12 (max of E1, E2),
// _best_all (max of all three), each minimised over j.
ExperimentOutput run_odmd_experiment(const ODMDExperimentConfig& cfg);

}  // namespace qrt
