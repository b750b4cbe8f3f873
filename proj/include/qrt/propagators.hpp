// propagators.hpp: exact and first-order Trotter real-time evolution.
#pragma once

#include <vector>

#include "qrt/hamiltonians.hpp"
#include "qrt/linalg.hpp"

namespace qrt {

struct TrotterConfig {
    double dt = 1e-3;
    int order = 1;
};

CMatrix evolve_exact(const HermitianOperator& op, double t);

// (e^{-i H1 dt} e^{-i H2 dt})^M e^{-i H1 d} e^{-i H2 d} with M = floor(t/dt),
// d = t - M dt. Requires t >= 0.
CMatrix evolve_trotter(const SplitHamiltonian& split, double t, const TrotterConfig& cfg);

// Batch Trotter evaluator. The fixed-step factor F is diagonalised once
// through F - I, formed with expm1 so that its small eigenphases keep full
// relative precision; F^M is then exact up to that decomposition.
class TrotterPropagator {
public:
    TrotterPropagator(const SplitHamiltonian& split, TrotterConfig cfg);

    const TrotterConfig& config() const { return cfg_; }
    Eigen::Index dim() const { return h1_diag_.size(); }

    // Single evolution, t >= 0.
    CMatrix evolve(double t) const;

    // e^{-i H1 d} e^{-i H2 d}.
    CMatrix variable_step(double d) const;

    // The fixed-step factor F.
    CMatrix step_factor() const;

    // sum_j w_j U(t_j); negative times use U(-s) = U(s)^dagger.
    CMatrix weighted_sum(const std::vector<double>& times, const std::vector<cplx>& weights) const;

private:
    // Accumulates sum_j w_j Lambda^{M_j} U_F^dagger G(d_j) V2^{-1}-free core.
    CMatrix positive_sum(const std::vector<double>& times, const std::vector<cplx>& weights) const;
    void split_time(double t, double& m, double& d) const;

    TrotterConfig cfg_;
    RVector h1_diag_;
    RVector h2_eval_;
    CMatrix h2_evec_;
    CMatrix uf_;       // Schur vectors of F - I
    RVector theta_;    // eigenphases of F
};

}  // namespace qrt
