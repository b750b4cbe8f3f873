#include "qrt/propagators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "qrt/errors.hpp"

namespace qrt {

namespace {

// e^{-i phi} - 1 without cancellation.
cplx expm1_phase(double phi)
{
    const double s = std::sin(0.5 * phi);
    return {-2.0 * s * s, -std::sin(phi)};
}

}  // namespace

CMatrix evolve_exact(const HermitianOperator& op, double t)
{
    const RVector& e = op.eigenvalues();
    CVector vals(e.size());
    for (Eigen::Index n = 0; n < e.size(); ++n) vals[n] = std::polar(1.0, -e[n] * t);
    return apply_spectral(op, vals);
}

TrotterPropagator::TrotterPropagator(const SplitHamiltonian& split, TrotterConfig cfg) : cfg_(cfg)
{
    if (!(cfg_.dt > 0.0)) throw ConfigError("trotter: dt must be positive");
    if (cfg_.order != 1) throw ConfigError("trotter: only first order is supported");
    const CMatrix& a1 = split.h1.matrix();
    const Eigen::Index n = a1.rows();
    CMatrix off = a1;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > 1e-14) throw ConfigError("trotter: h1 must be diagonal");
    h1_diag_ = a1.diagonal().real();
    h2_eval_ = split.h2.eigenvalues();
    h2_evec_ = split.h2.eigenvectors();

    // F - I = (D1 - I) E2 + (E2 - I)
    CVector d1m(n), e2m(n), e2(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        d1m[k] = expm1_phase(h1_diag_[k] * cfg_.dt);
        e2m[k] = expm1_phase(h2_eval_[k] * cfg_.dt);
        e2[k] = 1.0 + e2m[k];
    }
    const CMatrix E2 = h2_evec_ * e2.asDiagonal() * h2_evec_.adjoint();
    const CMatrix E2m = h2_evec_ * e2m.asDiagonal() * h2_evec_.adjoint();
    const CMatrix A = d1m.asDiagonal() * E2 + E2m;

    Eigen::ComplexSchur<CMatrix> schur(A);
    if (schur.info() != Eigen::Success) {
        std::ostringstream os;
        os << "trotter: Schur decomposition failed for a " << n << "x" << n << " step factor";
        throw NumericalError(os.str());
    }
    uf_ = schur.matrixU();
    theta_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const cplx alpha = schur.matrixT()(k, k);
        theta_[k] = std::atan2(alpha.imag(), 1.0 + alpha.real());
    }
}

void TrotterPropagator::split_time(double t, double& m, double& d) const
{
    m = std::floor(t / cfg_.dt);
    d = t - m * cfg_.dt;
    if (d < 0.0) {
        m -= 1.0;
        d = t - m * cfg_.dt;
    }
}

CMatrix TrotterPropagator::variable_step(double d) const
{
    const Eigen::Index n = dim();
    CVector p1(n), p2(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        p1[k] = std::polar(1.0, -h1_diag_[k] * d);
        p2[k] = std::polar(1.0, -h2_eval_[k] * d);
    }
    return p1.asDiagonal() * (h2_evec_ * p2.asDiagonal() * h2_evec_.adjoint());
}

CMatrix TrotterPropagator::step_factor() const { return variable_step(cfg_.dt); }

CMatrix TrotterPropagator::evolve(double t) const
{
    if (t < 0.0) throw ConfigError("evolve_trotter: negative time; conjugate the |t| evolution instead");
    return weighted_sum({t}, {cplx(1.0, 0.0)});
}

CMatrix TrotterPropagator::positive_sum(const std::vector<double>& times, const std::vector<cplx>& weights) const
{
    // sum_j w_j U_F L^{M_j} U_F^dag D1(d_j) V2 P2(d_j) V2^dag
    //   = U_F [ sum_j w_j L^{M_j} (U_F^dag D1(d_j) V2) P2(d_j) ] V2^dag
    const Eigen::Index n = dim();
    const CMatrix ufh = uf_.adjoint();
    CMatrix acc = CMatrix::Zero(n, n);
    CMatrix w(n, n);
    CVector lam(n), p1(n), p2(n);
    for (std::size_t j = 0; j < times.size(); ++j) {
        double m = 0.0, d = 0.0;
        split_time(times[j], m, d);
        for (Eigen::Index k = 0; k < n; ++k) {
            lam[k] = std::polar(1.0, std::fmod(m * theta_[k], 2.0 * M_PI));
            p1[k] = std::polar(1.0, -h1_diag_[k] * d);
            p2[k] = std::polar(1.0, -h2_eval_[k] * d);
        }
        w.noalias() = ufh * (p1.asDiagonal() * h2_evec_);
        acc.noalias() += weights[j] * (lam.asDiagonal() * w * p2.asDiagonal());
    }
    return uf_ * acc * h2_evec_.adjoint();
}

CMatrix TrotterPropagator::weighted_sum(const std::vector<double>& times, const std::vector<cplx>& weights) const
{
    if (times.size() != weights.size()) throw ConfigError("trotter: times and weights differ in length");
    std::vector<double> tp, tn;
    std::vector<cplx> wp, wn;
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (times[j] >= 0.0) {
            tp.push_back(times[j]);
            wp.push_back(weights[j]);
        } else {
            tn.push_back(-times[j]);
            wn.push_back(std::conj(weights[j]));
        }
    }
    CMatrix out = CMatrix::Zero(dim(), dim());
    if (!tp.empty()) out += positive_sum(tp, wp);
    if (!tn.empty()) out += positive_sum(tn, wn).adjoint();
    return out;
}

CMatrix evolve_trotter(const SplitHamiltonian& split, double t, const TrotterConfig& cfg)
{
    if (t < 0.0) throw ConfigError("evolve_trotter: negative time; conjugate the |t| evolution instead");
    TrotterPropagator prop(split, cfg);
    return prop.evolve(t);
}

}  // namespace qrt
