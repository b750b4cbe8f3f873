#include "qrt/linalg.hpp"

#include <cmath>
#include <sstream>

#include "qrt/errors.hpp"

namespace qrt {

HermitianOperator::HermitianOperator(CMatrix entries) : state_(std::make_shared<State>())
{
    if (entries.rows() != entries.cols() || entries.rows() < 1)
        throw ConfigError("HermitianOperator: matrix must be square and nonempty");
    const double dev = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-12) {
        std::ostringstream os;
        os << "HermitianOperator: matrix deviates from Hermitian by " << dev;
        throw ConfigError(os.str());
    }
    state_->a = std::move(entries);
}

HermitianOperator::HermitianOperator(CMatrix entries, RVector eigenvalues, CMatrix eigenvectors)
    : HermitianOperator(std::move(entries))
{
    if (eigenvalues.size() != dim() || eigenvectors.rows() != dim() || eigenvectors.cols() != dim())
        throw ConfigError("HermitianOperator: eigendecomposition shape mismatch");
    state_->e = std::move(eigenvalues);
    state_->v = std::move(eigenvectors);
    std::call_once(state_->once, [this] { state_->ready = true; });
}

void HermitianOperator::ensure_eig() const
{
    std::call_once(state_->once, [this] {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(state_->a);
        if (solver.info() != Eigen::Success) {
            std::ostringstream os;
            os << "eig: Hermitian eigensolver did not converge for a " << dim() << "x" << dim() << " matrix";
            throw NumericalError(os.str());
        }
        state_->e = solver.eigenvalues();
        state_->v = solver.eigenvectors();
        state_->ready = true;
    });
}

const RVector& HermitianOperator::eigenvalues() const
{
    ensure_eig();
    return state_->e;
}

const CMatrix& HermitianOperator::eigenvectors() const
{
    ensure_eig();
    return state_->v;
}

bool HermitianOperator::has_eig() const { return state_->ready; }

double HermitianOperator::norm2() const
{
    const RVector& e = eigenvalues();
    return std::max(std::fabs(e[0]), std::fabs(e[e.size() - 1]));
}

EigResult eig(const HermitianOperator& op) { return {op.eigenvalues(), op.eigenvectors()}; }

CMatrix apply_spectral(const HermitianOperator& op, const CVector& values)
{
    const CMatrix& v = op.eigenvectors();
    return v * values.asDiagonal() * v.adjoint();
}

CMatrix apply_function(const HermitianOperator& op, const std::function<cplx(double)>& f)
{
    const RVector& e = op.eigenvalues();
    CVector vals(e.size());
    for (Eigen::Index n = 0; n < e.size(); ++n) {
        vals[n] = f(e[n]);
        if (!std::isfinite(vals[n].real()) || !std::isfinite(vals[n].imag())) {
            std::ostringstream os;
            os << "apply_function: non-finite value at eigenvalue " << e[n];
            throw NumericalError(os.str());
        }
    }
    return apply_spectral(op, vals);
}

CMatrix resolvent_power_exact(const HermitianOperator& op, cplx z, int m)
{
    if (m < 1) throw ConfigError("resolvent_power_exact: multiplicity must be >= 1");
    const RVector& e = op.eigenvalues();
    const double tol = 1e-12 * std::max(op.norm2(), 1e-300);
    for (Eigen::Index n = 0; n < e.size(); ++n) {
        if (std::abs(z - e[n]) <= tol) {
            std::ostringstream os;
            os << "resolvent: z = " << z << " collides with eigenvalue " << e[n];
            throw NumericalError(os.str());
        }
    }
    return apply_function(op, [z, m](double x) { return std::pow(z - x, -m); });
}

CMatrix resolvent_exact(const HermitianOperator& op, cplx z) { return resolvent_power_exact(op, z, 1); }

double opnorm2(const CMatrix& m)
{
    if (m.size() == 0) return 0.0;
    const CMatrix g = m.rows() >= m.cols() ? CMatrix(m.adjoint() * m) : CMatrix(m * m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(g, Eigen::EigenvaluesOnly);
    const double top = solver.eigenvalues().maxCoeff();
    return std::sqrt(std::max(top, 0.0));
}

}  // namespace qrt
