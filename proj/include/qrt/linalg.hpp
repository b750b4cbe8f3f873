// linalg.hpp: dense Hermitian operators with a cached eigendecomposition.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>

namespace qrt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

class HermitianOperator {
public:
    // Rejects matrices that are not Hermitian to within 1e-12 entrywise.
    explicit HermitianOperator(CMatrix entries);
    // Adopts a known eigendecomposition (eigenvalues ascending).
    HermitianOperator(CMatrix entries, RVector eigenvalues, CMatrix eigenvectors);

    Eigen::Index dim() const { return state_->a.rows(); }
    const CMatrix& matrix() const { return state_->a; }

    // Populated on first use; safe for concurrent callers.
    const RVector& eigenvalues() const;
    const CMatrix& eigenvectors() const;
    bool has_eig() const;

    // max |E_n|, equal to the operator 2-norm.
    double norm2() const;

private:
    struct State {
        CMatrix a;
        RVector e;
        CMatrix v;
        std::once_flag once;
        bool ready = false;
    };
    void ensure_eig() const;
    std::shared_ptr<State> state_;
};

struct EigResult {
    const RVector& eigenvalues;
    const CMatrix& eigenvectors;
};

EigResult eig(const HermitianOperator& op);

// V diag(values) V^dagger.
CMatrix apply_spectral(const HermitianOperator& op, const CVector& values);

CMatrix apply_function(const HermitianOperator& op, const std::function<cplx(double)>& f);

// (z - H)^{-1}; rejects z within 1e-12 ||H|| of the spectrum.
CMatrix resolvent_exact(const HermitianOperator& op, cplx z);

// (z - H)^{-m}.
CMatrix resolvent_power_exact(const HermitianOperator& op, cplx z, int m);

// Largest singular value.
double opnorm2(const CMatrix& m);

}  // namespace qrt
