// hamiltonians.hpp: spin-model builders and the Trotter splitting H = H1 + H2.
#pragma once

#include <string>

#include "qrt/linalg.hpp"

namespace qrt {

enum class ModelKind { MFIM, TFIM, HeisenbergChain, HeisenbergTriangular2D, HeisenbergGrid3D };

std::string to_string(ModelKind kind);
ModelKind parse_model(const std::string& name);

struct SpinModelConfig {
    ModelKind model = ModelKind::MFIM;
    int sites = 8;  // chain length; lattices use lx, ly, lz
    int lx = 0;
    int ly = 0;
    int lz = 0;
    double h = 1.0;
    double g = 2.0 / 3.0;
    bool periodic = true;
    bool rescale = true;
};

struct SplitHamiltonian {
    HermitianOperator h1;     // diagonal in the computational basis
    HermitianOperator h2;     // off-diagonal part
    HermitianOperator total;  // h1 + h2
    double scale = 1.0;       // divisor applied when rescaling
};

constexpr int kMaxSites = 14;

int site_count(const SpinModelConfig& cfg);

// Ising chains: -sum Z_i Z_{i+1} - h sum Z_i - g sum X_i. Site 0 is the
// most significant qubit of the basis index.
SplitHamiltonian build(const SpinModelConfig& cfg);

// sum over lattice edges of XX + YY + ZZ, plus h sum Z_i.
SplitHamiltonian heisenberg(const SpinModelConfig& cfg);

}  // namespace qrt
