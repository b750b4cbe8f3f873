#include "qrt/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include "qrt/errors.hpp"

namespace qrt {

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::MFIM: return "mfim";
    case ModelKind::TFIM: return "tfim";
    case ModelKind::HeisenbergChain: return "heisenberg_chain";
    case ModelKind::HeisenbergTriangular2D: return "heisenberg_triangular";
    case ModelKind::HeisenbergGrid3D: return "heisenberg_grid3d";
    }
    return "unknown";
}

ModelKind parse_model(const std::string& name)
{
    if (name == "mfim") return ModelKind::MFIM;
    if (name == "tfim") return ModelKind::TFIM;
    if (name == "heisenberg_chain") return ModelKind::HeisenbergChain;
    if (name == "heisenberg_triangular") return ModelKind::HeisenbergTriangular2D;
    if (name == "heisenberg_grid3d") return ModelKind::HeisenbergGrid3D;
    throw ConfigError("unknown model '" + name + "'");
}

int site_count(const SpinModelConfig& cfg)
{
    switch (cfg.model) {
    case ModelKind::MFIM:
    case ModelKind::TFIM:
    case ModelKind::HeisenbergChain: return cfg.sites;
    case ModelKind::HeisenbergTriangular2D: return cfg.lx * cfg.ly;
    case ModelKind::HeisenbergGrid3D: return cfg.lx * cfg.ly * cfg.lz;
    }
    return 0;
}

namespace {

using Edge = std::pair<int, int>;

void check_sites(int n)
{
    if (n < 1) throw ConfigError("model: lattice must contain at least one site");
    if (n > kMaxSites) {
        std::ostringstream os;
        os << "model: " << n << " sites exceeds the dense cap of " << kMaxSites;
        throw ConfigError(os.str());
    }
}

inline int zval(std::size_t state, int site, int n) { return (state >> (n - 1 - site)) & 1U ? -1 : 1; }
inline std::size_t flip_mask(int site, int n) { return std::size_t{1} << (n - 1 - site); }

SplitHamiltonian finish(CMatrix h1, CMatrix h2, bool rescale)
{
    CMatrix total = h1 + h2;
    HermitianOperator raw(total);
    double scale = 1.0;
    if (rescale) {
        scale = raw.norm2();
        if (!(scale > 0.0)) throw ConfigError("model: zero Hamiltonian cannot be rescaled");
        h1 /= scale;
        h2 /= scale;
        CMatrix scaled = h1 + h2;
        RVector e = raw.eigenvalues() / scale;
        CMatrix v = raw.eigenvectors();
        return {HermitianOperator(std::move(h1)), HermitianOperator(std::move(h2)),
                HermitianOperator(std::move(scaled), std::move(e), std::move(v)), scale};
    }
    return {HermitianOperator(std::move(h1)), HermitianOperator(std::move(h2)), raw, scale};
}

std::vector<Edge> chain_edges(int n, bool periodic)
{
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    if (periodic && n >= 3) edges.emplace_back(n - 1, 0);
    return edges;
}

void add_edge(std::set<Edge>& edges, int a, int b)
{
    if (a == b) return;
    edges.insert({std::min(a, b), std::max(a, b)});
}

std::vector<Edge> triangular_edges(int lx, int ly, bool periodic)
{
    std::set<Edge> edges;
    auto id = [lx](int x, int y) { return y * lx + x; };
    const int dirs[3][2] = {{1, 0}, {0, 1}, {1, 1}};
    for (int y = 0; y < ly; ++y) {
        for (int x = 0; x < lx; ++x) {
            for (const auto& d : dirs) {
                int nx = x + d[0], ny = y + d[1];
                if (periodic) {
                    nx %= lx;
                    ny %= ly;
                } else if (nx >= lx || ny >= ly) {
                    continue;
                }
                add_edge(edges, id(x, y), id(nx, ny));
            }
        }
    }
    return {edges.begin(), edges.end()};
}

std::vector<Edge> grid3d_edges(int lx, int ly, int lz, bool periodic)
{
    std::set<Edge> edges;
    auto id = [lx, ly](int x, int y, int z) { return (z * ly + y) * lx + x; };
    const int dirs[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int z = 0; z < lz; ++z)
        for (int y = 0; y < ly; ++y)
            for (int x = 0; x < lx; ++x)
                for (const auto& d : dirs) {
                    int nx = x + d[0], ny = y + d[1], nz = z + d[2];
                    if (periodic) {
                        nx %= lx;
                        ny %= ly;
                        nz %= lz;
                    } else if (nx >= lx || ny >= ly || nz >= lz) {
                        continue;
                    }
                    add_edge(edges, id(x, y, z), id(nx, ny, nz));
                }
    return {edges.begin(), edges.end()};
}

}  // namespace

SplitHamiltonian build(const SpinModelConfig& cfg)
{
    if (cfg.model != ModelKind::MFIM && cfg.model != ModelKind::TFIM) return heisenberg(cfg);
    const int n = cfg.sites;
    check_sites(n);
    const double h = cfg.model == ModelKind::TFIM ? 0.0 : cfg.h;
    const double g = cfg.g;
    const std::size_t dim = std::size_t{1} << n;
    const auto edges = chain_edges(n, cfg.periodic);

    CMatrix h1 = CMatrix::Zero(dim, dim);
    CMatrix h2 = CMatrix::Zero(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (const auto& [i, j] : edges) diag -= zval(s, i, n) * zval(s, j, n);
        for (int i = 0; i < n; ++i) diag -= h * zval(s, i, n);
        h1(s, s) = diag;
        if (g != 0.0)
            for (int i = 0; i < n; ++i) h2(s ^ flip_mask(i, n), s) -= g;
    }
    return finish(std::move(h1), std::move(h2), cfg.rescale);
}

SplitHamiltonian heisenberg(const SpinModelConfig& cfg)
{
    std::vector<Edge> edges;
    int n = 0;
    switch (cfg.model) {
    case ModelKind::HeisenbergChain:
        n = cfg.sites;
        check_sites(n);
        edges = chain_edges(n, cfg.periodic);
        break;
    case ModelKind::HeisenbergTriangular2D:
        if (cfg.lx < 1 || cfg.ly < 1) throw ConfigError("heisenberg: triangular lattice needs lx, ly >= 1");
        n = cfg.lx * cfg.ly;
        check_sites(n);
        edges = triangular_edges(cfg.lx, cfg.ly, cfg.periodic);
        break;
    case ModelKind::HeisenbergGrid3D:
        if (cfg.lx < 1 || cfg.ly < 1 || cfg.lz < 1) throw ConfigError("heisenberg: grid needs lx, ly, lz >= 1");
        n = cfg.lx * cfg.ly * cfg.lz;
        check_sites(n);
        edges = grid3d_edges(cfg.lx, cfg.ly, cfg.lz, cfg.periodic);
        break;
    default: throw ConfigError("heisenberg: model '" + to_string(cfg.model) + "' is not a Heisenberg lattice");
    }
    const std::size_t dim = std::size_t{1} << n;
    CMatrix h1 = CMatrix::Zero(dim, dim);
    CMatrix h2 = CMatrix::Zero(dim, dim);
    for (std::size_t s = 0; s < dim; ++s) {
        double diag = 0.0;
        for (const auto& [i, j] : edges) {
            const int zi = zval(s, i, n), zj = zval(s, j, n);
            diag += zi * zj;
            // XX + YY maps |01> <-> |10> with amplitude 2
            if (zi != zj) h2(s ^ flip_mask(i, n) ^ flip_mask(j, n), s) += 2.0;
        }
        for (int i = 0; i < n; ++i) diag += cfg.h * zval(s, i, n);
        h1(s, s) = diag;
    }
    return finish(std::move(h1), std::move(h2), cfg.rescale);
}

}  // namespace qrt
