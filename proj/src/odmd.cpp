#include "qrt/odmd.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qrt/errors.hpp"

namespace qrt {

void ODMDConfig::validate() const
{
    if (!(dtau > 0.0)) throw ConfigError("odmd.dtau must be positive");
    if (n_energies < 1) throw ConfigError("odmd.n_energies must be >= 1");
    if (n_rows < n_energies + 1) throw ConfigError("odmd.n_rows must be >= n_energies + 1");
    if (n_steps < 2 * n_rows) throw ConfigError("odmd.n_steps must be >= 2 * n_rows");
    if (!(threshold >= 0.0 && threshold < 1.0)) throw ConfigError("odmd.threshold must lie in [0, 1)");
    if (!(noise_sigma >= 0.0)) throw ConfigError("odmd.noise_sigma must be nonnegative");
}

ObservableTrace synthesize_trace(const RVector& spectrum, const std::vector<double>& p,
                                 const std::optional<RationalSpec>& filter, const ODMDConfig& cfg)
{
    cfg.validate();
    if (static_cast<Eigen::Index>(p.size()) != spectrum.size())
        throw ConfigError("synthesize_trace: overlap count does not match the spectrum");
    CVector w(spectrum.size());
    for (Eigen::Index n = 0; n < spectrum.size(); ++n) w[n] = p[n];
    ObservableTrace tr;
    if (filter) {
        w = w.cwiseProduct(eval_rational_spectral(*filter, spectrum));
        tr.filtered = true;
        tr.filter_label = filter->label;
    }
    tr.values.resize(cfg.n_steps);
    for (int j = 0; j < cfg.n_steps; ++j) {
        const double tau = j * cfg.dtau;
        cplx acc = 0.0;
        for (Eigen::Index n = 0; n < spectrum.size(); ++n) acc += w[n] * std::polar(1.0, -spectrum[n] * tau);
        tr.values[j] = acc;
    }
    if (cfg.noise_sigma > 0.0) {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> nd(0.0, cfg.noise_sigma);
        for (int j = 0; j < cfg.n_steps; ++j) {
            const double re = nd(rng);
            const double im = nd(rng);
            tr.values[j] += cplx(re, im);
        }
    }
    return tr;
}

SystemMatrix solve_system_matrix(const CVector& trace, int n_samples, const ODMDConfig& cfg)
{
    const int rows = cfg.n_rows;
    const int cols = n_samples - rows;
    if (cols < 1 || n_samples > trace.size()) {
        std::ostringstream os;
        os << "solve_system_matrix: " << n_samples << " samples too short for " << rows << " Hankel rows";
        throw ConfigError(os.str());
    }
    CMatrix X(rows, cols), Xp(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) {
            X(i, k) = trace[i + k];
            Xp(i, k) = trace[i + k + 1];
        }
    Eigen::BDCSVD<CMatrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    if (s.size() == 0 || !(s[0] > 0.0)) throw NumericalError("solve_system_matrix: Hankel matrix is zero");
    int r = 0;
    while (r < s.size() && s[r] >= cfg.threshold * s[0]) ++r;
    if (r == 0) throw NumericalError("solve_system_matrix: all singular values thresholded");
    const CMatrix U = svd.matrixU().leftCols(r);
    const CMatrix V = svd.matrixV().leftCols(r);
    RVector sinv = s.head(r).cwiseInverse();
    SystemMatrix out;
    out.B = Xp * V * sinv.asDiagonal() * U.adjoint();
    out.rank = r;
    return out;
}

SystemMatrix solve_system_matrix(const ObservableTrace& trace, const ODMDConfig& cfg)
{
    return solve_system_matrix(trace.values, static_cast<int>(trace.values.size()), cfg);
}

EnergyEstimate extract_energies(const CMatrix& B, double dtau, int n_energies)
{
    Eigen::ComplexEigenSolver<CMatrix> es(B, false);
    if (es.info() != Eigen::Success) throw NumericalError("extract_energies: eigensolver failed");
    EnergyEstimate est;
    std::vector<double> all;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const cplx lam = es.eigenvalues()[i];
        if (std::abs(lam) < 0.2) continue;
        all.push_back(-std::arg(lam) / dtau);
    }
    std::sort(all.begin(), all.end());
    if (static_cast<int>(all.size()) > n_energies) all.resize(n_energies);
    est.complete = static_cast<int>(all.size()) == n_energies;
    est.energies = std::move(all);
    return est;
}

std::vector<ODMDRecord> run_odmd_sweep(const ObservableTrace& trace, const RVector& exact_low, const ODMDConfig& cfg)
{
    cfg.validate();
    if (exact_low.size() < cfg.n_energies) throw ConfigError("run_odmd_sweep: need n_energies exact reference values");
    if (trace.values.size() < cfg.n_steps) throw ConfigError("run_odmd_sweep: trace shorter than n_steps");
    std::vector<ODMDRecord> out;
    for (int j = cfg.n_rows + 2; j <= cfg.n_steps; ++j) {
        const SystemMatrix sm = solve_system_matrix(trace.values, j, cfg);
        const EnergyEstimate est = extract_energies(sm.B, cfg.dtau, cfg.n_energies);
        ODMDRecord rec;
        rec.j = j;
        rec.rank = sm.rank;
        rec.errors.assign(cfg.n_energies, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < est.energies.size(); ++i) rec.errors[i] = std::fabs(est.energies[i] - exact_low[i]);
        out.push_back(std::move(rec));
    }
    return out;
}

double filter_threshold_between(const RVector& spectrum, int n_pass)
{
    if (n_pass < 1 || n_pass >= spectrum.size()) throw ConfigError("filter_threshold_between: n_pass out of range");
    return 0.5 * (spectrum[n_pass - 1] + spectrum[n_pass]);
}

double composition_ratio(double E, double delta_E, double E_minus, double E_plus)
{
    if (!(E_plus > E_minus)) throw ConfigError("composition_ratio: require E_minus < E_plus");
    const double xi = (E + delta_E - E_minus) / (E_plus - E_minus);
    if (!(xi > 0.0 && xi < 1.0)) throw ConfigError("composition_ratio: ratio outside (0, 1)");
    return xi;
}

double composed_threshold(double target, int D, double delta_E, double E_minus, double E_plus)
{
    if (D < 0) throw ConfigError("composed_threshold: D must be >= 0");
    if (!(target > E_minus && target < E_plus - delta_E))
        throw ConfigError("composed_threshold: target outside the spectral bounds");
    auto f = [&](double E) {
        const double xi = (E + delta_E - E_minus) / (E_plus - E_minus);
        return E_minus + std::pow(xi, D) * (E - E_minus) - target;
    };
    // f is increasing in E on (E_minus, E_plus - delta_E)
    double lo = target, hi = E_plus - delta_E;
    if (f(lo) > 0.0 || f(hi) < 0.0) throw NumericalError("composed_threshold: no bracketing threshold");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace qrt
