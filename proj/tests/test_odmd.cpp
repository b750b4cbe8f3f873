#include <doctest.h>

#include <limits>

#include "oracles.hpp"
#include "qrt/errors.hpp"
#include "qrt/hamiltonians.hpp"
#include "qrt/odmd.hpp"

using namespace qrt;

namespace {

ODMDConfig small_config(int n_rows, int n_steps, int n_energies, double threshold)
{
    ODMDConfig cfg;
    cfg.n_rows = n_rows;
    cfg.n_steps = n_steps;
    cfg.n_energies = n_energies;
    cfg.threshold = threshold;
    return cfg;
}

RVector tfim_spectrum(int L)
{
    SpinModelConfig m;
    m.model = ModelKind::TFIM;
    m.sites = L;
    m.h = 0.0;
    m.g = 1.0;
    m.periodic = false;
    return build(m).total.eigenvalues();
}

// Nonzero eigenvalues of B, sorted by phase.
std::vector<cplx> leading_eigenvalues(const CMatrix& B, int r)
{
    Eigen::ComplexEigenSolver<CMatrix> es(B);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
    ev.resize(r);
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) { return std::arg(a) < std::arg(b); });
    return ev;
}

}  // namespace

TEST_CASE("single mode trace")
{
    RVector E(1);
    E << -0.7;
    const ODMDConfig cfg = small_config(4, 20, 1, 1e-10);
    const ObservableTrace tr = synthesize_trace(E, {1.0}, std::nullopt, cfg);
    CHECK_FALSE(tr.filtered);
    for (int j = 0; j < cfg.n_steps; ++j) CHECK(std::abs(tr.values[j] - std::polar(1.0, 0.7 * j * cfg.dtau)) < 1e-14);

    const SystemMatrix sm = solve_system_matrix(tr, cfg);
    CHECK(sm.rank == 1);
    const std::vector<cplx> lam = leading_eigenvalues(sm.B, 1);
    CHECK(std::abs(lam[0] - std::polar(1.0, 0.7 * cfg.dtau)) < 1e-12);
    const EnergyEstimate est = extract_energies(sm.B, cfg.dtau, 1);
    CHECK(est.complete);
    CHECK(est.energies[0] == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("energy from a known eigenvalue")
{
    CMatrix B = CMatrix::Zero(2, 2);
    B(0, 0) = std::polar(1.0, 0.35);
    const EnergyEstimate est = extract_energies(B, 0.5, 1);
    CHECK(est.energies[0] == doctest::Approx(-0.7).epsilon(1e-14));
    const EnergyEstimate two = extract_energies(B, 0.5, 2);
    CHECK_FALSE(two.complete);
    CHECK(two.energies.size() == 1u);
}

TEST_CASE("two modes with three Hankel rows")
{
    RVector E(2);
    E << -0.6, 0.25;
    const ODMDConfig cfg = small_config(3, 12, 2, 1e-12);
    // closed form: the shift operator on span{v(l1), v(l2)} has eigenvalues l1, l2
    const SystemMatrix sm = solve_system_matrix(synthesize_trace(E, {0.3, 0.7}, std::nullopt, cfg), cfg);
    CHECK(sm.rank == 2);
    const EnergyEstimate est = extract_energies(sm.B, cfg.dtau, 2);
    REQUIRE(est.complete);
    CHECK(std::fabs(est.energies[0] + 0.6) < 1e-10);
    CHECK(std::fabs(est.energies[1] - 0.25) < 1e-10);
}

TEST_CASE("shift invariance recovers every mode")
{
    const double all[3] = {-0.83, -0.2, 0.41};
    for (int r = 1; r <= 3; ++r) {
        RVector E(r);
        std::vector<double> p;
        for (int i = 0; i < r; ++i) {
            E[i] = all[i];
            p.push_back(1.0 / r);
        }
        const ODMDConfig cfg = small_config(6, 40, r, 1e-10);
        const SystemMatrix sm = solve_system_matrix(synthesize_trace(E, p, std::nullopt, cfg), cfg);
        CHECK(sm.rank == r);
        const std::vector<cplx> lam = leading_eigenvalues(sm.B, r);
        // arg ascending means energy descending
        for (int i = 0; i < r; ++i) CHECK(std::abs(lam[i] - std::polar(1.0, -E[r - 1 - i] * cfg.dtau)) < 1e-9);
    }
}

TEST_CASE("filtered TFIM trace recovers the three lowest energies")
{
    const RVector ev = tfim_spectrum(6);
    const std::vector<double> p(ev.size(), 1.0 / ev.size());
    const double Em = -1.0, Ep = 1.0;
    const ZolotarevFilter z = zolotarev(4, 0.1);
    const double dE = step_filter_delta(z, Em, Ep);
    const double target = filter_threshold_between(ev, 3);
    const double E = composed_threshold(target, 3, dE, Em, Ep);
    const RationalSpec f = compose_iterative(step_filter(z, E, Em, Ep), composition_ratio(E, dE, Em, Ep), 3, Em);

    ODMDConfig cfg = small_config(20, 200, 3, 1e-6);
    const ObservableTrace tr = synthesize_trace(ev, p, f, cfg);
    CHECK(tr.filtered);
    const EnergyEstimate est = extract_energies(solve_system_matrix(tr, cfg).B, cfg.dtau, 3);
    REQUIRE(est.complete);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(est.energies[i] - ev[i]) < 1e-6);
}

TEST_CASE("step filter suppresses the stop band")
{
    const RVector ev = tfim_spectrum(4);
    const std::vector<double> p(ev.size(), 1.0 / ev.size());
    const ZolotarevFilter z = zolotarev(8, 0.01);
    const double dE = step_filter_delta(z, -1.0, 1.0);
    // threshold in a clear gap near the centre so that the whole spectrum lies in the filter window
    int n_pass = 0;
    for (int n = 1; n < ev.size(); ++n)
        if (ev[n] - ev[n - 1] > 2.0 * dE && (n_pass == 0 || std::fabs(filter_threshold_between(ev, n)) <
                                                                  std::fabs(filter_threshold_between(ev, n_pass))))
            n_pass = n;
    REQUIRE(n_pass > 0);
    const double E = filter_threshold_between(ev, n_pass);
    REQUIRE(ev[0] >= E - 1.0);
    REQUIRE(ev[ev.size() - 1] <= E + 1.0);
    const CVector r = eval_rational_spectral(step_filter(z, E, -1.0, 1.0), ev);
    double stop = 0.0, p_pass = 0.0;
    for (Eigen::Index n = 0; n < ev.size(); ++n) {
        REQUIRE(std::fabs(ev[n] - E) > dE);
        if (ev[n] < E)
            p_pass += p[n];
        else
            stop += std::abs(p[n] * r[n]);
    }
    CHECK(p_pass > 0.0);
    CHECK(stop <= z.err * (1.0 - p_pass));
}

TEST_CASE("singular value threshold")
{
    RVector E(1);
    E << -0.7;
    ODMDConfig cfg = small_config(20, 200, 1, 0.0);
    cfg.noise_sigma = 1e-3;
    cfg.seed = 3;
    const ObservableTrace tr = synthesize_trace(E, {1.0}, std::nullopt, cfg);

    int prev = std::numeric_limits<int>::max();
    for (double thr : {0.0, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1, 0.5}) {
        cfg.threshold = thr;
        const int rank = solve_system_matrix(tr, cfg).rank;
        CHECK(rank <= prev);
        prev = rank;
    }

    auto err = [&](double thr) {
        cfg.threshold = thr;
        const EnergyEstimate est = extract_energies(solve_system_matrix(tr, cfg).B, cfg.dtau, 1);
        return std::fabs(est.energies[0] + 0.7);
    };
    CHECK(err(0.0) > err(1e-2));
}

TEST_CASE("noise robustness over seeds")
{
    RVector E(1);
    E << -0.45;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ODMDConfig cfg = small_config(40, 400, 1, 1e-2);
        cfg.noise_sigma = 1e-5;
        cfg.seed = seed;
        const EnergyEstimate est = extract_energies(solve_system_matrix(synthesize_trace(E, {1.0}, std::nullopt, cfg), cfg).B,
                                                    cfg.dtau, 1);
        CHECK(std::fabs(est.energies[0] + 0.45) <= 1e-3);
    }
}

TEST_CASE("sweep records")
{
    RVector E(1);
    E << -0.7;
    const ODMDConfig cfg = small_config(4, 30, 1, 1e-10);
    const ObservableTrace tr = synthesize_trace(E, {1.0}, std::nullopt, cfg);
    const std::vector<ODMDRecord> rec = run_odmd_sweep(tr, E, cfg);
    CHECK(rec.size() == static_cast<std::size_t>(cfg.n_steps - cfg.n_rows - 1));
    CHECK(rec.front().j == cfg.n_rows + 2);
    CHECK(rec.back().j == cfg.n_steps);
    for (const auto& r : rec) CHECK(r.errors[0] < 1e-10);
}

TEST_CASE("threshold helpers")
{
    RVector ev(4);
    ev << -1.0, -0.5, 0.1, 0.8;
    CHECK(filter_threshold_between(ev, 1) == doctest::Approx(-0.75));
    CHECK(filter_threshold_between(ev, 3) == doctest::Approx(0.45));
    CHECK(composition_ratio(0.0, 0.1, -1.0, 1.0) == doctest::Approx(0.55));
    const double E = composed_threshold(-0.7, 2, 0.1, -1.0, 1.0);
    const double xi = composition_ratio(E, 0.1, -1.0, 1.0);
    CHECK(-1.0 + xi * xi * (E + 1.0) == doctest::Approx(-0.7).epsilon(1e-12));
}

TEST_CASE("config validation")
{
    ODMDConfig cfg;
    cfg.n_rows = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ODMDConfig{};
    cfg.n_steps = 50;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ODMDConfig{};
    cfg.threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    RVector E(2);
    E << 0.0, 0.1;
    CHECK_THROWS_AS(synthesize_trace(E, {1.0}, std::nullopt, ODMDConfig{}), ConfigError);
}
