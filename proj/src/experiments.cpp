#include "qrt/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "qrt/errors.hpp"
#include "qrt/quadrature.hpp"

namespace qrt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::function<cplx(double)> resolvent_target(cplx z)
{
    return [z](double e) { return 1.0 / (z - e); };
}

double spectral_error(const LCUPlan& plan, const RVector& energies, cplx z)
{
    return plan_error_spectral(plan, energies, resolvent_target(z));
}

double cost_ratio(const PlanMetrics& m)
{
    return m.t_max > 0.0 ? m.t_tot / m.t_max : 0.0;
}

RVector model_spectrum(const SpinModelConfig& cfg)
{
    return build(cfg).total.eigenvalues();
}

std::string rule_name(QRule q, YRule y)
{
    return "q" + to_string(q) + "_y" + to_string(y);
}

}  // namespace

const Table& ExperimentOutput::table(const std::string& name) const
{
    for (const Table& t : tables)
        if (t.name == name) return t;
    throw ConfigError("no table named " + name);
}

double ExperimentOutput::value(const std::string& key) const
{
    for (const auto& [k, v] : summary)
        if (k == key) return v;
    throw ConfigError("no summary value named " + key);
}

std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
    out += '\n';
    char buf[32];
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.16e", row[c]);
            if (c) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

int worker_count()
{
    if (const char* env = std::getenv("QRT_SIM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(worker_count()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!failure) failure = std::current_exception();
                    next = n;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::optional<long long> minimal_count(const std::function<bool(long long)>& ok, long long start, long long cap,
                                       double resolution)
{
    long long hi = std::max<long long>(1, start);
    long long lo = 0;  // largest known failure
    if (ok(hi)) {
        // walk down to a failure
        while (hi > 1) {
            const long long probe = std::max<long long>(1, hi / 2);
            if (!ok(probe)) {
                lo = probe;
                break;
            }
            hi = probe;
        }
        if (lo == 0) return hi;
    } else {
        for (;;) {
            lo = hi;
            if (hi >= cap) return std::nullopt;
            hi = std::min(cap, hi * 2);
            if (ok(hi)) break;
        }
    }
    while (hi - lo > 1 && hi - lo > resolution * hi) {
        const long long mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

SpinModelConfig mfim_config(int L)
{
    SpinModelConfig c;
    c.model = ModelKind::MFIM;
    c.sites = L;
    c.h = 1.0;
    c.g = 2.0 / 3.0;
    c.periodic = true;
    c.rescale = true;
    return c;
}

SpinModelConfig tfim_config(int L)
{
    SpinModelConfig c;
    c.model = ModelKind::TFIM;
    c.sites = L;
    c.h = 0.0;
    c.g = 1.0;
    c.periodic = false;
    c.rescale = true;
    return c;
}

SpectralInterval spectral_interval(const RVector& energies)
{
    return {energies.minCoeff(), energies.maxCoeff()};
}

// ----- Fig 4 -----

ExperimentOutput run_quadrature_sweep(const QuadratureSweepConfig& cfg)
{
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ConfigError("eps must lie in (0, 1)");
    if (!(cfg.z.imag() > 0.0)) throw ConfigError("z must lie in the upper half plane");
    const SplitHamiltonian split = build(cfg.model);
    const RVector& E = split.total.eigenvalues();
    const SpectralInterval iv = spectral_interval(E);

    std::optional<TrotterPropagator> prop;
    CMatrix R;
    if (cfg.propagator == PropagatorKind::Trotter) {
        prop.emplace(split, TrotterConfig{cfg.trotter_dt > 0.0 ? cfg.trotter_dt : cfg.eps});
        R = resolvent_exact(split.total, cfg.z);
    }
    auto error_of = [&](const LCUPlan& p) {
        if (prop) return opnorm2(evaluate_plan(p, *prop) - R);
        return spectral_error(p, E, cfg.z);
    };

    struct Sweep {
        ComplexRule rule;
        std::vector<long long> J;
    };
    const long long J_pred = predict_cost_complex(cfg.z, pole_a_plus(cfg.z, iv), cfg.eps).J;
    std::vector<Sweep> sweeps(3);
    sweeps[0].rule = ComplexRule::Legendre;
    for (long long j = 2; j <= std::max<long long>(3 * J_pred / 2, 16); j += 2) sweeps[0].J.push_back(j);
    sweeps[1].rule = ComplexRule::Trapezoidal;
    for (int k = 1; k <= cfg.trapezoidal_log2_cap; ++k) sweeps[1].J.push_back(1LL << k);
    sweeps[2].rule = ComplexRule::Laguerre;
    for (int k = 1; k <= cfg.laguerre_log2_cap; ++k) sweeps[2].J.push_back(1LL << k);

    ExperimentOutput out;
    for (Sweep& s : sweeps) {
        std::vector<std::vector<double>> rows(s.J.size());
        // geometric sweeps stop two points past the crossing
        std::size_t n = s.rule == ComplexRule::Legendre ? s.J.size() : 0;
        if (s.rule != ComplexRule::Legendre) {
            std::size_t past = 0;
            for (std::size_t i = 0; i < s.J.size(); ++i) {
                const LCUPlan p = plan_complex_pole(cfg.z, cfg.eps, iv, static_cast<int>(s.J[i]), s.rule);
                const PlanMetrics m = plan_metrics(p);
                const double err = error_of(p);
                rows[i] = {cost_ratio(m), err, static_cast<double>(s.J[i]), m.t_max};
                if (!std::isfinite(err)) break;
                if (err < cfg.eps && ++past > 2) {
                    n = i + 1;
                    break;
                }
                n = i + 1;
            }
        } else {
            parallel_for(s.J.size(), [&](std::size_t i) {
                const LCUPlan p = plan_complex_pole(cfg.z, cfg.eps, iv, static_cast<int>(s.J[i]), s.rule);
                const PlanMetrics m = plan_metrics(p);
                rows[i] = {cost_ratio(m), error_of(p), static_cast<double>(s.J[i]), m.t_max};
            });
        }
        rows.resize(n);
        while (!rows.empty() && rows.back().empty()) rows.pop_back();

        const std::string rn = to_string(s.rule);
        double crossing = kNaN, min_err = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) {
            if (std::isfinite(r[1])) min_err = std::min(min_err, r[1]);
            if (std::isnan(crossing) && r[1] < cfg.eps) crossing = r[0];
        }
        out.summary.push_back({rn + "_crossing_cost", crossing});
        out.summary.push_back({rn + "_min_error", min_err});
        if (s.rule == ComplexRule::Trapezoidal) {
            // ratio of the last doubling before the first crossing
            double ratio = kNaN;
            for (std::size_t i = 2; i < rows.size(); ++i) {
                if (rows[i][1] < cfg.eps) {
                    if (rows[i - 1][1] >= cfg.eps && rows[i - 2][1] >= cfg.eps) ratio = rows[i - 2][1] / rows[i - 1][1];
                    break;
                }
            }
            out.summary.push_back({"trapezoidal_refinement_ratio", ratio});
        }
        out.tables.push_back({cfg.prefix + "_" + rn, {"cost_ratio", "error", "J", "t_max"}, std::move(rows)});
    }
    out.summary.push_back({"legendre_predicted_J", static_cast<double>(J_pred)});
    return out;
}

// ----- Fig 5 -----

MinimalPlan minimal_complex_plan(cplx z, double eps, const RVector& energies, ComplexRule rule, long long cap)
{
    const SpectralInterval iv = spectral_interval(energies);
    auto make = [&](long long J) { return plan_complex_pole(z, eps, iv, static_cast<int>(J), rule); };
    auto ok = [&](long long J) {
        const double e = spectral_error(make(J), energies, z);
        return std::isfinite(e) && e < eps;
    };
    std::optional<long long> J;
    if (rule == ComplexRule::Laguerre) {
        // node sets are not nested; the first passing power of two is reported
        for (long long j = 2; j <= cap; j *= 2)
            if (ok(j)) {
                J = j;
                break;
            }
    } else {
        const long long start =
            rule == ComplexRule::Legendre ? predict_cost_complex(z, pole_a_plus(z, iv), eps).J : 2;
        J = minimal_count(ok, std::min(start, cap), cap);
    }
    MinimalPlan mp;
    if (!J) return mp;
    const LCUPlan p = make(*J);
    const PlanMetrics m = plan_metrics(p);
    mp.J = *J;
    mp.cost_ratio = cost_ratio(m);
    mp.t_max = m.t_max;
    mp.error = spectral_error(p, energies, z);
    return mp;
}

ExperimentOutput run_pole_approach(const PoleApproachConfig& cfg)
{
    if (cfg.k_max < 1) throw ConfigError("k_max must be >= 1");
    const RVector E = model_spectrum(cfg.model);
    const SpectralInterval iv = spectral_interval(E);
    ExperimentOutput out;
    const std::pair<const char*, double> panes[2] = {{"fig5_left", cfg.offset_left}, {"fig5_right", cfg.offset_right}};
    for (const auto& [name, a] : panes) {
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(cfg.k_max));
        parallel_for(rows.size(), [&](std::size_t i) {
            const int k = static_cast<int>(i) + 1;
            const cplx z(a, std::ldexp(1.0, 1 - k));
            const MinimalPlan leg = minimal_complex_plan(z, cfg.eps, E, ComplexRule::Legendre, 1LL << 16);
            const MinimalPlan trap = minimal_complex_plan(z, cfg.eps, E, ComplexRule::Trapezoidal, cfg.trapezoidal_cap);
            const MinimalPlan lag = minimal_complex_plan(z, cfg.eps, E, ComplexRule::Laguerre, cfg.laguerre_cap);
            const CostPrediction pred = predict_cost_complex(z, pole_a_plus(z, iv), cfg.eps);
            auto cost = [](const MinimalPlan& p) { return p.J > 0 ? p.cost_ratio : kNaN; };
            rows[i] = {static_cast<double>(k),
                       z.imag(),
                       static_cast<double>(leg.J),
                       cost(leg),
                       leg.t_max,
                       static_cast<double>(trap.J),
                       cost(trap),
                       static_cast<double>(lag.J),
                       cost(lag),
                       static_cast<double>(pred.J),
                       pred.t_tot / pred.t_max,
                       pred.t_max};
        });
        out.tables.push_back({name,
                              {"k", "b", "J_legendre", "cost_legendre", "t_max_legendre", "J_trapezoidal",
                               "cost_trapezoidal", "J_laguerre", "cost_laguerre", "J_predicted", "cost_predicted",
                               "t_max_predicted"},
                              std::move(rows)});
    }
    return out;
}

// ----- Fig 6 / Fig 7 -----

RealPoleSearch search_real_pole(double a, double eps, const RVector& energies, YRule y_rule, QRule q_rule)
{
    const SpectralInterval iv = spectral_interval(energies);
    const RealPoleFactors f = real_pole_factors(pole_a_minus(a, iv), pole_a_plus(a, iv), eps);
    auto make = [&](long long Ly, long long Lq) {
        RealPoleOptions opt;
        opt.L_y = static_cast<int>(Ly);
        opt.L_q = static_cast<int>(Lq);
        opt.y_rule = y_rule;
        opt.q_rule = q_rule;
        return plan_real_pole(a, iv, eps, opt);
    };
    auto err = [&](long long Ly, long long Lq) {
        const double e = spectral_error(make(Ly, Lq), energies, cplx(a, 0.0));
        return std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
    };
    constexpr long long kCap = 1LL << 22;

    // grow whichever axis still limits the error
    long long Ly_ref = std::max<long long>(2, f.L_y), Lq_ref = std::max<long long>(2, f.L_q);
    double e_ref = err(Ly_ref, Lq_ref);
    while (e_ref >= eps / 4.0) {
        if (Ly_ref * Lq_ref * 2 > kCap) throw NumericalError("search_real_pole: no converged reference plan");
        const double ey = err(2 * Ly_ref, Lq_ref);
        if (ey < 0.5 * e_ref) {
            Ly_ref *= 2;
            e_ref = ey;
            continue;
        }
        const double eq = err(Ly_ref, 2 * Lq_ref);
        if (eq <= ey) {
            Lq_ref *= 2;
            e_ref = eq;
        } else {
            Ly_ref *= 2;
            e_ref = ey;
        }
    }
    const auto Ly = minimal_count([&](long long n) { return err(n, Lq_ref) < eps / 2.0; }, Ly_ref / 4, Ly_ref, 0.02);
    const auto Lq = minimal_count([&](long long n) { return err(Ly_ref, n) < eps / 2.0; }, Lq_ref / 4, Lq_ref, 0.02);
    RealPoleSearch s;
    s.L_y = Ly.value_or(Ly_ref);
    s.L_q = Lq.value_or(Lq_ref);
    while (err(s.L_y, s.L_q) >= eps) {
        s.L_y = std::max(s.L_y + 1, static_cast<long long>(std::ceil(1.05 * s.L_y)));
        s.L_q = std::max(s.L_q + 1, static_cast<long long>(std::ceil(1.05 * s.L_q)));
        if (s.L_y * s.L_q > kCap) throw NumericalError("search_real_pole: joint plan did not reach eps");
    }
    const LCUPlan p = make(s.L_y, s.L_q);
    const PlanMetrics m = plan_metrics(p);
    s.cost_ratio = cost_ratio(m);
    s.t_max = m.t_max;
    s.error = spectral_error(p, energies, cplx(a, 0.0));

    for (int i = 0; i <= 10; ++i) {
        const double scale = 0.5 + 0.1 * i;
        const long long ly = std::max<long long>(2, std::llround(scale * s.L_y));
        const long long lq = std::max<long long>(2, std::llround(scale * s.L_q));
        const LCUPlan c = make(ly, lq);
        s.curve.push_back({cost_ratio(plan_metrics(c)), spectral_error(c, energies, cplx(a, 0.0)),
                           static_cast<double>(ly), static_cast<double>(lq)});
    }
    return s;
}

ExperimentOutput run_real_pole_sweep(const RealPoleSweepConfig& cfg)
{
    const RVector E = model_spectrum(cfg.model);
    const std::pair<QRule, YRule> combos[4] = {{QRule::Legendre, YRule::Trapezoidal},
                                               {QRule::Legendre, YRule::Legendre},
                                               {QRule::Legendre, YRule::Hermite},
                                               {QRule::Trapezoidal, YRule::Trapezoidal}};
    std::vector<RealPoleSearch> res(4);
    parallel_for(4, [&](std::size_t i) { res[i] = search_real_pole(cfg.a, cfg.eps, E, combos[i].second, combos[i].first); });
    ExperimentOutput out;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::string rn = rule_name(combos[i].first, combos[i].second);
        out.tables.push_back({"fig6_" + rn, {"cost_ratio", "error", "L_y", "L_q"}, res[i].curve});
        out.summary.push_back({rn + "_crossing_cost", res[i].cost_ratio});
        out.summary.push_back({rn + "_L_y", static_cast<double>(res[i].L_y)});
        out.summary.push_back({rn + "_L_q", static_cast<double>(res[i].L_q)});
    }
    return out;
}

ExperimentOutput run_real_pole_approach(const RealPoleApproachConfig& cfg)
{
    if (cfg.k_max < cfg.k_min) throw ConfigError("k_max must be >= k_min");
    const RVector E = model_spectrum(cfg.model);
    const SpectralInterval iv = spectral_interval(E);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(cfg.k_max - cfg.k_min + 1));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int k = cfg.k_min + static_cast<int>(i);
        const double a = -1.0 - std::ldexp(1.0, -k - 1);
        if (a >= iv.lo) throw ConfigError("fig7 pole lies inside the spectrum");
        const RealPoleSearch s = search_real_pole(a, cfg.eps, E, YRule::Trapezoidal, QRule::Legendre);
        const CostPrediction pred = predict_cost_real(pole_a_minus(a, iv), pole_a_plus(a, iv), cfg.eps);
        rows[i] = {static_cast<double>(k), a, pole_a_minus(a, iv), static_cast<double>(s.L_y),
                   static_cast<double>(s.L_q), s.cost_ratio, s.t_max, pred.t_tot / pred.t_max, pred.t_max};
    }
    ExperimentOutput out;
    out.tables.push_back({"fig7",
                          {"k", "a", "a_minus", "L_y", "L_q", "cost_measured", "t_max_measured", "cost_predicted",
                           "t_max_predicted"},
                          std::move(rows)});
    return out;
}

// ----- Fig 9 / Fig 10 -----

ExperimentOutput run_mixture_convergence(const MixtureConvergenceConfig& cfg)
{
    if (cfg.trials < 1 || cfg.G.empty()) throw ConfigError("fig9 needs trials >= 1 and a nonempty G list");
    const RVector E = model_spectrum(cfg.model);
    const ReferenceState ref = reference_state(static_cast<std::size_t>(E.size()), cfg.p0);
    const double b = cfg.z.imag();
    const double t_norm = tmax_complex(b, cfg.eps);
    auto error_of = [&](const GaussianMixturePlan& p) {
        const CVector v = mixture_values(p, E);
        double worst = 0.0;
        for (Eigen::Index n = 0; n < E.size(); ++n) worst = std::max(worst, std::abs(v[n] - 1.0 / (cfg.z - E[n])));
        return worst;
    };
    auto cost_of = [&](const GaussianMixturePlan& p) {
        double s = 0.0;
        for (const auto& c : p.components) s += 1.0 / success_probability_block(ref, E, cfg.z.real(), c.gamma);
        return s / t_norm;
    };

    const std::size_t nG = cfg.G.size(), nT = static_cast<std::size_t>(cfg.trials);
    std::vector<std::vector<double>> trials(nG * nT);
    parallel_for(trials.size(), [&](std::size_t idx) {
        const std::size_t g = idx / nT, t = idx % nT;
        const std::uint64_t seed = cfg.seed * 1000003ULL + g * 10007ULL + t;
        const GaussianMixturePlan p = plan_complex_pole_mc(cfg.z, cfg.G[g], seed);
        trials[idx] = {static_cast<double>(cfg.G[g]), static_cast<double>(t), error_of(p), cost_of(p)};
    });
    std::vector<std::vector<double>> rows;
    for (std::size_t g = 0; g < nG; ++g) {
        double mean = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0, cost = 0.0;
        for (std::size_t t = 0; t < nT; ++t) {
            const double e = trials[g * nT + t][2];
            mean += e;
            lo = std::min(lo, e);
            hi = std::max(hi, e);
            cost += trials[g * nT + t][3];
        }
        mean /= nT;
        cost /= nT;
        const GaussianMixturePlan biased = plan_complex_pole_biased(cfg.z, cfg.G[g]);
        rows.push_back({static_cast<double>(cfg.G[g]), mean, lo, hi, error_of(biased), cost, cost_of(biased)});
    }
    ExperimentOutput out;
    out.tables.push_back({"fig9",
                          {"G", "mc_mean_error", "mc_min_error", "mc_max_error", "biased_error", "mc_cost",
                           "biased_cost"},
                          std::move(rows)});
    out.tables.push_back({"fig9_trials", {"G", "trial", "error", "cost"}, std::move(trials)});
    out.summary.push_back({"t_max_discrete", t_norm});
    return out;
}

ExperimentOutput run_real_pole_continuous(const RealPoleContinuousConfig& cfg)
{
    const SplitHamiltonian split = build(cfg.model);
    const HermitianOperator& op = split.total;
    const RVector& E = op.eigenvalues();
    const SpectralInterval iv = spectral_interval(E);
    const ReferenceState ref = reference_state(static_cast<std::size_t>(E.size()), cfg.p0);
    std::vector<std::vector<double>> rows;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        const double a = -1.0 - std::ldexp(1.0, -k - 1);
        if (a >= iv.lo) throw ConfigError("fig10 pole lies inside the spectrum");
        const double am = pole_a_minus(a, iv);
        const RealPoleContinuous u = real_pole_uniform_gaussian(a, iv, cfg.eps, ref, op);
        const RealPoleContinuous d = real_pole_double_gaussian(a, iv, cfg.eps, ref, op);
        const double t_norm = predict_cost_real(am, pole_a_plus(a, iv), cfg.eps).t_max;
        auto err = [&](const CVector& v) {
            double w = 0.0;
            for (Eigen::Index n = 0; n < E.size(); ++n) w = std::max(w, std::abs(v[n] - 1.0 / (a - E[n])));
            return w;
        };
        rows.push_back({static_cast<double>(k), a, am, 1.0 / u.success_prob, 1.0 / d.success_prob, t_norm,
                        1.0 / u.success_prob / t_norm, 1.0 / d.success_prob / t_norm, err(u.values), err(d.values)});
    }
    ExperimentOutput out;
    out.tables.push_back({"fig10",
                          {"k", "a", "a_minus", "inv_p_uniform_gaussian", "inv_p_double_gaussian", "t_max_discrete",
                           "cost_uniform_gaussian", "cost_double_gaussian", "error_uniform_gaussian",
                           "error_double_gaussian"},
                          std::move(rows)});
    return out;
}

// ----- Fig 11 -----

ExperimentOutput run_filter_comparison(const FilterComparisonConfig& cfg)
{
    if (cfg.points < 3 || cfg.trials < 1) throw ConfigError("fig11 needs points >= 3 and trials >= 1");
    const ZolotarevFilter z = zolotarev(cfg.K, cfg.omega_bar);
    const RVector w = RVector::LinSpaced(cfg.points, -1.0, 1.0);

    std::vector<RVector> trials(static_cast<std::size_t>(cfg.trials));
    parallel_for(trials.size(), [&](std::size_t t) {
        const GaussianMixturePlan p =
            zolotarev_stochastic(z, std::vector<int>(cfg.K, cfg.G), cfg.N_MC, cfg.seed + t);
        trials[t] = stochastic_sign_values(p, w);
    });
    auto stop_max = [&](const RVector& sign) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            if (w[i] >= 2.0 * cfg.omega_bar) m = std::max(m, std::fabs(0.5 * (1.0 - sign[i])));
        return m;
    };
    std::size_t best = 0;
    for (std::size_t t = 1; t < trials.size(); ++t)
        if (stop_max(trials[t]) < stop_max(trials[best])) best = t;

    std::vector<ChebyshevSeries> cheb;
    for (int d : cfg.chebyshev_degrees) cheb.push_back(chebyshev_step(d, 0.0));

    Table tab{"fig11", {"omega", "exact_step", "zolotarev"}, {}};
    for (int d : cfg.chebyshev_degrees) tab.columns.push_back("chebyshev" + std::to_string(d));
    tab.columns.push_back("stochastic");
    std::vector<double> sup(cheb.size() + 2, 0.0);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double x = w[i];
        const double exact = x < 0.0 ? 1.0 : (x == 0.0 ? 0.5 : 0.0);
        std::vector<double> row{x, exact, 0.5 * (1.0 - zolotarev_eval(z, x))};
        for (const auto& c : cheb) row.push_back(c.eval(x));
        row.push_back(0.5 * (1.0 - trials[best][i]));
        if (std::fabs(x) >= cfg.omega_bar)
            for (std::size_t c = 0; c < sup.size(); ++c) sup[c] = std::max(sup[c], std::fabs(row[c + 2] - exact));
        tab.rows.push_back(std::move(row));
    }
    ExperimentOutput out;
    out.tables.push_back(std::move(tab));
    out.summary.push_back({"zolotarev_sup_error", sup[0]});
    for (std::size_t c = 0; c < cheb.size(); ++c)
        out.summary.push_back({"chebyshev" + std::to_string(cfg.chebyshev_degrees[c]) + "_sup_error", sup[c + 1]});
    out.summary.push_back({"stochastic_sup_error", sup.back()});
    out.summary.push_back({"stochastic_stop_band_max", stop_max(trials[best])});
    out.summary.push_back({"stochastic_best_trial", static_cast<double>(best)});
    return out;
}

// ----- Fig 12 -----

ComposedFilter fig12_filter(const ODMDExperimentConfig& cfg, const RVector& spectrum)
{
    const ZolotarevFilter z = zolotarev(cfg.K, 2.0 * cfg.delta_E / (cfg.E_plus - cfg.E_minus));
    ComposedFilter f;
    f.target = filter_threshold_between(spectrum, cfg.odmd.n_energies);
    f.E = cfg.threshold_E ? *cfg.threshold_E
                          : composed_threshold(f.target, cfg.D, cfg.delta_E, cfg.E_minus, cfg.E_plus);
    f.xi = composition_ratio(f.E, cfg.delta_E, cfg.E_minus, cfg.E_plus);
    f.spec = compose_iterative(step_filter(z, f.E, cfg.E_minus, cfg.E_plus), f.xi, cfg.D, cfg.E_minus);
    return f;
}

ExperimentOutput run_odmd_experiment(const ODMDExperimentConfig& cfg)
{
    cfg.odmd.validate();
    const RVector E = model_spectrum(cfg.model);
    const int nE = cfg.odmd.n_energies;
    if (E.size() <= nE) throw ConfigError("odmd: model has too few eigenvalues");
    const RVector exact = E.head(nE);
    const ComposedFilter filt = fig12_filter(cfg, E);

    struct Run {
        std::string name;
        double p0;
        bool filtered;
    };
    std::vector<Run> runs{{"odmd_unfiltered", cfg.p0, false}, {"odmd_filtered", cfg.p0, true}};
    if (cfg.uniform_runs) {
        const double pu = 1.0 / static_cast<double>(E.size());
        runs.push_back({"odmd_uniform_unfiltered", pu, false});
        runs.push_back({"odmd_uniform_filtered", pu, true});
    }

    ExperimentOutput out;
    for (const Run& r : runs) {
        ODMDConfig oc = cfg.odmd;
        oc.threshold = r.filtered ? cfg.threshold_filtered : cfg.threshold_unfiltered;
        const ReferenceState ref = reference_state(static_cast<std::size_t>(E.size()), r.p0);
        const ObservableTrace tr =
            synthesize_trace(E, ref.p, r.filtered ? std::optional<RationalSpec>(filt.spec) : std::nullopt, oc);
        const std::vector<ODMDRecord> rec = run_odmd_sweep(tr, exact, oc);
        Table t{r.name, {"j"}, {}};
        for (int i = 0; i < nE; ++i) t.columns.push_back("E" + std::to_string(i) + "_err");
        t.columns.push_back("rank");
        double best0 = std::numeric_limits<double>::infinity(), best12 = best0, best_all = best0;
        for (const ODMDRecord& x : rec) {
            std::vector<double> row{static_cast<double>(x.j)};
            row.insert(row.end(), x.errors.begin(), x.errors.end());
            row.push_back(static_cast<double>(x.rank));
            t.rows.push_back(std::move(row));
            best0 = std::min(best0, x.errors[0]);
            double m12 = 0.0;
            for (int i = 1; i < nE; ++i) m12 = std::max(m12, x.errors[i]);
            best12 = std::min(best12, m12);
            best_all = std::min(best_all, std::max(x.errors[0], m12));
        }
        out.tables.push_back(std::move(t));
        out.summary.push_back({r.name + "_best_E0", best0});
        out.summary.push_back({r.name + "_best_E12", best12});
        out.summary.push_back({r.name + "_best_all", best_all});
    }
    out.summary.push_back({"filter_E", filt.E});
    out.summary.push_back({"filter_xi", filt.xi});
    out.summary.push_back({"filter_target", filt.target});
    return out;
}

}  // namespace qrt
