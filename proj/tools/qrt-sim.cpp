// qrt-sim: figure reproductions and ad-hoc resolvent, filter and ODMD runs.
//
// Configuration is resolved as experiment defaults, then the --config JSON
// file (merge patch), then command-line flags. The resolved object is written
// to manifest.json next to the CSV tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrt/errors.hpp"
#include "qrt/experiments.hpp"

#ifndef QRT_VERSION
#define QRT_VERSION "unknown"
#endif

namespace {

using json = nlohmann::ordered_json;
using namespace qrt;

const std::vector<std::string> kExperiments{"fig4", "fig5",  "fig6", "fig7",      "fig9",      "fig10",
                                            "fig11", "fig12", "appC", "resolvent", "zolotarev", "odmd"};

// ----- value conversion -----

double parse_number(const std::string& s, const std::string& field)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ConfigError("field '" + field + "': cannot parse '" + s + "'");
    return v;
}

// "a+bi", "a-bi", "bi", "a" with optional spaces.
cplx parse_complex_string(std::string s, const std::string& field)
{
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    if (s.empty()) throw ConfigError("field '" + field + "': empty complex number");
    if (s.back() != 'i' && s.back() != 'j') return {parse_number(s, field), 0.0};
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    const std::string re = split == std::string::npos ? "" : s.substr(0, split);
    std::string im = split == std::string::npos ? s : s.substr(split);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re.empty() ? 0.0 : parse_number(re, field), parse_number(im, field)};
}

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json model_json(const SpinModelConfig& m)
{
    return {{"kind", to_string(m.model)}, {"sites", m.sites},       {"lx", m.lx},
            {"ly", m.ly},                 {"lz", m.lz},             {"h", m.h},
            {"g", m.g},                   {"periodic", m.periodic}, {"rescale", m.rescale}};
}

// mfim8, tfim8, heisenberg_chain6, triangular2x4, grid2x2x2.
SpinModelConfig model_shorthand(const std::string& s)
{
    std::smatch m;
    if (std::regex_match(s, m, std::regex(R"((mfim|tfim|heisenberg_chain)(\d+))"))) {
        const int L = std::stoi(m[2]);
        if (m[1] == "mfim") return mfim_config(L);
        if (m[1] == "tfim") return tfim_config(L);
        SpinModelConfig c;
        c.model = ModelKind::HeisenbergChain;
        c.sites = L;
        return c;
    }
    if (std::regex_match(s, m, std::regex(R"((triangular|heisenberg_triangular)(\d+)x(\d+))"))) {
        SpinModelConfig c;
        c.model = ModelKind::HeisenbergTriangular2D;
        c.lx = std::stoi(m[2]);
        c.ly = std::stoi(m[3]);
        c.h = 2.0;
        return c;
    }
    if (std::regex_match(s, m, std::regex(R"((grid|heisenberg_grid3d)(\d+)x(\d+)x(\d+))"))) {
        SpinModelConfig c;
        c.model = ModelKind::HeisenbergGrid3D;
        c.lx = std::stoi(m[2]);
        c.ly = std::stoi(m[3]);
        c.lz = std::stoi(m[4]);
        c.h = 2.0;
        return c;
    }
    throw ConfigError("field 'model': unknown model '" + s + "'");
}

// ----- typed access to the resolved configuration -----

class Fields {
public:
    explicit Fields(const json& j) : j_(j) {}

    const json& raw(const std::string& key)
    {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError("field '" + key + "' is required");
        return j_.at(key);
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    void touch(const std::string& key) { used_.insert(key); }

    double number(const std::string& key)
    {
        const json& v = raw(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) return parse_number(v.get<std::string>(), key);
        throw ConfigError("field '" + key + "' must be a number");
    }

    double positive(const std::string& key)
    {
        const double v = number(key);
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("field '" + key + "' must be positive");
        return v;
    }

    long long integer(const std::string& key)
    {
        const double v = number(key);
        if (std::floor(v) != v || std::abs(v) > 9e15) throw ConfigError("field '" + key + "' must be an integer");
        return static_cast<long long>(v);
    }

    int count(const std::string& key, long long lo = 1)
    {
        const long long v = integer(key);
        if (v < lo || v > 1LL << 30) throw ConfigError("field '" + key + "' out of range");
        return static_cast<int>(v);
    }

    std::optional<long long> optional_integer(const std::string& key)
    {
        used_.insert(key);
        if (!has(key)) return std::nullopt;
        return integer(key);
    }

    std::optional<double> optional_number(const std::string& key)
    {
        used_.insert(key);
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    bool flag(const std::string& key)
    {
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError("field '" + key + "' must be true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key)
    {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError("field '" + key + "' must be a string");
        return v.get<std::string>();
    }

    cplx complex(const std::string& key)
    {
        const json& v = raw(key);
        if (v.is_string()) return parse_complex_string(v.get<std::string>(), key);
        if (v.is_number()) return {v.get<double>(), 0.0};
        if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
            return {v[0].get<double>(), v[1].get<double>()};
        throw ConfigError("field '" + key + "' must be \"a+bi\" or [re, im]");
    }

    std::vector<int> counts(const std::string& key)
    {
        const json& v = raw(key);
        if (!v.is_array() || v.empty()) throw ConfigError("field '" + key + "' must be a non-empty array");
        std::vector<int> out;
        for (const json& x : v) {
            if (!x.is_number_integer() || x.get<long long>() < 1)
                throw ConfigError("field '" + key + "' must hold positive integers");
            out.push_back(x.get<int>());
        }
        return out;
    }

    SpinModelConfig model(const std::string& key)
    {
        const json& v = raw(key);
        if (v.is_string()) return model_shorthand(v.get<std::string>());
        if (!v.is_object()) throw ConfigError("field '" + key + "' must be a model name or object");
        static const std::set<std::string> known{"kind", "sites", "lx", "ly", "lz", "h", "g", "periodic", "rescale"};
        for (auto it = v.begin(); it != v.end(); ++it)
            if (!known.count(it.key())) throw ConfigError("field '" + key + "." + it.key() + "' is not recognised");
        Fields m(v);
        SpinModelConfig c;
        try {
            c.model = parse_model(m.text("kind"));
        } catch (const ConfigError& e) {
            throw ConfigError("field '" + key + ".kind': " + e.what());
        }
        c.sites = static_cast<int>(m.integer("sites"));
        c.lx = static_cast<int>(m.integer("lx"));
        c.ly = static_cast<int>(m.integer("ly"));
        c.lz = static_cast<int>(m.integer("lz"));
        c.h = m.number("h");
        c.g = m.number("g");
        c.periodic = m.flag("periodic");
        c.rescale = m.flag("rescale");
        const int n = site_count(c);
        if (n < 1 || n > kMaxSites)
            throw ConfigError("field '" + key + "': site count " + std::to_string(n) + " outside [1, " +
                              std::to_string(kMaxSites) + "]");
        return c;
    }

    // Every key present must have been read.
    void finish(const std::string& experiment) const
    {
        static const std::set<std::string> common{"output_dir", "profile", "seed"};
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()) && !common.count(it.key()))
                throw ConfigError("field '" + it.key() + "' is not recognised by " + experiment);
    }

private:
    const json& j_;
    std::set<std::string> used_;
};

template <class Enum>
Enum parse_enum(const std::string& key, const std::string& value, const std::map<std::string, Enum>& names)
{
    const auto it = names.find(value);
    if (it != names.end()) return it->second;
    std::string allowed;
    for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : ", ") + n;
    throw ConfigError("field '" + key + "': '" + value + "' is not one of " + allowed);
}

PropagatorKind parse_propagator(Fields& f)
{
    return parse_enum<PropagatorKind>("propagator", f.text("propagator"),
                                      {{"exact", PropagatorKind::Exact}, {"trotter", PropagatorKind::Trotter}});
}

// ----- defaults -----

bool extended(const std::string& profile) { return profile == "extended"; }

json quadrature_defaults(const QuadratureSweepConfig& d)
{
    return {{"z", complex_json(d.z)},
            {"eps", d.eps},
            {"propagator", d.propagator == PropagatorKind::Exact ? "exact" : "trotter"},
            {"trotter_dt", d.trotter_dt},
            {"trapezoidal_log2_cap", d.trapezoidal_log2_cap},
            {"laguerre_log2_cap", d.laguerre_log2_cap}};
}

json odmd_defaults(const ODMDExperimentConfig& d)
{
    return {{"dtau", d.odmd.dtau},
            {"n_steps", d.odmd.n_steps},
            {"n_rows", d.odmd.n_rows},
            {"noise_sigma", d.odmd.noise_sigma},
            {"n_energies", d.odmd.n_energies},
            {"p0", d.p0},
            {"K", d.K},
            {"delta_E", d.delta_E},
            {"D", d.D},
            {"E_minus", d.E_minus},
            {"E_plus", d.E_plus},
            {"threshold_E", nullptr}};
}

json defaults(const std::string& exp, const std::string& profile)
{
    const int L = extended(profile) ? 12 : 8;
    json j;
    if (exp == "fig4") {
        QuadratureSweepConfig d;
        j = quadrature_defaults(d);
        j["model"] = model_json(mfim_config(L));
    } else if (exp == "fig5") {
        PoleApproachConfig d;
        j = {{"model", model_json(mfim_config(L))}, {"eps", d.eps},
             {"k_max", d.k_max},                    {"offset_left", d.offset_left},
             {"offset_right", d.offset_right},      {"trapezoidal_cap", d.trapezoidal_cap},
             {"laguerre_cap", d.laguerre_cap}};
    } else if (exp == "fig6") {
        RealPoleSweepConfig d;
        j = {{"model", model_json(mfim_config(L))}, {"a", d.a}, {"eps", d.eps}};
    } else if (exp == "fig7") {
        RealPoleApproachConfig d;
        j = {{"model", model_json(mfim_config(L))}, {"eps", d.eps}, {"k_min", d.k_min}, {"k_max", d.k_max}};
    } else if (exp == "fig9") {
        MixtureConvergenceConfig d;
        j = {{"model", model_json(mfim_config(L))}, {"z", complex_json(d.z)}, {"eps", d.eps}, {"G", d.G},
             {"trials", d.trials},                  {"p0", d.p0},             {"seed", d.seed}};
    } else if (exp == "fig10") {
        RealPoleContinuousConfig d;
        j = {{"model", model_json(mfim_config(L))}, {"eps", d.eps}, {"k_min", d.k_min}, {"k_max", d.k_max},
             {"p0", d.p0}};
    } else if (exp == "fig11") {
        FilterComparisonConfig d;
        j = {{"K", d.K},       {"omega_bar", d.omega_bar}, {"G", d.G},
             {"N_MC", d.N_MC}, {"trials", d.trials},       {"points", d.points},
             {"chebyshev_degrees", d.chebyshev_degrees},   {"seed", d.seed}};
    } else if (exp == "fig12") {
        ODMDExperimentConfig d;
        j = odmd_defaults(d);
        j["model"] = model_json(tfim_config(L));
        j["seed"] = d.odmd.seed;
        j["threshold_unfiltered"] = d.threshold_unfiltered;
        j["threshold_filtered"] = d.threshold_filtered;
        j["uniform_runs"] = d.uniform_runs;
    } else if (exp == "appC") {
        QuadratureSweepConfig d;
        j = quadrature_defaults(d);
        j.erase("z");
        j["triangular_model"] = model_json(model_shorthand(extended(profile) ? "triangular3x4" : "triangular2x4"));
        j["triangular_z"] = complex_json({-0.49, 0.1});
        j["grid_model"] = model_json(model_shorthand("grid2x2x2"));
        j["grid_z"] = complex_json({-0.71, 0.1});
    } else if (exp == "resolvent") {
        j = {{"model", model_json(mfim_config(L))},
             {"z", complex_json({-0.8, 0.1})},
             {"m", 1},
             {"eps", 1e-6},
             {"rule", "legendre"},
             {"J", nullptr},
             {"y_rule", "trapezoidal"},
             {"q_rule", "legendre"},
             {"L_y", nullptr},
             {"L_q", nullptr},
             {"bounds", nullptr}};
    } else if (exp == "zolotarev") {
        j = {{"K", 4}, {"omega_bar", 0.2}, {"points", 2001}};
    } else if (exp == "odmd") {
        ODMDExperimentConfig d;
        j = odmd_defaults(d);
        j["model"] = model_json(tfim_config(L));
        j["seed"] = d.odmd.seed;
        j["filtered"] = true;
        j["threshold"] = d.threshold_filtered;
    }
    j["output_dir"] = "results/" + exp;
    j["profile"] = profile;
    if (!j.contains("seed")) j["seed"] = 0;
    return j;
}

// ----- experiments -----

struct Result {
    ExperimentOutput out;
    json extra;  // written to <extra_name>.json when non-null
    std::string extra_name;
};

QuadratureSweepConfig quadrature_config(Fields& f)
{
    QuadratureSweepConfig c;
    c.eps = f.positive("eps");
    c.propagator = parse_propagator(f);
    c.trotter_dt = f.number("trotter_dt");
    if (c.trotter_dt < 0.0) throw ConfigError("field 'trotter_dt' must be nonnegative");
    c.trapezoidal_log2_cap = f.count("trapezoidal_log2_cap");
    c.laguerre_log2_cap = f.count("laguerre_log2_cap");
    return c;
}

Result run_fig4(Fields& f)
{
    QuadratureSweepConfig c = quadrature_config(f);
    c.model = f.model("model");
    c.z = f.complex("z");
    f.finish("fig4");
    return {run_quadrature_sweep(c), nullptr, ""};
}

Result run_appc(Fields& f)
{
    QuadratureSweepConfig tri = quadrature_config(f);
    QuadratureSweepConfig grid = tri;
    tri.model = f.model("triangular_model");
    tri.z = f.complex("triangular_z");
    tri.prefix = "appC_triangular";
    grid.model = f.model("grid_model");
    grid.z = f.complex("grid_z");
    grid.prefix = "appC_grid3d";
    f.finish("appC");
    Result r{run_quadrature_sweep(tri), nullptr, ""};
    ExperimentOutput g = run_quadrature_sweep(grid);
    for (auto& s : r.out.summary) s.first = "triangular_" + s.first;
    for (auto& t : g.tables) r.out.tables.push_back(std::move(t));
    for (auto& s : g.summary) r.out.summary.push_back({"grid3d_" + s.first, s.second});
    return r;
}

Result run_fig5(Fields& f)
{
    PoleApproachConfig c;
    c.model = f.model("model");
    c.eps = f.positive("eps");
    c.k_max = f.count("k_max");
    c.offset_left = f.number("offset_left");
    c.offset_right = f.number("offset_right");
    c.trapezoidal_cap = f.count("trapezoidal_cap");
    c.laguerre_cap = f.count("laguerre_cap");
    f.finish("fig5");
    return {run_pole_approach(c), nullptr, ""};
}

Result run_fig6(Fields& f)
{
    RealPoleSweepConfig c;
    c.model = f.model("model");
    c.a = f.number("a");
    c.eps = f.positive("eps");
    f.finish("fig6");
    return {run_real_pole_sweep(c), nullptr, ""};
}

Result run_fig7(Fields& f)
{
    RealPoleApproachConfig c;
    c.model = f.model("model");
    c.eps = f.positive("eps");
    c.k_min = f.count("k_min", 0);
    c.k_max = f.count("k_max", c.k_min);
    f.finish("fig7");
    return {run_real_pole_approach(c), nullptr, ""};
}

Result run_fig9(Fields& f)
{
    MixtureConvergenceConfig c;
    c.model = f.model("model");
    c.z = f.complex("z");
    c.eps = f.positive("eps");
    c.G = f.counts("G");
    c.trials = f.count("trials");
    c.p0 = f.positive("p0");
    c.seed = static_cast<std::uint64_t>(f.integer("seed"));
    f.finish("fig9");
    return {run_mixture_convergence(c), nullptr, ""};
}

Result run_fig10(Fields& f)
{
    RealPoleContinuousConfig c;
    c.model = f.model("model");
    c.eps = f.positive("eps");
    c.k_min = f.count("k_min", 0);
    c.k_max = f.count("k_max", c.k_min);
    c.p0 = f.positive("p0");
    f.finish("fig10");
    return {run_real_pole_continuous(c), nullptr, ""};
}

Result run_fig11(Fields& f)
{
    FilterComparisonConfig c;
    c.K = f.count("K");
    c.omega_bar = f.positive("omega_bar");
    c.G = f.count("G");
    c.N_MC = f.count("N_MC");
    c.trials = f.count("trials");
    c.points = f.count("points", 2);
    c.chebyshev_degrees = f.counts("chebyshev_degrees");
    c.seed = static_cast<std::uint64_t>(f.integer("seed"));
    f.finish("fig11");
    return {run_filter_comparison(c), nullptr, ""};
}

ODMDExperimentConfig odmd_config(Fields& f)
{
    ODMDExperimentConfig c;
    c.model = f.model("model");
    c.odmd.dtau = f.positive("dtau");
    c.odmd.n_steps = f.count("n_steps");
    c.odmd.n_rows = f.count("n_rows");
    c.odmd.noise_sigma = f.number("noise_sigma");
    c.odmd.n_energies = f.count("n_energies");
    c.odmd.seed = static_cast<std::uint64_t>(f.integer("seed"));
    c.p0 = f.positive("p0");
    c.K = f.count("K");
    c.delta_E = f.positive("delta_E");
    c.D = f.count("D", 0);
    c.E_minus = f.number("E_minus");
    c.E_plus = f.number("E_plus");
    if (!(c.E_plus > c.E_minus)) throw ConfigError("field 'E_plus' must exceed E_minus");
    c.threshold_E = f.optional_number("threshold_E");
    return c;
}

json filter_summary(const ComposedFilter& filt)
{
    return {{"label", filt.spec.label}, {"E", filt.E}, {"xi", filt.xi}, {"target", filt.target},
            {"poles", filt.spec.total_multiplicity()}};
}

Result run_fig12(Fields& f)
{
    ODMDExperimentConfig c = odmd_config(f);
    c.threshold_unfiltered = f.positive("threshold_unfiltered");
    c.threshold_filtered = f.positive("threshold_filtered");
    c.uniform_runs = f.flag("uniform_runs");
    f.finish("fig12");
    const ComposedFilter filt = fig12_filter(c, build(c.model).total.eigenvalues());
    return {run_odmd_experiment(c), filter_summary(filt), "filter"};
}

Result run_odmd(Fields& f)
{
    ODMDExperimentConfig c = odmd_config(f);
    const bool filtered = f.flag("filtered");
    c.odmd.threshold = f.positive("threshold");
    f.finish("odmd");
    c.odmd.validate();

    const RVector E = build(c.model).total.eigenvalues();
    const int nE = c.odmd.n_energies;
    if (E.size() <= nE) throw ConfigError("field 'n_energies' exceeds the model dimension");
    const ReferenceState ref = reference_state(static_cast<std::size_t>(E.size()), c.p0);
    std::optional<ComposedFilter> filt;
    if (filtered) filt = fig12_filter(c, E);
    const ObservableTrace tr =
        synthesize_trace(E, ref.p, filt ? std::optional<RationalSpec>(filt->spec) : std::nullopt, c.odmd);
    const std::vector<ODMDRecord> rec = run_odmd_sweep(tr, E.head(nE), c.odmd);

    Result r;
    Table trace{"odmd_trace", {"tau", "re", "im"}, {}};
    for (Eigen::Index k = 0; k < tr.values.size(); ++k)
        trace.rows.push_back({c.odmd.dtau * static_cast<double>(k), tr.values[k].real(), tr.values[k].imag()});
    Table errs{"odmd", {"j"}, {}};
    for (int i = 0; i < nE; ++i) errs.columns.push_back("E" + std::to_string(i) + "_err");
    errs.columns.push_back("rank");
    double best = INFINITY;
    for (const ODMDRecord& x : rec) {
        std::vector<double> row{static_cast<double>(x.j)};
        row.insert(row.end(), x.errors.begin(), x.errors.end());
        row.push_back(static_cast<double>(x.rank));
        errs.rows.push_back(std::move(row));
        double worst = 0.0;
        for (double e : x.errors) worst = std::max(worst, e);
        best = std::min(best, worst);
    }
    r.out.tables = {std::move(errs), std::move(trace)};
    r.out.summary.push_back({"best_all", best});
    if (!rec.empty()) r.out.summary.push_back({"final_all", *std::max_element(rec.back().errors.begin(),
                                                                              rec.back().errors.end())});
    if (filt) {
        r.extra = filter_summary(*filt);
        r.extra_name = "filter";
    }
    return r;
}

json spec_json(const RationalSpec& s)
{
    json terms = json::array();
    for (const RationalTerm& t : s.terms) {
        json coeffs = json::array();
        for (cplx c : t.coeffs) coeffs.push_back(complex_json(c));
        terms.push_back({{"pole", complex_json(t.pole)}, {"coeffs", coeffs}});
    }
    json poly = json::array();
    for (cplx c : s.polynomial_part) poly.push_back(complex_json(c));
    return {{"label", s.label}, {"terms", terms}, {"polynomial_part", poly}};
}

json plan_json(const LCUPlan& p)
{
    json weights = json::array();
    for (cplx w : p.weights) weights.push_back(complex_json(w));
    const PlanMeta& m = p.meta;
    return {{"times", p.times},
            {"weights", weights},
            {"meta",
             {{"pole", complex_json(m.pole.z)},
              {"multiplicity", m.pole.multiplicity},
              {"class", to_string(m.pole.cls)},
              {"kernel", to_string(m.kernel)},
              {"q_rule", m.q_rule},
              {"y_rule", m.y_rule},
              {"J", m.J},
              {"L_y", m.L_y},
              {"L_q", m.L_q},
              {"T", m.T},
              {"eps", m.eps}}}};
}

Result run_resolvent(Fields& f)
{
    const SpinModelConfig model = f.model("model");
    const cplx z = f.complex("z");
    const int m = f.count("m");
    const double eps = f.positive("eps");
    const ComplexRule rule =
        parse_enum<ComplexRule>("rule", f.text("rule"),
                                {{"legendre", ComplexRule::Legendre},
                                 {"trapezoidal", ComplexRule::Trapezoidal},
                                 {"laguerre", ComplexRule::Laguerre}});
    RealPoleOptions ro;
    ro.y_rule = parse_enum<YRule>("y_rule", f.text("y_rule"),
                                  {{"trapezoidal", YRule::Trapezoidal},
                                   {"legendre", YRule::Legendre},
                                   {"hermite", YRule::Hermite}});
    ro.q_rule = parse_enum<QRule>("q_rule", f.text("q_rule"),
                                  {{"legendre", QRule::Legendre}, {"trapezoidal", QRule::Trapezoidal}});
    const auto J = f.optional_integer("J");
    const auto Ly = f.optional_integer("L_y");
    const auto Lq = f.optional_integer("L_q");
    for (const auto& [name, v] : {std::pair{"J", J}, std::pair{"L_y", Ly}, std::pair{"L_q", Lq}})
        if (v && (*v < 1 || *v > 1LL << 30)) throw ConfigError(std::string("field '") + name + "' out of range");
    if (Ly) ro.L_y = static_cast<int>(*Ly);
    if (Lq) ro.L_q = static_cast<int>(*Lq);
    std::optional<SpectralInterval> bounds;
    if (f.has("bounds")) {
        const json& b = f.raw("bounds");
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number() ||
            !(b[0].get<double>() < b[1].get<double>()))
            throw ConfigError("field 'bounds' must be [lo, hi] with lo < hi");
        bounds = SpectralInterval{b[0].get<double>(), b[1].get<double>()};
    }
    f.touch("bounds");
    f.finish("resolvent");

    const RVector E = build(model).total.eigenvalues();
    const SpectralInterval iv = bounds ? *bounds : spectral_interval(E);
    const std::optional<int> Ji = J ? std::optional<int>(static_cast<int>(*J)) : std::nullopt;
    LCUPlan plan;
    json predicted = nullptr;
    if (m > 1) {
        plan = plan_repeated_pole(z, m, eps, iv, Ji);
    } else if (z.imag() == 0.0) {
        plan = plan_real_pole(z.real(), iv, eps, ro);
        const CostPrediction p = predict_cost_real(pole_a_minus(z, iv), pole_a_plus(z, iv), eps);
        predicted = {{"J", p.J}, {"t_max", p.t_max}, {"t_tot", p.t_tot}, {"L_y", p.L_y}, {"L_q", p.L_q}};
    } else {
        plan = plan_complex_pole(z, eps, iv, Ji, rule);
        const CostPrediction p = predict_cost_complex(z, pole_a_plus(z, iv), eps);
        predicted = {{"J", p.J}, {"t_max", p.t_max}, {"t_tot", p.t_tot}};
    }
    const double error = plan_error_spectral(plan, E, [z, m](double e) { return std::pow(z - e, -m); });
    const PlanMetrics pm = plan_metrics(plan);

    Result r;
    Table t{"resolvent_plan", {"t", "w_re", "w_im"}, {}};
    for (std::size_t k = 0; k < plan.times.size(); ++k)
        t.rows.push_back({plan.times[k], plan.weights[k].real(), plan.weights[k].imag()});
    r.out.tables.push_back(std::move(t));
    r.out.summary = {{"error", error},
                     {"J", static_cast<double>(pm.J)},
                     {"t_max", pm.t_max},
                     {"t_tot", pm.t_tot},
                     {"interval_lo", iv.lo},
                     {"interval_hi", iv.hi}};
    r.extra = plan_json(plan);
    r.extra["metrics"] = {{"J", pm.J}, {"t_max", pm.t_max}, {"t_tot", pm.t_tot}};
    r.extra["error"] = error;
    r.extra["predicted"] = predicted;
    r.extra_name = "resolvent_plan";
    return r;
}

Result run_zolotarev(Fields& f)
{
    const int K = f.count("K");
    const double wbar = f.positive("omega_bar");
    const int points = f.count("points", 2);
    f.finish("zolotarev");
    if (wbar >= 1.0) throw ConfigError("field 'omega_bar' must lie in (0, 1)");

    const ZolotarevFilter z = zolotarev(K, wbar);
    const EquioscillationReport eq = equioscillation(z);
    Result r;
    Table t{"zolotarev", {"omega", "r_K", "sign_error"}, {}};
    for (int k = 0; k < points; ++k) {
        const double w = -1.0 + 2.0 * k / (points - 1);
        const double v = zolotarev_eval(z, w);
        const double sgn = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
        t.rows.push_back({w, v, std::abs(w) >= wbar ? std::abs(v - sgn) : NAN});
    }
    r.out.tables.push_back(std::move(t));
    r.out.summary = {{"err", z.err},
                     {"err_bound", z.err_bound},
                     {"gamma_K", z.gamma_K},
                     {"alternations", static_cast<double>(z.alternations)},
                     {"mean_gamma", zolotarev_mean_gamma(z)}};
    r.extra = {{"K", z.K},
               {"omega_bar", z.omega_bar},
               {"b", z.b},
               {"c", z.c},
               {"gamma_K", z.gamma_K},
               {"err", z.err},
               {"err_bound", z.err_bound},
               {"alternations", z.alternations},
               {"certificate",
                {{"points", eq.points},
                 {"values", eq.values},
                 {"alternations", eq.alternations},
                 {"max_abs", eq.max_abs},
                 {"min_abs", eq.min_abs}}},
               {"spec", spec_json(zolotarev_spec(z))}};
    r.extra_name = "zolotarev_filter";
    return r;
}

Result dispatch(const std::string& exp, Fields& f)
{
    if (exp == "fig4") return run_fig4(f);
    if (exp == "fig5") return run_fig5(f);
    if (exp == "fig6") return run_fig6(f);
    if (exp == "fig7") return run_fig7(f);
    if (exp == "fig9") return run_fig9(f);
    if (exp == "fig10") return run_fig10(f);
    if (exp == "fig11") return run_fig11(f);
    if (exp == "fig12") return run_fig12(f);
    if (exp == "appC") return run_appc(f);
    if (exp == "resolvent") return run_resolvent(f);
    if (exp == "zolotarev") return run_zolotarev(f);
    return run_odmd(f);
}

// ----- resolution and output -----

struct Overrides {
    std::string config_path;
    std::string profile = "desk";
    std::map<std::string, std::string> text;  // stored as JSON strings
    std::map<std::string, double> numbers;
    std::optional<long long> seed;
    std::optional<bool> filtered;
    std::vector<std::string> sets;  // key=value, value parsed as JSON when possible
};

json read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("field 'config': cannot open '" + path + "'");
    try {
        json j = json::parse(in);
        if (!j.is_object()) throw ConfigError("field 'config': top level must be an object");
        return j;
    } catch (const json::parse_error& e) {
        throw ConfigError("field 'config': " + std::string(e.what()));
    }
}

json resolve(const std::string& exp, const Overrides& o)
{
    json file;
    if (!o.config_path.empty()) file = read_config_file(o.config_path);
    std::string profile = o.profile;
    if (file.contains("profile") && o.profile == "desk") {
        if (!file["profile"].is_string()) throw ConfigError("field 'profile' must be a string");
        profile = file["profile"].get<std::string>();
    }
    if (profile != "desk" && profile != "extended") throw ConfigError("field 'profile' must be desk or extended");
    if (file.contains("experiment")) {
        if (file["experiment"] != exp) throw ConfigError("field 'experiment' does not match the subcommand");
        file.erase("experiment");
    }

    json j = defaults(exp, profile);
    if (!file.is_null()) j.merge_patch(file);
    j["profile"] = profile;
    for (const auto& [k, v] : o.text) j[k] = v;
    for (const auto& [k, v] : o.numbers) j[k] = v;
    if (o.seed) j["seed"] = *o.seed;
    if (o.filtered) j["filtered"] = *o.filtered;
    for (const std::string& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("field 'set': expected key=value, got '" + s + "'");
        std::string key = s.substr(0, eq);
        const std::string value = s.substr(eq + 1);
        json v;
        try {
            v = json::parse(value);
        } catch (const json::parse_error&) {
            v = value;
        }
        std::replace(key.begin(), key.end(), '.', '/');
        j[json::json_pointer("/" + key)] = v;
    }
    for (const char* key : {"model", "triangular_model", "grid_model"})
        if (j.contains(key) && j[key].is_string()) j[key] = model_json(model_shorthand(j[key].get<std::string>()));
    if (!j["output_dir"].is_string()) throw ConfigError("field 'output_dir' must be a string");
    return j;
}

void write_file(const std::filesystem::path& p, const std::string& body)
{
    std::ofstream out(p, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + p.string());
}

int run(const std::string& exp, const Overrides& o)
{
    const json cfg = resolve(exp, o);
    if (extended(cfg["profile"].get<std::string>()))
        std::cerr << "qrt-sim: extended profile uses 12-site models; expect long runtimes and several GB of memory\n";
    Fields f(cfg);
    const auto start = std::chrono::steady_clock::now();
    const Result r = dispatch(exp, f);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::filesystem::path dir = cfg["output_dir"].get<std::string>();
    std::filesystem::create_directories(dir);
    json files = json::array();
    for (const Table& t : r.out.tables) {
        write_file(dir / (t.name + ".csv"), to_csv(t));
        files.push_back(t.name + ".csv");
    }
    if (!r.extra.is_null()) {
        write_file(dir / (r.extra_name + ".json"), r.extra.dump(2) + "\n");
        files.push_back(r.extra_name + ".json");
    }
    json summary = json::object();
    for (const auto& [k, v] : r.out.summary) summary[k] = v;
    const json manifest{{"experiment", exp},
                        {"version", QRT_VERSION},
                        {"config", cfg},
                        {"seed", cfg["seed"]},
                        {"threads", worker_count()},
                        {"wall_clock_seconds", wall},
                        {"files", files},
                        {"summary", summary}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << exp << ": " << files.size() << " files in " << dir.string() << " (" << wall << " s)\n";
    for (const auto& [k, v] : r.out.summary) std::cout << "  " << k << " = " << v << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Classical simulation of quantum rational transformations"};
    app.set_version_flag("--version", std::string(QRT_VERSION));
    app.require_subcommand(1);

    Overrides o;
    std::string z, rule, model, propagator;
    std::map<std::string, double> nums;
    std::map<std::string, std::string> nums_text;
    long long seed = 0;
    bool filtered = false;

    struct NumFlag {
        const char* flag;
        const char* key;
        const char* help;
    };
    const std::vector<NumFlag> num_flags{
        {"--eps", "eps", "target accuracy"},
        {"--a", "a", "real pole position"},
        {"--m", "m", "pole multiplicity"},
        {"--J", "J", "number of quadrature nodes"},
        {"--K", "K", "Zolotarev degree"},
        {"--omega-bar", "omega_bar", "sign-filter gap half-width"},
        {"--p0", "p0", "ground-state overlap"},
        {"--trotter-dt", "trotter_dt", "Trotter step (0 uses eps)"},
        {"--trials", "trials", "number of random trials"},
    };

    std::vector<CLI::App*> subs;
    for (const std::string& exp : kExperiments) {
        CLI::App* sub = app.add_subcommand(exp, "run the " + exp + " experiment");
        sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--profile", o.profile, "desk (8 sites) or extended (12 sites)")
            ->check(CLI::IsMember({"desk", "extended"}));
        sub->add_option("--output-dir", o.text["output_dir"], "directory for CSV and JSON output");
        sub->add_option("--z", z, "complex pole, a+bi");
        sub->add_option("--rule", rule, "legendre, trapezoidal or laguerre");
        sub->add_option("--model", model, "mfim8, tfim8, heisenberg_chain6, triangular2x4, grid2x2x2");
        sub->add_option("--propagator", propagator, "exact or trotter");
        sub->add_option("--seed", seed, "random seed");
        sub->add_flag("--filtered,!--unfiltered", filtered, "apply the composed step filter (odmd)");
        for (const NumFlag& nf : num_flags) sub->add_option(nf.flag, nums_text[nf.key], nf.help);
        sub->add_option("--set", o.sets, "override any field, key=value with JSON values")->take_all();
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    std::string exp;
    CLI::App* chosen = nullptr;
    for (CLI::App* s : subs)
        if (s->parsed()) {
            exp = s->get_name();
            chosen = s;
        }

    try {
        if (o.text["output_dir"].empty()) o.text.erase("output_dir");
        if (!z.empty()) o.text["z"] = z;
        if (!rule.empty()) o.text["rule"] = rule;
        if (!model.empty()) o.text["model"] = model;
        if (!propagator.empty()) o.text["propagator"] = propagator;
        for (const NumFlag& nf : num_flags)
            if (chosen->count(nf.flag) > 0) o.numbers[nf.key] = parse_number(nums_text[nf.key], nf.key);
        if (chosen->count("--seed") > 0) o.seed = seed;
        if (chosen->count("--filtered") > 0 || chosen->count("--unfiltered") > 0) o.filtered = filtered;
        return run(exp, o);
    } catch (const ConfigError& e) {
        std::cerr << "qrt-sim: config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "qrt-sim: numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "qrt-sim: " << e.what() << "\n";
        return 1;
    }
}
