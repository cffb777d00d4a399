#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wavecert/exponents.hpp"
#include "wavecert/kirchhoff.hpp"
#include "wavecert/multiplier.hpp"
#include "wavecert/norms.hpp"
#include "wavecert/report.hpp"
#include "wavecert/semilinear.hpp"
#include "wavecert/solver.hpp"
#include "wavecert/source.hpp"

namespace wavecert::cli {

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"verify-identity", "verify-taylor", "verify-hardy",   "verify-trace",
                                                "verify-estimate", "solve-linear",  "oracle-compare", "verify-huygens",
                                                "exponents",       "semilinear",    "sweep"};
    return names;
}

/// Everything that determines a run. Serialised into every report.
struct RunConfig {
    std::string subcommand;
    // grid
    double dr = 1.0 / 64.0;
    std::vector<double> ladder;      ///< resolution ladder; empty means the subcommand default
    double t_max = 8.0;
    int L = -1;                      ///< -1: subcommand default
    double cfl = 0.9;
    int stride = 4;
    // weights
    double s = 1.5;
    double delta = 0.25;
    double alpha = 0.0;
    double p = 2.0;
    double theta = 0.05;
    double q = 4.0;
    std::vector<double> s_list;
    std::vector<double> t_list;
    // catalogue
    std::string source = "bump";
    std::vector<std::string> sources;
    std::string data = "bump";
    std::string variant = "all";
    // exponents
    int n = 3;
    std::string application = "undamped";
    std::string sweep;
    double T = 0.0;
    // semilinear
    double epsilon = 1e-3;
    double horizon = 50.0;
    bool damped = false;
    bool refine = false;
    std::vector<double> p_list;
    std::vector<double> eps_list;
    // sampling
    long samples = 10000;
    int count = 50;
    int probes = 20;
    std::uint64_t seed = 7;
    std::string out_dir = ".";
};

inline void to_json(json& j, const RunConfig& c) {
    j = {{"subcommand", c.subcommand}, {"dr", c.dr},           {"ladder", c.ladder},     {"t_max", c.t_max},
         {"L", c.L},                   {"cfl", c.cfl},         {"stride", c.stride},     {"s", c.s},
         {"delta", c.delta},           {"alpha", c.alpha},     {"p", c.p},               {"theta", c.theta},
         {"q", c.q},                   {"s_list", c.s_list},   {"t_list", c.t_list},     {"source", c.source},
         {"sources", c.sources},       {"data", c.data},       {"variant", c.variant},   {"n", c.n},
         {"application", c.application}, {"sweep", c.sweep},   {"T", c.T},               {"epsilon", c.epsilon},
         {"horizon", c.horizon},       {"damped", c.damped},   {"refine", c.refine},     {"p_list", c.p_list},
         {"eps_list", c.eps_list},     {"samples", c.samples}, {"count", c.count},       {"probes", c.probes},
         {"seed", c.seed}};
}

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CommandResult {
    json report;
    std::vector<Check> checks;
    std::vector<CsvTable> tables;
    std::vector<std::string> lines;   ///< human-readable summary

    bool ok() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void check(std::string name, bool pass, std::string detail = {}) {
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
};

namespace detail {

inline std::string fmt(double x, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

inline std::vector<double> ladder_or(const RunConfig& c, std::vector<double> fallback) {
    return c.ladder.empty() ? fallback : c.ladder;
}

inline std::vector<double> list_or(const std::vector<double>& v, std::vector<double> fallback) {
    return v.empty() ? fallback : v;
}

inline std::vector<double> refinement_changes(const std::vector<double>& v) {
    std::vector<double> out;
    for (std::size_t i = 1; i < v.size(); ++i) out.push_back(v[i] == 0.0 ? 0.0 : std::abs(v[i] - v[i - 1]) / std::abs(v[i]));
    return out;
}

inline double max_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline CommandResult verify_identity(const RunConfig& c) {
    require(c.samples >= 1, "verify-identity: samples must be >= 1");
    CommandResult res;
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    json radial = json::array();
    CsvTable tab{"verify-identity", {"test_function", "kind", "points", "worst_residual"}, {}};
    double worst_all = 0.0;
    for (const auto& tf : radial_test_functions()) {
        double worst = 0.0;
        for (long i = 0; i < c.samples; ++i) {
            const double t = 10.0 * u(rng), r = 1e-3 + (t + 1.0) * u(rng), s = 1.0 + u(rng);
            worst = std::max(worst, identity_residual(tf, t, r, s, IdentityPart::Combined));
        }
        worst_all = std::max(worst_all, worst);
        radial.push_back({{"id", tf.id}, {"points", c.samples}, {"worst_residual", worst}});
        tab.add(tf.id, std::string("pointwise"), static_cast<std::size_t>(c.samples), worst);
    }
    json modes = json::array();
    const long sphere_points = std::max<long>(20, c.samples / 100);
    for (int l = 1; l <= 3; ++l) {
        const auto tf = mode_test_function(l, l - 1);
        double worst = 0.0;
        for (long i = 0; i < sphere_points; ++i) {
            const double t = 8.0 * u(rng), r = 0.05 + t * u(rng), s = 1.0 + u(rng);
            worst = std::max(worst, identity_residual_sphere(tf, t, r, s, IdentityPart::Combined));
        }
        worst_all = std::max(worst_all, worst);
        modes.push_back({{"id", tf.id}, {"l", l}, {"m", l - 1}, {"points", sphere_points}, {"worst_residual", worst}});
        tab.add(tf.id, std::string("sphere-integrated"), static_cast<std::size_t>(sphere_points), worst);
    }
    res.report = {{"radial", radial}, {"single_mode", modes}, {"worst_residual", worst_all}, {"tolerance", 1e-9}};
    res.tables.push_back(std::move(tab));
    res.check("combined residual <= 1e-9", worst_all <= 1e-9, "worst " + detail::fmt(worst_all, 3));
    res.lines.push_back("worst combined residual " + detail::fmt(worst_all, 3));
    return res;
}

inline CommandResult verify_taylor(const RunConfig& c) {
    require(c.samples >= 1, "verify-taylor: samples must be >= 1");
    CommandResult res;
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double min_gap = std::numeric_limits<double>::infinity();
    double at_t = 0, at_r = 0, at_s = 0;
    for (long i = 0; i < c.samples; ++i) {
        const double s = 1.0 + u(rng), t = 100.0 * u(rng), r = (t + 1.0) * u(rng);
        const double g = taylor_gap(t, r, s);
        if (g < min_gap) {
            min_gap = g;
            at_t = t, at_r = r, at_s = s;
        }
    }
    double face = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double t = 100.0 * u(rng), r = (t + 1.0) * u(rng), s = 1.0 + u(rng);
        face = std::max({face, std::abs(taylor_gap(t, 0.0, s)), std::abs(taylor_gap(t, r, 1.0))});
    }
    res.report = {{"samples", c.samples},
                  {"min_gap", min_gap},
                  {"argmin", {{"t", at_t}, {"r", at_r}, {"s", at_s}}},
                  {"max_abs_on_faces", face},
                  {"tolerance", -1e-12}};
    res.check("min gap >= -1e-12", min_gap >= -1e-12, "min " + detail::fmt(min_gap, 3));
    res.check("exact zeros on r = 0 and s = 1", face == 0.0, "max |gap| " + detail::fmt(face, 3));
    res.lines.push_back("min gap " + detail::fmt(min_gap, 3) + " over " + std::to_string(c.samples) + " samples");
    return res;
}

inline CommandResult verify_hardy(const RunConfig& c) {
    require(c.count >= 1, "verify-hardy: count must be >= 1");
    CommandResult res;
    const auto s_list = detail::list_or(c.s_list, {1.2, 1.8});
    const auto t_list = detail::list_or(c.t_list, {0.0, 5.0, 20.0});
    std::vector<HardyVariant> variants{HardyVariant::Hardy2, HardyVariant::Hardy1, HardyVariant::Hardy3};
    if (c.variant != "all") variants = {hardy_variant_from_string(c.variant)};
    std::mt19937_64 rng(c.seed);
    CsvTable tab{"verify-hardy", {"s", "t", "profile", "hardy2", "hardy1", "hardy3", "hardy3_refined"}, {}};
    json cells = json::array();
    double w2 = 0, w1 = 0, w3 = 0, drift = 0;
    bool h3ok = true;
    for (double s : s_list) {
        require(s > 1.0 && s < 2.0, "verify-hardy: s must lie in (1, 2)");
        for (double t : t_list) {
            double m2 = 0, m1 = 0, m3 = 0, d3 = 0;
            for (int i = 0; i < c.count; ++i) {
                const auto prof = random_profile(rng, t);
                const double h2 = hardy_ratio(prof, s, t, HardyVariant::Hardy2);
                const double h1 = hardy_ratio(prof, s, t, HardyVariant::Hardy1);
                const double h3 = hardy_ratio(prof, s, t, HardyVariant::Hardy3);
                const double h3f = hardy_ratio(prof, s, t, HardyVariant::Hardy3, 512);
                m2 = std::max(m2, h2), m1 = std::max(m1, h1), m3 = std::max(m3, h3);
                d3 = std::max(d3, h3f > 0.0 ? std::abs(h3 - h3f) / h3f : 0.0);
                tab.add(s, t, i, h2, h1, h3, h3f);
            }
            const double k3 = hardy3_proof_constant(s);
            h3ok = h3ok && m3 <= k3;
            w2 = std::max(w2, m2), w1 = std::max(w1, m1), w3 = std::max(w3, m3 / k3), drift = std::max(drift, d3);
            cells.push_back({{"s", s}, {"t", t}, {"profiles", c.count}, {"max_hardy2", m2}, {"max_hardy1", m1},
                             {"max_hardy3", m3}, {"hardy3_constant", k3}, {"hardy3_refinement_change", d3}});
        }
    }
    res.report = {{"cells", cells},
                  {"max_hardy2", w2},
                  {"max_hardy1", w1},
                  {"max_hardy3_over_constant", w3},
                  {"hardy3_refinement_change", drift}};
    res.tables.push_back(std::move(tab));
    for (auto v : variants) {
        if (v == HardyVariant::Hardy2) res.check("hardy2 ratio <= 4", w2 <= 4.0, "max " + detail::fmt(w2));
        if (v == HardyVariant::Hardy1) res.check("hardy1 ratio <= 10", w1 <= 10.0, "max " + detail::fmt(w1));
        if (v == HardyVariant::Hardy3) {
            res.check("3hardy ratio <= 2/(s-1)", h3ok, "max ratio/constant " + detail::fmt(w3));
            res.check("3hardy refinement-stable (1e-6)", drift <= 1e-6, "change " + detail::fmt(drift, 3));
        }
    }
    res.lines.push_back("hardy2 " + detail::fmt(w2) + ", hardy1 " + detail::fmt(w1) + ", 3hardy/constant " + detail::fmt(w3));
    return res;
}

inline CommandResult verify_trace(const RunConfig& c) {
    CommandResult res;
    const auto ladder = detail::ladder_or(c, {1.0 / 32.0, 1.0 / 64.0});
    const auto s_list = detail::list_or(c.s_list, {c.s});
    const std::vector<std::string> ids = c.sources.empty() ? std::vector<std::string>{"bump", "bump-angular", "cone-fill", "shell"} : c.sources;
    CsvTable tab{"verify-trace", {"source", "s", "dr", "t", "trace", "rhs", "constant", "case1_ratio", "case2_ratio"}, {}};
    json rows = json::array();
    double worst_change = 0.0, worst_case = 0.0;
    bool reduction = true;
    for (const auto& id : ids) {
        const SourceSpec src = source_by_id(id);
        for (double s : s_list) {
            std::vector<double> k0, k1, k2;
            for (double dr : ladder) {
                const Grid g = Grid::make(dr, c.t_max, c.L >= 0 ? c.L : src.angular_degree, c.cfl);
                const auto sol = solve_linear(src, g, {c.stride});
                double best = 0, best1 = 0, best2 = 0;
                for (std::size_t k = 1; k < sol.slices(); ++k) {
                    const auto d = slice_data(sol.u, k);
                    const auto rep = trace_norm(d, s);
                    const auto cc = trace_case_check(d, s);
                    reduction = reduction && rep.reduction_holds();
                    worst_case = std::max({worst_case, cc.case1_ratio(), cc.case2_ratio()});
                    best = std::max(best, rep.constant());
                    best1 = std::max(best1, rep.constant1());
                    best2 = std::max(best2, rep.constant2());
                    if (dr == ladder.back()) tab.add(id, s, dr, rep.t, rep.trace, rep.rhs, rep.constant(), cc.case1_ratio(), cc.case2_ratio());
                }
                k0.push_back(best), k1.push_back(best1), k2.push_back(best2);
            }
            const double ch = detail::max_of(detail::refinement_changes(k0));
            worst_change = std::max(worst_change, ch);
            rows.push_back({{"source", id}, {"s", s}, {"ladder", ladder}, {"constant", k0}, {"case1_constant", k1},
                            {"case2_constant", k2}, {"relative_change", ch}});
            res.lines.push_back(id + " s=" + detail::fmt(s) + ": constant " + detail::fmt(k0.back()) + " (change " +
                                detail::fmt(100.0 * ch, 3) + "%)");
        }
    }
    res.report = {{"sources", rows}, {"worst_relative_change", worst_change}, {"worst_case_bound_ratio", worst_case},
                  {"reduction_holds", reduction}};
    res.tables.push_back(std::move(tab));
    res.check("trace constant refinement-stable (10%)", worst_change <= 0.1, "worst change " + detail::fmt(worst_change, 3));
    res.check("trace <= max(sqrt2 case1, 2 case2) on every slice", reduction);
    res.check("regime bounds t>=3r-2 and t<=3r-2 hold", worst_case <= 1.01, "worst lhs/bound " + detail::fmt(worst_case, 4));
    return res;
}

inline CommandResult verify_estimate(const RunConfig& c) {
    CommandResult res;
    WeightParams wp;
    wp.s = c.s, wp.delta = c.delta, wp.alpha = c.alpha, wp.p = c.p, wp.theta = c.theta, wp.q = c.q;
    EstimateOptions opt;
    opt.dr_ladder = detail::ladder_or(c, {1.0 / 32.0, 1.0 / 64.0});
    opt.t_max = c.t_max;
    opt.L = c.L;
    opt.slice_stride = std::max(1, c.stride / 2);
    std::vector<std::string> ids = c.sources.empty() ? std::vector<std::string>{c.source} : c.sources;
    if (ids.size() == 1 && ids[0] == "family") {
        ids.clear();
        for (int i = 0; i < 20; ++i) ids.push_back(source_family(i).id);
    }
    json reports = json::array();
    CsvTable tab{"verify-estimate", {"source", "t", "grad", "phi_over_r", "angular", "lhs"}, {}};
    bool finite = true, stable = true, integrating = true;
    double worst_ratio = 0.0;
    for (const auto& id : ids) {
        const auto rep = estimate_ratio(source_by_id(id), wp, opt);
        reports.push_back(rep);
        for (const auto& row : rep.slices) tab.add(id, row.t, row.grad, row.phi_over_r, row.angular, row.lhs);
        finite = finite && std::isfinite(rep.ratio);
        stable = stable && rep.stable();
        for (const auto& tp : rep.trend) {
            integrating = integrating && tp.integrating.holds();
            finite = finite && std::isfinite(tp.flux_outgoing_ratio) && std::isfinite(tp.flux_incoming_ratio);
        }
        worst_ratio = std::max(worst_ratio, rep.ratio);
        res.lines.push_back(id + ": sup LHS/RHS " + detail::fmt(rep.ratio) + " (change " +
                            detail::fmt(100.0 * rep.relative_change(), 3) + "%)");
    }
    res.report = {{"weights", wp}, {"reports", reports}, {"max_ratio", worst_ratio}};
    res.tables.push_back(std::move(tab));
    res.check("ratio and cone fluxes finite", finite);
    res.check("ratio stable within 10% across refinement", stable);
    res.check("per-cone fluxes bounded by the work integral", integrating);
    return res;
}

inline CommandResult solve_linear_cmd(const RunConfig& c) {
    CommandResult res;
    const SourceSpec src = source_by_id(c.source);
    const Grid g = Grid::make(c.dr, c.t_max, c.L >= 0 ? c.L : src.angular_degree, c.cfl);
    const auto sol = solve_linear(src, g, {c.stride});
    CsvTable tab{"solve-linear", {"t", "r", "sphere_l2"}, {}};
    double amp = 0.0;
    for (std::size_t k = 0; k < sol.slices(); ++k)
        for (int j = 0; j < g.nr; ++j) {
            double l2 = 0.0;
            for (std::size_t idx = 0; idx < sol.u.modes(); ++idx) l2 += sol.u.mode(k, idx)[j] * sol.u.mode(k, idx)[j];
            l2 = std::sqrt(l2);
            amp = std::max(amp, l2);
            tab.add(sol.time(k), g.r(j), l2);
        }
    res.report = {{"source", src.id}, {"grid", g}, {"slices", sol.slices()}, {"max_sphere_l2", number(amp)},
                  {"finite", !sol.blowup.has_value() && sol.u.all_finite()}};
    if (sol.blowup) res.report["blowup"] = {{"t", sol.blowup->t}, {"r", sol.blowup->r}, {"mode", sol.blowup->mode}};
    res.tables.push_back(std::move(tab));
    res.check("solution finite", !sol.blowup.has_value() && sol.u.all_finite());
    res.lines.push_back(src.id + ": " + std::to_string(sol.slices()) + " slices, max ||u||_{L2(S2)} " + detail::fmt(amp));
    return res;
}

inline CommandResult oracle_compare(const RunConfig& c) {
    CommandResult res;
    const SourceSpec src = source_by_id(c.source);
    const auto ladder = detail::ladder_or(c, {1.0 / 64.0, 1.0 / 128.0});
    const int L = c.L >= 0 ? c.L : 8;
    const double t_end = c.t_max;
    const auto probes = probe_set(c.probes, std::min(1.0, t_end), t_end);
    std::vector<double> errs;
    bool warn = false;
    CsvTable tab{"oracle-compare", {"dr", "probe", "t", "x", "y", "z", "solver", "oracle", "oracle_error"}, {}};
    for (double dr : ladder) {
        const Grid g = Grid::make(dr, t_end, L, c.cfl);
        const auto cmp = compare_with_kirchhoff(solve_linear(src, g, {c.stride}), src, probes);
        errs.push_back(cmp.relative_l2);
        warn = warn || cmp.oracle_warning;
        for (std::size_t i = 0; i < probes.size(); ++i)
            tab.add(dr, i, probes[i].t, probes[i].x.x, probes[i].x.y, probes[i].x.z, cmp.solver[i], cmp.oracle[i], cmp.oracle_error[i]);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];
    res.report = {{"source", src.id}, {"L", L}, {"ladder", ladder}, {"relative_l2", errs}, {"oracle_warning", warn}};
    res.tables.push_back(std::move(tab));
    res.check("relative L2 discrepancy <= 2% at baseline", errs.front() <= 0.02, "baseline " + detail::fmt(100.0 * errs.front(), 3) + "%");
    res.check("discrepancy decreases under refinement", decreasing);
    for (std::size_t i = 0; i < errs.size(); ++i)
        res.lines.push_back("dr = " + detail::fmt(ladder[i]) + ": relative L2 " + detail::fmt(100.0 * errs[i], 3) + "%");
    return res;
}

inline CommandResult verify_huygens(const RunConfig& c) {
    CommandResult res;
    const SourceSpec src = source_by_id(c.source);
    require(src.time_support.has_value() && std::isfinite(src.spatial_radius),
            "verify-huygens: source '" + src.id + "' is not compact in space-time");
    const auto ladder = detail::ladder_or(c, {1.0 / 32.0, 1.0 / 64.0});
    const auto probes = trailing_probes(src, c.t_max, 4, 4);
    std::vector<double> resid;
    for (double dr : ladder) {
        const Grid g = Grid::make(dr, c.t_max, c.L >= 0 ? c.L : src.angular_degree, c.cfl);
        resid.push_back(huygens_residual(solve_linear(src, g, {c.stride}), src, probes));
    }
    const double kir = huygens_residual_kirchhoff(src, probes);
    bool halving = true;
    for (std::size_t i = 1; i < resid.size(); ++i) halving = halving && resid[i] <= 0.5 * resid[i - 1];
    res.report = {{"source", src.id}, {"ladder", ladder}, {"probes", probes.size()}, {"trailing_max_abs", resid},
                  {"kirchhoff_trailing_max_abs", kir}};
    res.check("trailing max |phi| <= 1e-4 at the finest level", resid.back() <= 1e-4, detail::fmt(resid.back(), 3));
    res.check("trailing residual halves under refinement", halving);
    res.check("Kirchhoff trailing values exactly 0", kir == 0.0);
    for (std::size_t i = 0; i < resid.size(); ++i)
        res.lines.push_back("dr = " + detail::fmt(ladder[i]) + ": trailing max |phi| " + detail::fmt(resid[i], 3));
    return res;
}

inline CommandResult exponents_cmd(const RunConfig& c) {
    CommandResult res;
    const double pc = strauss_exponent(c.n);
    const double residual = std::abs(strauss_polynomial(c.n, pc));
    res.report = {{"n", c.n}, {"p_c", pc}, {"residual", residual}};
    std::ostringstream line;
    line << "p_c(" << c.n << ") = " << std::setprecision(8) << pc;
    res.lines.push_back(line.str());
    res.check("strauss back-substitution residual <= 1e-12", residual <= 1e-12, detail::fmt(residual, 3));
    FeasibilityOptions fo;
    fo.q = c.q;
    fo.T = c.T;
    const Application app = application_from_string(c.application);
    if (!c.sweep.empty()) {
        const auto range = parse_sweep(c.sweep);
        const auto rows = feasibility_sweep(range, app, fo);
        CsvTable tab{"exponents", {"p", "application", "s", "alpha", "delta", "theta", "tail_exponent", "feasible", "binding"}, {}};
        json arr = json::array();
        for (const auto& r : rows) {
            arr.push_back(r);
            tab.add(r.p, to_string(r.application), r.s, r.alpha, r.delta, r.theta, r.tail_exponent, r.feasible,
                    "\"" + r.binding + "\"");
        }
        res.report["sweep"] = arr;
        res.tables.push_back(std::move(tab));
        res.lines.push_back("sweep " + c.sweep + ": " + std::to_string(rows.size()) + " rows");
    }
    if (!c.p_list.empty()) {
        json arr = json::array();
        for (double p : c.p_list) {
            auto rep = feasibility(p, app, fo);
            json j = rep;
            if (rep.feasible && p < 3.0) {
                const auto cc = (app == Application::Undamped)
                    ? cauchy_check([&](double T) { return m_integral(p, rep.delta, T).value; }, rep.tail_exponent)
                    : cauchy_check([&](double T) { return n_integral(p, rep.delta, rep.theta, T).reduced; }, rep.tail_exponent);
                j["cauchy"] = cc;
                res.check("Cauchy verdict matches tail exponent at p = " + detail::fmt(p), cc.agrees());
            }
            arr.push_back(j);
            res.lines.push_back(to_string(app) + " p = " + detail::fmt(p) + ": " + (rep.feasible ? "feasible" : "infeasible (" + rep.binding + ")"));
        }
        res.report["feasibility"] = arr;
    }
    const double und = feasibility_threshold(Application::Undamped, 2.05, 2.9);
    const double dmp = feasibility_threshold(Application::Damped, 1.5, 2.9);
    res.report["threshold_undamped"] = und;
    res.report["threshold_damped"] = dmp;
    res.check("undamped feasibility threshold = 1+sqrt2 (1e-6)", std::abs(und - (1.0 + std::sqrt(2.0))) <= 1e-6, detail::fmt(und, 10));
    res.check("damped feasibility threshold = (3+sqrt17)/4 (1e-6)", std::abs(dmp - (3.0 + std::sqrt(17.0)) / 4.0) <= 1e-6, detail::fmt(dmp, 10));
    return res;
}

inline SemilinearOptions semilinear_options(const RunConfig& c) {
    SemilinearOptions o;
    o.dr = c.ladder.empty() ? c.dr : c.ladder.front();
    o.L = c.L >= 0 ? c.L : 2;
    o.cfl = c.cfl;
    o.slice_stride = c.stride;
    o.bootstrap.theta = c.theta;
    o.bootstrap.q = c.q;
    return o;
}

inline CommandResult semilinear_cmd(const RunConfig& c) {
    CommandResult res;
    const auto data = data_by_id(c.data, c.epsilon);
    const auto opt = semilinear_options(c);
    const auto rec = c.refine ? evolve_with_refinement(c.p, data, c.damped, c.horizon, opt)
                              : evolve_semilinear(c.p, data, c.damped, c.horizon, opt);
    CsvTable tab{"semilinear", {"t", "Q", "amplitude"}, {}};
    bool q_ok = true;
    for (std::size_t i = 0; i < rec.Q.size(); ++i) {
        tab.add(rec.times[i], rec.Q[i], rec.amplitude[i]);
        if (rec.outcome == Outcome::GlobalToHorizon || rec.times[i] < rec.T) q_ok = q_ok && std::isfinite(rec.Q[i]) && rec.Q[i] >= 0.0;
    }
    res.report = rec;
    res.tables.push_back(std::move(tab));
    res.check("Q finite and non-negative before T*", q_ok);
    if (c.refine && rec.outcome == Outcome::Blowup)
        res.check("T* agrees within 10% under refinement", rec.refinement_agrees(), detail::fmt(rec.T) + " vs " + detail::fmt(*rec.refined_T));
    res.lines.push_back(std::string(c.damped ? "damped" : "undamped") + " p = " + detail::fmt(c.p) + ", eps = " + detail::fmt(c.epsilon) +
                        ": " + to_string(rec.outcome) + " T = " + detail::fmt(rec.T) + ", Q_max " + detail::fmt(rec.Q_max()) +
                        (rec.bounded_q() ? " (bounded)" : " (not bounded)"));
    return res;
}

inline CommandResult sweep_cmd(const RunConfig& c) {
    CommandResult res;
    const auto ps = detail::list_or(c.p_list, {c.p});
    const auto eps = detail::list_or(c.eps_list, {c.epsilon});
    const auto cells = lifespan_sweep(ps, eps, c.damped, c.horizon, c.data, semilinear_options(c));
    CsvTable tab{"sweep", {"p", "epsilon", "damped", "outcome", "T_star", "Q_max"}, {}};
    json arr = json::array();
    int failed = 0;
    for (const auto& cell : cells) {
        if (cell.record) {
            arr.push_back(*cell.record);
            tab.add(cell.p, cell.epsilon, cell.damped, to_string(cell.record->outcome), cell.record->T, cell.record->Q_max());
        } else {
            ++failed;
            arr.push_back({{"p", cell.p}, {"epsilon", cell.epsilon}, {"damped", cell.damped}, {"error", cell.error}});
            tab.add(cell.p, cell.epsilon, cell.damped, std::string("error"), std::nan(""), std::nan(""));
        }
    }
    const bool mono = lifespan_monotone(cells);
    res.report = {{"cells", arr}, {"failed_cells", failed}, {"lifespan_nonincreasing_in_epsilon", mono}};
    res.tables.push_back(std::move(tab));
    res.check("T* nonincreasing in epsilon at fixed p", mono);
    res.lines.push_back(std::to_string(cells.size()) + " cells, " + std::to_string(failed) + " failed");
    return res;
}

/// Runs one subcommand; the report embeds config, seed, grid information and version.
inline CommandResult execute(const RunConfig& c) {
    CommandResult res;
    if (c.subcommand == "verify-identity") res = verify_identity(c);
    else if (c.subcommand == "verify-taylor") res = verify_taylor(c);
    else if (c.subcommand == "verify-hardy") res = verify_hardy(c);
    else if (c.subcommand == "verify-trace") res = verify_trace(c);
    else if (c.subcommand == "verify-estimate") res = verify_estimate(c);
    else if (c.subcommand == "solve-linear") res = solve_linear_cmd(c);
    else if (c.subcommand == "oracle-compare") res = oracle_compare(c);
    else if (c.subcommand == "verify-huygens") res = verify_huygens(c);
    else if (c.subcommand == "exponents") res = exponents_cmd(c);
    else if (c.subcommand == "semilinear") res = semilinear_cmd(c);
    else if (c.subcommand == "sweep") res = sweep_cmd(c);
    else throw PreconditionError("unknown subcommand '" + c.subcommand + "'");
    json checks = json::array();
    for (const auto& ch : res.checks) checks.push_back({{"name", ch.name}, {"pass", ch.pass}, {"detail", ch.detail}});
    json full = {{"version", version_tag}, {"subcommand", c.subcommand}, {"seed", c.seed}, {"config", c},
                 {"result", res.report}, {"checks", checks}, {"pass", res.ok()}};
    res.report = std::move(full);
    return res;
}

/// Writes <out>/<subcommand>.json and one CSV per table.
inline std::vector<std::string> persist(const CommandResult& res, const RunConfig& c) {
    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    std::vector<std::string> written;
    const fs::path j = fs::path(c.out_dir) / (c.subcommand + ".json");
    std::ofstream(j) << res.report.dump(2) << '\n';
    written.push_back(j.string());
    for (const auto& t : res.tables) {
        const fs::path p = fs::path(c.out_dir) / (t.name + ".csv");
        std::ofstream os(p);
        t.write(os);
        written.push_back(p.string());
    }
    return written;
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

inline std::string description(const std::string& name) {
    if (name == "verify-identity") return "residual of the multiplier divergence identity at random points";
    if (name == "verify-taylor") return "sign of the weight comparison gap on r <= t + 1";
    if (name == "verify-hardy") return "Hardy-type ratios over random compactly supported profiles";
    if (name == "verify-trace") return "sup-in-r trace inequality and its two radial regimes";
    if (name == "verify-estimate") return "weighted space-time estimate: sup_t LHS / RHS and cone fluxes";
    if (name == "solve-linear") return "solve the forced linear wave equation with zero data";
    if (name == "oracle-compare") return "compare the solver with the Kirchhoff retarded potential";
    if (name == "verify-huygens") return "trailing-region residual for a time-compact source";
    if (name == "exponents") return "critical exponents, feasibility of the weight exponents, tail integrals";
    if (name == "semilinear") return "evolve the semilinear equation and monitor the bootstrap functional";
    if (name == "sweep") return "lifespan table over a (p, epsilon) grid";
    return {};
}

inline void add_options(CLI::App& sub, RunConfig& c, const std::string& name) {
    auto grid = [&] {
        sub.add_option("--dr", c.dr, "radial step")->check(CLI::PositiveNumber);
        sub.add_option("--ladder", c.ladder, "resolution ladder, e.g. 0.03125,0.015625")->delimiter(',');
        sub.add_option("--t-max", c.t_max, "time horizon of the linear solve")->check(CLI::PositiveNumber);
        sub.add_option("--L", c.L, "spherical-harmonic band limit");
        sub.add_option("--cfl", c.cfl, "dt / dr (at most 0.9)");
        sub.add_option("--stride", c.stride, "store every stride-th step")->check(CLI::PositiveNumber);
    };
    auto weights = [&] {
        sub.add_option("--s", c.s, "weight exponent s in (1, 2)");
        sub.add_option("--delta", c.delta, "source weight exponent delta > 0");
        sub.add_option("--alpha", c.alpha, "shift alpha >= 0");
        sub.add_option("--theta", c.theta, "interpolation parameter");
        sub.add_option("--q", c.q, "L^q exponent on the sphere");
    };
    if (name == "verify-identity" || name == "verify-taylor") {
        sub.add_option("--samples", c.samples, "number of random points");
    } else if (name == "verify-hardy") {
        sub.add_option("--variant", c.variant, "hardy2, hardy1, hardy3 or all");
        sub.add_option("--s-list", c.s_list, "values of s")->delimiter(',');
        sub.add_option("--t-list", c.t_list, "values of t")->delimiter(',');
        sub.add_option("--count", c.count, "random profiles per (s, t)");
    } else if (name == "verify-trace") {
        grid();
        sub.add_option("--s", c.s, "weight exponent s in (1, 2)");
        sub.add_option("--s-list", c.s_list, "values of s")->delimiter(',');
        sub.add_option("--sources", c.sources, "catalogue ids")->delimiter(',');
    } else if (name == "verify-estimate") {
        grid();
        weights();
        sub.add_option("--source", c.source, "catalogue id, or 'family' for all 20 family members");
        sub.add_option("--sources", c.sources, "catalogue ids")->delimiter(',');
    } else if (name == "solve-linear" || name == "oracle-compare" || name == "verify-huygens") {
        grid();
        sub.add_option("--source", c.source, "catalogue id");
        if (name == "oracle-compare") sub.add_option("--probes", c.probes, "number of probe points");
    } else if (name == "exponents") {
        sub.add_option("--n", c.n, "space dimension for p_c(n)");
        sub.add_option("--p", c.p_list, "exponents to check for feasibility")->delimiter(',');
        sub.add_option("--application", c.application, "undamped or damped");
        sub.add_option("--sweep", c.sweep, "feasibility sweep p0:p1:steps");
        sub.add_option("--T", c.T, "truncation for the tail integral");
        sub.add_option("--q", c.q, "L^q exponent on the sphere");
    } else if (name == "semilinear" || name == "sweep") {
        grid();
        sub.add_option("--data", c.data, "bump, bump-moving or angular");
        sub.add_option("--horizon", c.horizon, "final time")->check(CLI::PositiveNumber);
        sub.add_flag("--damped", c.damped, "scale-invariant damping (Liouville variables)");
        sub.add_option("--theta", c.theta, "interpolation parameter of the damped functional");
        sub.add_option("--q", c.q, "sphere exponent of the damped functional");
        if (name == "semilinear") {
            sub.add_option("--p", c.p, "power of the nonlinearity");
            sub.add_option("--epsilon", c.epsilon, "data amplitude");
            sub.add_flag("--refine", c.refine, "confirm blow-up on a grid with half the spacing");
        } else {
            sub.add_option("--p", c.p_list, "powers")->delimiter(',');
            sub.add_option("--epsilon", c.eps_list, "amplitudes")->delimiter(',');
        }
    }
}

/// Semilinear runs default to a coarser grid than the linear subcommands.
inline void apply_defaults(RunConfig& c, const CLI::App& sub) {
    if ((c.subcommand == "semilinear" || c.subcommand == "sweep") && sub.count("--dr") == 0) c.dr = 1.0 / 8.0;
    if (c.subcommand == "oracle-compare" && sub.count("--t-max") == 0) c.t_max = 3.0;
    if (c.subcommand == "verify-huygens" && sub.count("--t-max") == 0) c.t_max = 10.0;
    if (c.subcommand == "verify-taylor" && sub.count("--samples") == 0) c.samples = 1000000;
}

/// Full command-line entry point. Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    RunConfig c;
    CLI::App app{"wavecert: numerical certification of weighted estimates for 3-D wave equations"};
    app.set_version_flag("--version", std::string("wavecert ") + version_tag);
    app.set_config("--config", "", "INI/TOML file with option values; sections name subcommands");
    app.add_option("--out", c.out_dir, "output directory")->envname("WAVECERT_OUT");
    app.add_option("--seed", c.seed, "seed of the deterministic generator");
    app.require_subcommand(1);
    app.fallthrough();
    std::vector<CLI::App*> subs;
    for (const auto& name : subcommands()) {
        auto* sub = app.add_subcommand(name, description(name));
        add_options(*sub, c, name);
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    for (auto* sub : subs)
        if (sub->parsed()) {
            c.subcommand = sub->get_name();
            apply_defaults(c, *sub);
        }
    out << "config: " << json(c).dump() << '\n';
    CommandResult res;
    try {
        res = execute(c);
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return 1;
    }
    for (const auto& l : res.lines) out << l << '\n';
    for (const auto& ch : res.checks)
        out << (ch.pass ? "PASS " : "FAIL ") << ch.name << (ch.detail.empty() ? "" : " [" + ch.detail + "]") << '\n';
    try {
        for (const auto& f : persist(res, c)) out << "wrote " << f << '\n';
    } catch (const std::exception& e) {
        err << "error: cannot write outputs: " << e.what() << '\n';
        return 2;
    }
    if (!res.ok()) {
        for (const auto& ch : res.checks)
            if (!ch.pass) err << "check failed: " << ch.name << '\n';
        return 1;
    }
    return 0;
}

} // namespace wavecert::cli
