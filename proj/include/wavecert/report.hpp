#pragma once

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavecert/exponents.hpp"
#include "wavecert/norms.hpp"
#include "wavecert/semilinear.hpp"

namespace wavecert {

using json = nlohmann::ordered_json;

#ifndef WAVECERT_VERSION
#define WAVECERT_VERSION "0.0.0"
#endif

inline constexpr const char* version_tag = WAVECERT_VERSION;

/// Non-finite values become strings so that reports stay valid JSON and keep the information.
inline json number(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline json number_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

inline void to_json(json& j, const Grid& g) {
    j = {{"dr", g.dr}, {"nr", g.nr}, {"dt", g.dt}, {"nt", g.nt}, {"L", g.L}, {"cfl", g.cfl}, {"r_max", g.r_max()},
         {"t_max", g.t_max()}};
}

inline void to_json(json& j, const WeightParams& w) {
    j = {{"s", w.s}, {"delta", w.delta}, {"alpha", w.alpha}, {"p", w.p}, {"theta", w.theta}, {"q", w.q}};
}

inline void to_json(json& j, const IntegratingCheck& c) {
    j = {{"work", number(c.work)},
         {"sup_slice_energy", number(c.sup_slice_energy)},
         {"sup_flux_outgoing", number(c.sup_flux_outgoing)},
         {"sup_flux_incoming", number(c.sup_flux_incoming)},
         {"tolerance", c.tolerance},
         {"holds", c.holds()}};
}

inline void to_json(json& j, const NormReport& r) {
    j = {{"id", r.id},
         {"source", r.source_id},
         {"params", r.params},
         {"lhs", number(r.lhs)},
         {"lhs_grad", number(r.lhs_grad)},
         {"lhs_phi_over_r", number(r.lhs_phi_over_r)},
         {"lhs_angular", number(r.lhs_angular)},
         {"rhs", number(r.rhs)},
         {"rhs_displayed_sign", number(r.rhs_displayed_sign)},
         {"ratio", number(r.ratio)},
         {"vacuous", r.vacuous},
         {"relative_change", number(r.relative_change())},
         {"stable", r.stable()},
         {"grid", r.grid}};
    json trend = json::array();
    for (const auto& t : r.trend)
        trend.push_back({{"dr", t.dr},
                         {"lhs", number(t.lhs)},
                         {"ratio", number(t.ratio)},
                         {"flux_outgoing_ratio", number(t.flux_outgoing_ratio)},
                         {"flux_incoming_ratio", number(t.flux_incoming_ratio)},
                         {"integrating", t.integrating}});
    j["trend"] = trend;
}

inline void to_json(json& j, const TraceReport& r) {
    j = {{"t", r.t},
         {"trace", number(r.trace)},
         {"r_at_sup", r.r_at_sup},
         {"case1", number(r.case1)},
         {"case2", number(r.case2)},
         {"rhs", number(r.rhs)},
         {"constant", number(r.constant())},
         {"reduction_holds", r.reduction_holds()}};
}

inline void to_json(json& j, const TraceCaseCheck& c) {
    j = {{"t", c.t},
         {"case1_lhs", number(c.case1_lhs)},
         {"case1_bound", number(c.case1_bound)},
         {"case2_lhs", number(c.case2_lhs)},
         {"case2_bound", number(c.case2_bound)},
         {"holds", c.holds()}};
}

inline void to_json(json& j, const ExponentReport& r) {
    j = {{"application", to_string(r.application)},
         {"p", r.p},
         {"n", r.n},
         {"critical_dimension", r.critical_dimension},
         {"p_c", strauss_exponent(r.critical_dimension)},
         {"s", r.s},
         {"alpha", r.alpha},
         {"delta", r.delta},
         {"theta", r.theta},
         {"sigma", number(r.sigma)},
         {"beta", number(r.beta)},
         {"q", r.q},
         {"tail_exponent", r.tail_exponent},
         {"feasible", r.feasible},
         {"binding", r.binding}};
    if (r.T > 0.0) {
        j["T"] = r.T;
        j["integral_value"] = number(r.integral_value);
    }
}

inline void to_json(json& j, const CauchyReport& c) {
    j = {{"T", number_array(c.T)},
         {"values", number_array(c.values)},
         {"increments", number_array(c.increments)},
         {"observed_exponent", number(c.observed_exponent)},
         {"predicted_exponent", number(c.predicted_exponent)},
         {"observed_converges", c.observed_converges()},
         {"predicted_converges", c.predicted_converges()},
         {"agrees", c.agrees()}};
}

inline void to_json(json& j, const LifespanRecord& r) {
    j = {{"p", r.p},
         {"epsilon", r.epsilon},
         {"damped", r.damped},
         {"data", r.data_id},
         {"outcome", to_string(r.outcome)},
         {"T", r.T},
         {"horizon", r.horizon},
         {"initial_amplitude", r.initial_amplitude},
         {"threshold", number(r.threshold)},
         {"grid", r.grid},
         {"quadrature_degree", r.quadrature_degree},
         {"Q_max", number(r.Q_max())},
         {"Q_early", number(r.Q_early())},
         {"bounded_q", r.bounded_q()},
         {"q_grows", r.q_grows()},
         {"chain_rule_constant", number(r.chain_rule_constant)}};
    if (r.refined_T) {
        j["refined_T"] = *r.refined_T;
        j["refinement_agrees"] = r.refinement_agrees();
    }
}

/// Plot-data table with whitespace-free headers.
struct CsvTable {
    std::string name;                 ///< file stem
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    static std::string cell(double x) {
        std::ostringstream os;
        os.precision(17);
        os << x;
        return os.str();
    }
    template <class... T>
    void add(const T&... values) {
        rows.push_back({format(values)...});
    }
    void write(std::ostream& os) const {
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
            os << '\n';
        }
    }

private:
    static std::string format(double x) { return cell(x); }
    static std::string format(int x) { return std::to_string(x); }
    static std::string format(std::size_t x) { return std::to_string(x); }
    static std::string format(bool x) { return x ? "1" : "0"; }
    static std::string format(const std::string& x) { return x; }
    static std::string format(const char* x) { return x; }
};

} // namespace wavecert
