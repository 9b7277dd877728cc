#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "wmonlab/common.hpp"
#include "wmonlab/curve.hpp"
#include "wmonlab/geometry.hpp"
#include "wmonlab/lowerbound.hpp"
#include "wmonlab/mechanisms.hpp"
#include "wmonlab/truthfulness.hpp"
#include "wmonlab/valuations.hpp"

namespace wmonlab {

using json = nlohmann::ordered_json;

// Extended reals in JSON: plain numbers, or the strings "inf" / "-inf".
inline double real_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return INF;
        if (s == "-inf") return -INF;
    }
    throw BadParameters(where + ": expected a number or \"inf\"/\"-inf\"");
}

inline json real_to_json(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

// --- curves ---

inline MonotoneCurve curve_from_json(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("breakpoints"))
        throw BadParameters(where + ": expected {\"breakpoints\": [[x,y],...]}");
    std::vector<std::pair<double, double>> bp;
    for (const auto& e : j.at("breakpoints")) {
        if (!e.is_array() || e.size() != 2)
            throw BadParameters(where + ": breakpoints must be [x, y] pairs");
        bp.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    try {
        return MonotoneCurve(std::move(bp));
    } catch (const BadParameters& e) {
        throw BadParameters(where + ": " + e.what());
    }
}

inline json curve_to_json(const MonotoneCurve& c) {
    json bp = json::array();
    for (const auto& [x, y] : c.breakpoints()) bp.push_back({x, y});
    return json{{"breakpoints", bp}};
}

// --- instances ---

inline Instance instance_from_json(const json& j) {
    if (!j.is_object()) throw BadParameters("instance: expected an object");
    Instance inst;
    inst.n = j.at("n").get<int>();
    inst.theta = j.contains("theta") ? j.at("theta").get<double>()
                                     : Instance::default_theta(inst.n);
    for (const auto& p : j.at("pairs")) {
        inst.t.pairs.push_back(
            {p.at("t1").get<double>(), p.at("t1p").get<double>(), p.at("t12").get<double>()});
        inst.s.emplace_back(p.at("s1").get<double>(), p.at("s1p").get<double>());
    }
    return inst;
}

inline json instance_to_json(const Instance& inst) {
    json pairs = json::array();
    for (int i = 0; i < inst.pair_count(); ++i) {
        const TwoTaskValuation& p = inst.t.pairs[i];
        pairs.push_back({{"t1", p.t1},
                         {"t1p", p.t2},
                         {"t12", p.t12},
                         {"s1", inst.s[i].first},
                         {"s1p", inst.s[i].second}});
    }
    return json{{"n", inst.n}, {"theta", inst.theta}, {"pairs", pairs}};
}

inline json restricted_instance_to_json(const RestrictedInstance& r) {
    return json{{"n", r.n}, {"theta", r.theta}, {"t", r.t}, {"s", r.s}};
}

// --- mechanisms ---

inline Alloc alloc_from_string(const std::string& s) {
    if (s == "empty") return Alloc::Empty;
    if (s == "1") return Alloc::Task1;
    if (s == "2") return Alloc::Task2;
    if (s == "12") return Alloc::Both;
    throw BadParameters("allocation: expected one of empty, 1, 2, 12");
}

inline AffineParams affine_params_from_json(const json& j) {
    AffineParams p;
    p.mu_t = j.value("mu_t", 1.0);
    p.mu_s = j.value("mu_s", 1.0);
    auto gamma = [&](const char* key) {
        return j.contains(key) ? real_from_json(j.at(key), key) : 0.0;
    };
    p.gamma12 = gamma("gamma12");
    p.gamma1 = gamma("gamma1");
    p.gamma2 = gamma("gamma2");
    p.gamma_empty = gamma("gamma_empty");
    p.check();
    return p;
}

inline std::vector<double> broadcast_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>()};
    if (j.is_array()) {
        std::vector<double> out;
        for (const auto& e : j) out.push_back(e.get<double>());
        if (out.empty()) throw BadParameters(where + ": empty array");
        return out;
    }
    throw BadParameters(where + ": expected a number or an array of numbers");
}

inline MechanismSpec mechanism_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw BadParameters("mechanism: expected an object with a \"type\" field");
    const std::string type = j.at("type").get<std::string>();
    if (type == "affine_min") return AffineMinSpec{affine_params_from_json(j)};
    if (type == "relaxed_affine_min") {
        RelaxedAffineMinSpec spec{affine_params_from_json(j), curve_from_json(j.at("xi"), "xi")};
        check_gluing(spec.params, spec.xi);
        return spec;
    }
    if (type == "bundling") return BundlingSpec{curve_from_json(j.at("xi"), "xi")};
    if (type == "task_independent")
        return TaskIndependentSpec{curve_from_json(j.at("phi"), "phi"),
                                   curve_from_json(j.at("eta"), "eta")};
    if (type == "constant")
        return ConstantSpec{alloc_from_string(j.at("fixed").get<std::string>())};
    if (type == "per_task_linear")
        return PerTaskLinearSpec{{broadcast_from_json(j.at("lambda"), "lambda"),
                                  broadcast_from_json(j.at("gamma"), "gamma")}};
    throw BadParameters("mechanism: unknown type \"" + type + "\"");
}

inline json mechanism_to_json(const MechanismSpec& spec) {
    struct Visitor {
        json operator()(const AffineMinSpec& m) const {
            return json{{"type", "affine_min"},
                        {"mu_t", m.params.mu_t},
                        {"mu_s", m.params.mu_s},
                        {"gamma12", real_to_json(m.params.gamma12)},
                        {"gamma1", real_to_json(m.params.gamma1)},
                        {"gamma2", real_to_json(m.params.gamma2)},
                        {"gamma_empty", real_to_json(m.params.gamma_empty)}};
        }
        json operator()(const RelaxedAffineMinSpec& m) const {
            json out = (*this)(AffineMinSpec{m.params});
            out["type"] = "relaxed_affine_min";
            out["xi"] = curve_to_json(m.xi);
            return out;
        }
        json operator()(const BundlingSpec& m) const {
            return json{{"type", "bundling"}, {"xi", curve_to_json(m.xi)}};
        }
        json operator()(const TaskIndependentSpec& m) const {
            return json{{"type", "task_independent"},
                        {"phi", curve_to_json(m.phi)},
                        {"eta", curve_to_json(m.eta)}};
        }
        json operator()(const ConstantSpec& m) const {
            return json{{"type", "constant"}, {"fixed", to_string(m.fixed)}};
        }
        json operator()(const PerTaskLinearSpec& m) const {
            return json{{"type", "per_task_linear"},
                        {"lambda", m.params.lambda},
                        {"gamma", m.params.gamma}};
        }
    };
    return std::visit(Visitor{}, spec);
}

// --- reports ---

inline json witness_to_json(const ViolationWitness& w) {
    auto bids = [](const BidProfile& b) {
        return json{{"t", {b.t.t1, b.t.t2, b.t.t12}}, {"s", {b.s.s1, b.s.s2}}};
    };
    return json{{"player", w.player},     {"bid_a", bids(w.a)},
                {"bid_b", bids(w.b)},     {"alloc_a", to_string(w.alloc_a)},
                {"alloc_b", to_string(w.alloc_b)}, {"lhs", w.lhs},
                {"rhs", w.rhs}};
}

inline json payments_to_json(const VirtualPayments& p) {
    return json{{"p_empty", p.p_empty}, {"p1", p.p1}, {"p2", p.p2}, {"p12", p.p12}};
}

inline json critical_profile_to_json(const CriticalProfile& cp) {
    json out{{"f_prime", cp.f_prime}, {"g_prime", cp.g_prime}};
    out["f"] = cp.f ? json(*cp.f) : json(nullptr);
    out["g"] = cp.g ? json(*cp.g) : json(nullptr);
    out["beyond_notation"] = cp.beyond_notation;
    out["payments"] = payments_to_json(cp.payments);
    return out;
}

inline json trace_step_to_json(const TraceStep& s) {
    return json{{"tag", s.tag},
                {"task", s.task},
                {"t_before", s.t_before},
                {"t_after", s.t_after},
                {"s_before", s.s_before},
                {"s_after", s.s_after}};
}

inline json adversary_report_to_json(const AdversaryReport& r) {
    json out;
    out["certificate"] = r.certificate;
    out["direct"] = r.direct;
    if (!r.failed()) {
        out["witness"] = restricted_instance_to_json(r.witness);
        out["allocation"] = r.alloc.machine;
        out["mech_makespan"] = r.mech_makespan;
        out["opt_makespan"] = r.opt_makespan;
        out["ratio"] = r.ratio;
    }
    json trace = json::array();
    for (const TraceStep& s : r.trace) trace.push_back(trace_step_to_json(s));
    out["trace"] = trace;
    return out;
}

inline std::string adversary_report_to_csv(const AdversaryReport& r, int n,
                                           const std::string& family) {
    std::string out = "n,family,ratio,steps,certificate\n";
    out += std::to_string(n) + "," + family + "," +
           (r.failed() ? "" : std::to_string(r.ratio)) + "," +
           std::to_string(r.trace.size()) + "," + r.certificate + "\n";
    out += "tag,task,t_before,t_after,s_before,s_after\n";
    for (const TraceStep& s : r.trace)
        out += s.tag + "," + std::to_string(s.task) + "," + std::to_string(s.t_before) + "," +
               std::to_string(s.t_after) + "," + std::to_string(s.s_before) + "," +
               std::to_string(s.s_after) + "\n";
    return out;
}

inline json high_approx_to_json(const HighApproxWitness& w) {
    return json{{"t", {w.t.t1, w.t.t2, w.t.t12}},
                {"s", {w.s.s1, w.s.s2}},
                {"alloc", to_string(w.alloc)},
                {"mech_makespan", w.mech_makespan},
                {"opt_makespan", w.opt_makespan},
                {"ratio", w.ratio},
                {"unbounded", w.unbounded}};
}

}  // namespace wmonlab
