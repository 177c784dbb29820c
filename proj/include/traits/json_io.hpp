#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "traits/model.hpp"

namespace traits {

using nlohmann::json;

namespace detail {

inline void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    if (!j.is_object()) throw SemanticError(ctx + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw SemanticError(ctx + ": unknown key '" + it.key() + "'");
}

inline const json& require(const json& j, const std::string& key, const std::string& ctx) {
    auto it = j.find(key);
    if (it == j.end()) throw SemanticError(ctx + ": missing key '" + key + "'");
    return *it;
}

inline double number(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw SemanticError(ctx + ": expected a number");
    return j.get<double>();
}

inline std::vector<double> number_vec(const json& j, size_t len, const std::string& ctx) {
    if (!j.is_array() || j.size() != len)
        throw SemanticError(ctx + ": expected an array of " + std::to_string(len) + " numbers");
    std::vector<double> out;
    out.reserve(len);
    for (const auto& v : j) out.push_back(number(v, ctx));
    return out;
}

inline Cell cell(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw SemanticError(ctx + ": expected [row, col] integer cell");
    return {j[0].get<int>(), j[1].get<int>()};
}

inline Exhaustibility parse_exhaustibility(const std::string& s, const std::string& ctx) {
    if (s == "IET") return Exhaustibility::IET;
    if (s == "ET") return Exhaustibility::ET;
    throw SemanticError(ctx + ": exhaustibility must be IET or ET");
}

inline Provisioning parse_provisioning(const std::string& s, const std::string& ctx) {
    if (s == "NPT") return Provisioning::NPT;
    if (s == "IPT") return Provisioning::IPT;
    if (s == "GPT") return Provisioning::GPT;
    throw SemanticError(ctx + ": provisioning must be NPT, IPT or GPT");
}

inline ValueKind parse_value_kind(const std::string& s, const std::string& ctx) {
    if (s == "continuous") return ValueKind::Continuous;
    if (s == "discrete") return ValueKind::Discrete;
    if (s == "binary") return ValueKind::Binary;
    throw SemanticError(ctx + ": value_kind must be continuous, discrete or binary");
}

inline Cumulativity parse_cumulativity(const std::string& s, const std::string& ctx) {
    if (s == "NCT") return Cumulativity::NCT;
    if (s == "CT") return Cumulativity::CT;
    throw SemanticError(ctx + ": cumulativity must be NCT or CT");
}

inline Endpoint parse_endpoint(const std::string& s, const std::string& ctx) {
    if (s == "start") return Endpoint::Start;
    if (s == "finish") return Endpoint::Finish;
    throw SemanticError(ctx + ": endpoint must be start or finish");
}

inline json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("syntax error: ") + e.what());
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario

inline Scenario parse_scenario(const std::string& text, const std::string& base_dir = "") {
    using namespace detail;
    const json j = parse_text(text);
    expect_keys(j, {"traits", "robots", "tasks", "temporal", "map", "params"}, "scenario");

    Scenario s;

    const json& jt = require(j, "traits", "scenario");
    if (!jt.is_array() || jt.empty()) throw SemanticError("traits: expected a non-empty array");
    int ui = 0;
    for (const auto& t : jt) {
        expect_keys(t, {"name", "unit", "exhaustibility", "provisioning", "value_kind"}, "trait");
        TraitDef td;
        td.index = ui++;
        td.name = require(t, "name", "trait").get<std::string>();
        if (t.contains("unit")) td.unit = t["unit"].get<std::string>();
        td.exhaustibility =
            parse_exhaustibility(require(t, "exhaustibility", td.name).get<std::string>(), td.name);
        td.provisioning =
            parse_provisioning(require(t, "provisioning", td.name).get<std::string>(), td.name);
        td.value_kind = parse_value_kind(require(t, "value_kind", td.name).get<std::string>(), td.name);
        s.traits.push_back(std::move(td));
    }
    const size_t nu = s.traits.size();

    // map must exist before robot/task position checks
    const json& jm = require(j, "map", "scenario");
    expect_keys(jm, {"cell_size", "grid", "file"}, "map");
    if (jm.contains("file")) {
        const std::string path =
            base_dir.empty() ? jm["file"].get<std::string>() : base_dir + "/" + jm["file"].get<std::string>();
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open map file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        s.map = load_map(buf.str());
    } else {
        const double cell_size = number(require(jm, "cell_size", "map"), "map.cell_size");
        const json& grid = require(jm, "grid", "map");
        if (!grid.is_array() || grid.empty()) throw SemanticError("map.grid: expected non-empty array");
        std::ostringstream text_map;
        text_map << "cell_size " << cell_size << "\n";
        for (const auto& row : grid) text_map << row.get<std::string>() << "\n";
        s.map = load_map(text_map.str());
    }

    const json& jr = require(j, "robots", "scenario");
    if (!jr.is_array() || jr.empty()) throw SemanticError("robots: expected a non-empty array");
    int ri = 0;
    for (const auto& r : jr) {
        const std::string ctx = "robot[" + std::to_string(ri) + "]";
        expect_keys(r,
                    {"name", "initial_traits", "max_rates", "battery_capacity", "voltage", "idle_current",
                     "max_current", "peukert_exponent", "max_speed", "velocity_current_coeff",
                     "trait_current_coeffs", "rate_current_coeffs", "bounding_radius", "initial_position"},
                    ctx);
        Robot rb;
        rb.name = r.contains("name") ? r["name"].get<std::string>() : "r" + std::to_string(ri);
        rb.initial_traits = number_vec(require(r, "initial_traits", ctx), nu, ctx + ".initial_traits");
        rb.max_rates = number_vec(require(r, "max_rates", ctx), nu, ctx + ".max_rates");
        rb.battery_capacity = number(require(r, "battery_capacity", ctx), ctx + ".battery_capacity");
        rb.voltage = number(require(r, "voltage", ctx), ctx + ".voltage");
        rb.idle_current = number(require(r, "idle_current", ctx), ctx + ".idle_current");
        rb.max_current = number(require(r, "max_current", ctx), ctx + ".max_current");
        rb.peukert_exponent = number(require(r, "peukert_exponent", ctx), ctx + ".peukert_exponent");
        rb.max_speed = number(require(r, "max_speed", ctx), ctx + ".max_speed");
        rb.velocity_current_coeff =
            number(require(r, "velocity_current_coeff", ctx), ctx + ".velocity_current_coeff");
        rb.trait_current_coeffs =
            number_vec(require(r, "trait_current_coeffs", ctx), nu, ctx + ".trait_current_coeffs");
        rb.rate_current_coeffs =
            number_vec(require(r, "rate_current_coeffs", ctx), nu, ctx + ".rate_current_coeffs");
        rb.bounding_radius = number(require(r, "bounding_radius", ctx), ctx + ".bounding_radius");
        rb.initial_position = cell(require(r, "initial_position", ctx), ctx + ".initial_position");
        s.robots.push_back(std::move(rb));
        ++ri;
    }

    const json& jk = require(j, "tasks", "scenario");
    if (!jk.is_array() || jk.empty()) throw SemanticError("tasks: expected a non-empty array");
    int ki = 0;
    for (const auto& t : jk) {
        const std::string ctx = "task[" + std::to_string(ki) + "]";
        expect_keys(t,
                    {"name", "desired_traits", "desired_rates", "cumulativity", "static_duration",
                     "start_position", "end_position"},
                    ctx);
        Task tk;
        tk.name = t.contains("name") ? t["name"].get<std::string>() : "t" + std::to_string(ki);
        tk.desired_traits = number_vec(require(t, "desired_traits", ctx), nu, ctx + ".desired_traits");
        tk.desired_rates = number_vec(require(t, "desired_rates", ctx), nu, ctx + ".desired_rates");
        const json& jc = require(t, "cumulativity", ctx);
        if (!jc.is_array() || jc.size() != nu)
            throw SemanticError(ctx + ".cumulativity: expected one entry per trait");
        for (const auto& c : jc)
            tk.cumulativity.push_back(parse_cumulativity(c.get<std::string>(), ctx + ".cumulativity"));
        tk.static_duration = number(require(t, "static_duration", ctx), ctx + ".static_duration");
        tk.start_position = cell(require(t, "start_position", ctx), ctx + ".start_position");
        tk.end_position = cell(require(t, "end_position", ctx), ctx + ".end_position");
        s.tasks.push_back(std::move(tk));
        ++ki;
    }

    const json& jtc = require(j, "temporal", "scenario");
    expect_keys(jtc, {"precedence", "mutex", "absolute_deadlines", "relative_deadlines"}, "temporal");
    if (jtc.contains("precedence"))
        for (const auto& p : jtc["precedence"]) {
            if (!p.is_array() || p.size() != 2)
                throw SemanticError("temporal.precedence: expected [i, j] pairs");
            s.temporal.precedence.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
    if (jtc.contains("mutex"))
        for (const auto& m : jtc["mutex"]) {
            if (!m.is_array() || m.size() != 2)
                throw SemanticError("temporal.mutex: expected [i, j] pairs");
            int a = m[0].get<int>(), b = m[1].get<int>();
            s.temporal.mutex_pairs.emplace_back(std::min(a, b), std::max(a, b));
        }
    if (jtc.contains("absolute_deadlines"))
        for (const auto& d : jtc["absolute_deadlines"]) {
            expect_keys(d, {"task", "endpoint", "bound"}, "absolute_deadline");
            AbsoluteDeadline ad;
            ad.task = require(d, "task", "absolute_deadline").get<int>();
            ad.endpoint = parse_endpoint(require(d, "endpoint", "absolute_deadline").get<std::string>(),
                                         "absolute_deadline");
            ad.bound = number(require(d, "bound", "absolute_deadline"), "absolute_deadline.bound");
            s.temporal.absolute_deadlines.push_back(ad);
        }
    if (jtc.contains("relative_deadlines"))
        for (const auto& d : jtc["relative_deadlines"]) {
            expect_keys(d, {"first_task", "first_endpoint", "second_task", "second_endpoint", "bound"},
                        "relative_deadline");
            RelativeDeadline rd;
            rd.first_task = require(d, "first_task", "relative_deadline").get<int>();
            rd.first_endpoint = parse_endpoint(
                require(d, "first_endpoint", "relative_deadline").get<std::string>(), "relative_deadline");
            rd.second_task = require(d, "second_task", "relative_deadline").get<int>();
            rd.second_endpoint = parse_endpoint(
                require(d, "second_endpoint", "relative_deadline").get<std::string>(), "relative_deadline");
            rd.bound = number(require(d, "bound", "relative_deadline"), "relative_deadline.bound");
            s.temporal.relative_deadlines.push_back(rd);
        }

    if (j.contains("params")) {
        const json& jp = j["params"];
        expect_keys(jp, {"alpha", "gamma", "timeout"}, "params");
        if (jp.contains("alpha")) s.alpha = number(jp["alpha"], "params.alpha");
        if (jp.contains("gamma")) s.gamma = number(jp["gamma"], "params.gamma");
        if (jp.contains("timeout")) s.timeout_s = number(jp["timeout"], "params.timeout");
    }

    validate_scenario(s);
    return s;
}

inline json scenario_to_json(const Scenario& s) {
    json j;
    j["traits"] = json::array();
    for (const auto& t : s.traits) {
        json jt{{"name", t.name},
                {"exhaustibility", to_string(t.exhaustibility)},
                {"provisioning", to_string(t.provisioning)},
                {"value_kind", to_string(t.value_kind)}};
        if (!t.unit.empty()) jt["unit"] = t.unit;
        j["traits"].push_back(std::move(jt));
    }
    j["robots"] = json::array();
    for (const auto& r : s.robots) {
        j["robots"].push_back(json{{"name", r.name},
                                   {"initial_traits", r.initial_traits},
                                   {"max_rates", r.max_rates},
                                   {"battery_capacity", r.battery_capacity},
                                   {"voltage", r.voltage},
                                   {"idle_current", r.idle_current},
                                   {"max_current", r.max_current},
                                   {"peukert_exponent", r.peukert_exponent},
                                   {"max_speed", r.max_speed},
                                   {"velocity_current_coeff", r.velocity_current_coeff},
                                   {"trait_current_coeffs", r.trait_current_coeffs},
                                   {"rate_current_coeffs", r.rate_current_coeffs},
                                   {"bounding_radius", r.bounding_radius},
                                   {"initial_position", {r.initial_position.row, r.initial_position.col}}});
    }
    j["tasks"] = json::array();
    for (const auto& t : s.tasks) {
        std::vector<std::string> cum;
        for (auto c : t.cumulativity) cum.emplace_back(to_string(c));
        j["tasks"].push_back(json{{"name", t.name},
                                  {"desired_traits", t.desired_traits},
                                  {"desired_rates", t.desired_rates},
                                  {"cumulativity", cum},
                                  {"static_duration", t.static_duration},
                                  {"start_position", {t.start_position.row, t.start_position.col}},
                                  {"end_position", {t.end_position.row, t.end_position.col}}});
    }
    json jtc;
    jtc["precedence"] = json::array();
    for (auto [a, b] : s.temporal.precedence) jtc["precedence"].push_back({a, b});
    jtc["mutex"] = json::array();
    for (auto [a, b] : s.temporal.mutex_pairs) jtc["mutex"].push_back({a, b});
    jtc["absolute_deadlines"] = json::array();
    for (const auto& d : s.temporal.absolute_deadlines)
        jtc["absolute_deadlines"].push_back(
            json{{"task", d.task}, {"endpoint", to_string(d.endpoint)}, {"bound", d.bound}});
    jtc["relative_deadlines"] = json::array();
    for (const auto& d : s.temporal.relative_deadlines)
        jtc["relative_deadlines"].push_back(json{{"first_task", d.first_task},
                                                 {"first_endpoint", to_string(d.first_endpoint)},
                                                 {"second_task", d.second_task},
                                                 {"second_endpoint", to_string(d.second_endpoint)},
                                                 {"bound", d.bound}});
    j["temporal"] = std::move(jtc);

    json jm;
    jm["cell_size"] = s.map.cell_size();
    jm["grid"] = json::array();
    for (int r = 0; r < s.map.rows(); ++r) {
        std::string row;
        for (int c = 0; c < s.map.cols(); ++c) row.push_back(s.map.occupied({r, c}) ? '#' : '.');
        jm["grid"].push_back(row);
    }
    j["map"] = std::move(jm);
    j["params"] = json{{"alpha", s.alpha}, {"gamma", s.gamma}, {"timeout", s.timeout_s}};
    return j;
}

inline std::string serialize_scenario(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Solution

inline json solution_to_json(const Scenario& s, const Solution& sol) {
    json j;
    const int nk = s.num_tasks(), nn = s.num_robots();
    j["allocation"] = json::array();
    for (int k = 0; k < nk; ++k) {
        json row = json::array();
        for (int n = 0; n < nn; ++n) row.push_back(sol.allocation.at(k, n) ? 1 : 0);
        j["allocation"].push_back(std::move(row));
    }
    j["provisions"] = sol.plan.provisions;
    j["rates"] = sol.plan.rates;

    json sched;
    sched["tasks"] = json::array();
    for (int k = 0; k < nk; ++k)
        sched["tasks"].push_back(json{{"start", sol.schedule.start[k]}, {"finish", sol.schedule.finish[k]}});
    sched["makespan"] = sol.schedule.makespan;
    sched["orientations"] = json::array();
    for (const auto& o : sol.schedule.orientations)
        sched["orientations"].push_back(json{{"i", o.i}, {"j", o.j}, {"i_before_j", o.i_before_j}});
    j["schedule"] = std::move(sched);

    j["paths"] = json::array();
    for (int n = 0; n < nn; ++n) {
        json jr;
        jr["inter_velocity"] = sol.plan.inter_velocities[n];
        jr["segments"] = json::array();
        if (n < static_cast<int>(sol.paths.size()))
            for (const auto& seg : sol.paths[n]) {
                const char* kind = seg.kind == PathSegment::Kind::Initial  ? "initial"
                                   : seg.kind == PathSegment::Kind::Inter ? "inter"
                                                                           : "intra";
                json cells = json::array();
                for (const auto& c : seg.cells) cells.push_back({c.row, c.col});
                jr["segments"].push_back(json{{"kind", kind},
                                              {"task", seg.task},
                                              {"from", {seg.from.row, seg.from.col}},
                                              {"to", {seg.to.row, seg.to.col}},
                                              {"length", seg.length},
                                              {"speed", seg.speed},
                                              {"cells", std::move(cells)}});
            }
        j["paths"].push_back(std::move(jr));
    }

    json metrics;
    metrics["trait_mismatch"] = sol.plan.trait_mismatch;
    metrics["rate_mismatch"] = sol.plan.rate_mismatch;
    metrics["makespan"] = sol.schedule.makespan;
    metrics["expansions"] = sol.expansions;
    metrics["task_durations"] = sol.plan.task_durations;
    json energy = json::array();
    for (const auto& e : sol.plan.energy)
        energy.push_back(json{{"task_energy", e.task_energy},
                              {"inter_energy", e.inter_energy},
                              {"total", e.total},
                              {"inter_velocity", e.inter_velocity},
                              {"est_inter_length", e.est_inter_length}});
    metrics["energy"] = std::move(energy);
    json amx = json::array();
    for (auto [a, b] : sol.auto_mutex_pairs) amx.push_back({a, b});
    metrics["auto_mutex_pairs"] = std::move(amx);
    json trace = json::array();
    for (const auto& t : sol.trace)
        trace.push_back(json{{"expanded", t.expanded}, {"apr", t.apr}, {"nsq", t.nsq}, {"tetaq", t.tetaq}});
    metrics["trace"] = std::move(trace);
    j["metrics"] = std::move(metrics);
    return j;
}

inline std::string serialize_solution(const Scenario& s, const Solution& sol) {
    return solution_to_json(s, sol).dump(2) + "\n";
}

// Reads back the solver-facing parts of a solution file (allocation,
// provisions, rates, schedule, transition speeds). Everything else is
// recomputed by the plan auditor.
inline Solution parse_solution(const std::string& text, const Scenario& s) {
    using namespace detail;
    const json j = parse_text(text);
    const int nk = s.num_tasks(), nn = s.num_robots(), nu = s.num_traits();
    Solution sol;
    sol.allocation = Allocation(nk, nn);

    const json& ja = require(j, "allocation", "solution");
    if (!ja.is_array() || static_cast<int>(ja.size()) != nk)
        throw SemanticError("solution.allocation: expected K rows");
    for (int k = 0; k < nk; ++k) {
        if (!ja[k].is_array() || static_cast<int>(ja[k].size()) != nn)
            throw SemanticError("solution.allocation: expected N columns per row");
        for (int n = 0; n < nn; ++n) sol.allocation.set(k, n, ja[k][n].get<int>() != 0);
    }

    auto tensor = [&](const json& v, const char* what) {
        std::vector<std::vector<std::vector<double>>> out(nk);
        if (!v.is_array() || static_cast<int>(v.size()) != nk)
            throw SemanticError(std::string("solution.") + what + ": expected K entries");
        for (int k = 0; k < nk; ++k) {
            if (!v[k].is_array() || static_cast<int>(v[k].size()) != nn)
                throw SemanticError(std::string("solution.") + what + ": expected N entries per task");
            out[k].resize(nn);
            for (int n = 0; n < nn; ++n)
                out[k][n] = number_vec(v[k][n], nu, std::string("solution.") + what);
        }
        return out;
    };
    sol.plan.provisions = tensor(require(j, "provisions", "solution"), "provisions");
    sol.plan.rates = tensor(require(j, "rates", "solution"), "rates");

    const json& js = require(j, "schedule", "solution");
    const json& jt = require(js, "tasks", "solution.schedule");
    if (!jt.is_array() || static_cast<int>(jt.size()) != nk)
        throw SemanticError("solution.schedule.tasks: expected K entries");
    sol.schedule.feasible = true;
    sol.schedule.start.resize(nk);
    sol.schedule.finish.resize(nk);
    for (int k = 0; k < nk; ++k) {
        sol.schedule.start[k] = number(require(jt[k], "start", "schedule"), "schedule.start");
        sol.schedule.finish[k] = number(require(jt[k], "finish", "schedule"), "schedule.finish");
    }
    sol.schedule.makespan = number(require(js, "makespan", "solution.schedule"), "schedule.makespan");

    sol.plan.inter_velocities.assign(nn, 0.0);
    const json& jp = require(j, "paths", "solution");
    if (!jp.is_array() || static_cast<int>(jp.size()) != nn)
        throw SemanticError("solution.paths: expected one entry per robot");
    for (int n = 0; n < nn; ++n)
        sol.plan.inter_velocities[n] =
            number(require(jp[n], "inter_velocity", "solution.paths"), "paths.inter_velocity");
    return sol;
}

// ---------------------------------------------------------------------------
// Violation report

inline json report_to_json(const ViolationReport& r) {
    return json{{"plan_feasible", r.plan_feasible},
                {"task_trait_insufficiency", r.task_trait_insufficiency},
                {"rate_insufficiency", r.rate_insufficiency},
                {"under_resourced_robots", r.under_resourced_robots},
                {"c_rating_violations", r.c_rating_violations},
                {"battery_violations", r.battery_violations},
                {"deadline_violations", r.deadline_violations}};
}

inline std::string serialize_report(const ViolationReport& r) { return report_to_json(r).dump(2) + "\n"; }

}  // namespace traits
