#include "dimpulse/problem_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace dimpulse {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& ctx, const std::string& msg) {
    throw Error(Errc::schema_violation, ctx + ": " + msg);
}

void expect_keys(const ordered_json& obj, const std::string& ctx,
                 std::initializer_list<const char*> required,
                 std::initializer_list<const char*> optional = {}) {
    if (!obj.is_object()) schema_error(ctx, "expected an object");
    for (const char* key : required) {
        if (!obj.contains(key)) schema_error(ctx, std::string("missing key '") + key + "'");
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* k : required) known = known || key == k;
        for (const char* k : optional) known = known || key == k;
        if (!known) schema_error(ctx, "unknown key '" + key + "'");
    }
}

double number_at(const ordered_json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        schema_error(ctx, std::string("'") + key + "' must be a number");
    }
    return obj[key].get<double>();
}

int int_at(const ordered_json& obj, const std::string& ctx, const char* key) {
    if (!obj.contains(key) || !obj[key].is_number_integer()) {
        schema_error(ctx, std::string("'") + key + "' must be an integer");
    }
    return obj[key].get<int>();
}

std::vector<double> number_array(const ordered_json& arr, const std::string& ctx) {
    if (!arr.is_array()) schema_error(ctx, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) schema_error(ctx, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

DynamicsComponent parse_component(const ordered_json& obj, const std::string& ctx) {
    DynamicsComponent comp;
    if (!obj.contains("family") || !obj["family"].is_string()) {
        schema_error(ctx, "'family' must be a string");
    }
    const std::string family = obj["family"].get<std::string>();
    if (family == "abm") {
        expect_keys(obj, ctx, {"family", "mu", "sigma"});
        comp.family = DynamicsFamily::arithmetic_bm;
        comp.mu = number_at(obj, ctx, "mu");
        comp.sigma = number_at(obj, ctx, "sigma");
    } else if (family == "gbm") {
        expect_keys(obj, ctx, {"family", "mu", "sigma"});
        comp.family = DynamicsFamily::geometric_bm;
        comp.mu = number_at(obj, ctx, "mu");
        comp.sigma = number_at(obj, ctx, "sigma");
    } else if (family == "ou") {
        expect_keys(obj, ctx, {"family", "kappa", "theta", "sigma"});
        comp.family = DynamicsFamily::ornstein_uhlenbeck;
        comp.kappa = number_at(obj, ctx, "kappa");
        comp.theta = number_at(obj, ctx, "theta");
        comp.sigma = number_at(obj, ctx, "sigma");
    } else {
        schema_error(ctx, "unknown dynamics family '" + family + "'");
    }
    return comp;
}

ScalarSpec parse_scalar(const ordered_json& obj, const std::string& ctx) {
    ScalarSpec s;
    if (!obj.contains("family") || !obj["family"].is_string()) {
        schema_error(ctx, "'family' must be a string");
    }
    const std::string family = obj["family"].get<std::string>();
    if (family == "constant") {
        expect_keys(obj, ctx, {"family", "value"});
        s.family = ScalarFamily::constant;
        s.value = number_at(obj, ctx, "value");
    } else if (family == "affine") {
        expect_keys(obj, ctx, {"family", "coeffs"});
        s.family = ScalarFamily::affine;
        s.coeffs = number_array(obj["coeffs"], ctx + ".coeffs");
    } else if (family == "call" || family == "put") {
        expect_keys(obj, ctx, {"family", "strike"}, {"axis"});
        s.family = family == "call" ? ScalarFamily::call : ScalarFamily::put;
        s.strike = number_at(obj, ctx, "strike");
        if (obj.contains("axis")) s.axis = int_at(obj, ctx, "axis");
    } else if (family == "polynomial") {
        expect_keys(obj, ctx, {"family", "coeffs"}, {"axis"});
        s.family = ScalarFamily::polynomial;
        s.coeffs = number_array(obj["coeffs"], ctx + ".coeffs");
        if (obj.contains("axis")) s.axis = int_at(obj, ctx, "axis");
    } else if (family == "shortfall") {
        expect_keys(obj, ctx, {"family", "strike", "claim"});
        s.family = ScalarFamily::shortfall;
        s.strike = number_at(obj, ctx, "strike");
        const std::string claim = obj["claim"].get<std::string>();
        if (claim != "put" && claim != "call") schema_error(ctx, "'claim' must be put or call");
        s.claim_is_put = claim == "put";
    } else {
        schema_error(ctx, "unknown scalar family '" + family + "'");
    }
    return s;
}

CostSpec parse_cost(const ordered_json& obj, const std::string& ctx) {
    CostSpec c;
    if (!obj.contains("family") || !obj["family"].is_string()) {
        schema_error(ctx, "'family' must be a string");
    }
    const std::string family = obj["family"].get<std::string>();
    if (family == "constant") {
        expect_keys(obj, ctx, {"family", "value"});
        c.family = CostFamily::constant;
        c.value = number_at(obj, ctx, "value");
    } else if (family == "affine") {
        expect_keys(obj, ctx, {"family", "coeffs"});
        c.family = CostFamily::affine;
        c.coeffs = number_array(obj["coeffs"], ctx + ".coeffs");
    } else if (family == "scaled_call" || family == "scaled_put") {
        expect_keys(obj, ctx, {"family", "strike"}, {"axis"});
        c.family = family == "scaled_call" ? CostFamily::scaled_call : CostFamily::scaled_put;
        c.strike = number_at(obj, ctx, "strike");
        if (obj.contains("axis")) c.axis = int_at(obj, ctx, "axis");
    } else if (family == "table") {
        expect_keys(obj, ctx, {"family", "values"});
        c.family = CostFamily::table;
        c.table = number_array(obj["values"], ctx + ".values");
    } else {
        schema_error(ctx, "unknown cost family '" + family + "'");
    }
    return c;
}

ImpulseMapSpec parse_impulse_map(const ordered_json& obj, const std::string& ctx) {
    ImpulseMapSpec g;
    if (!obj.contains("family") || !obj["family"].is_string()) {
        schema_error(ctx, "'family' must be a string");
    }
    const std::string family = obj["family"].get<std::string>();
    if (family == "identity") {
        expect_keys(obj, ctx, {"family"});
        g.family = ImpulseMapFamily::identity;
    } else if (family == "translate") {
        expect_keys(obj, ctx, {"family"}, {"axis"});
        g.family = ImpulseMapFamily::translate;
        if (obj.contains("axis")) g.axis = int_at(obj, ctx, "axis");
    } else if (family == "set_component") {
        expect_keys(obj, ctx, {"family"}, {"axis"});
        g.family = ImpulseMapFamily::set_component;
        if (obj.contains("axis")) g.axis = int_at(obj, ctx, "axis");
    } else if (family == "financial") {
        expect_keys(obj, ctx, {"family"});
        g.family = ImpulseMapFamily::financial;
    } else {
        schema_error(ctx, "unknown impulse map family '" + family + "'");
    }
    return g;
}

} // namespace

ProblemFile parse_problem(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::parse_error, e.what());
    }

    expect_keys(doc, "problem",
                {"dynamics", "rewards", "delay", "impulses", "initial_state", "grid"});

    ProblemFile file;

    const auto& dyn = doc["dynamics"];
    expect_keys(dyn, "dynamics", {"components"});
    if (!dyn["components"].is_array() || dyn["components"].empty()) {
        schema_error("dynamics.components", "expected a nonempty array");
    }
    int ci = 0;
    for (const auto& comp : dyn["components"]) {
        file.spec.dynamics.components.push_back(
            parse_component(comp, "dynamics.components[" + std::to_string(ci++) + "]"));
    }

    const auto& rewards = doc["rewards"];
    expect_keys(rewards, "rewards", {"f", "g", "c", "gamma"});
    file.spec.rewards.running_profit = parse_scalar(rewards["f"], "rewards.f");
    file.spec.rewards.terminal_profit = parse_scalar(rewards["g"], "rewards.g");
    file.spec.rewards.execution_cost = parse_cost(rewards["c"], "rewards.c");
    file.spec.rewards.impulse_map = parse_impulse_map(rewards["gamma"], "rewards.gamma");

    const auto& delay = doc["delay"];
    expect_keys(delay, "delay", {"T", "h", "m"});
    file.spec.delay.horizon = number_at(delay, "delay", "T");
    file.spec.delay.lag = number_at(delay, "delay", "h");
    file.spec.delay.multiplier = int_at(delay, "delay", "m");
    if (file.spec.delay.multiplier < 1) schema_error("delay.m", "must be >= 1");
    if (!(file.spec.delay.lag > 0.0)) schema_error("delay.h", "must be > 0");

    const auto& impulses = doc["impulses"];
    if (!impulses.is_array()) schema_error("impulses", "expected an array");
    int ei = 0;
    for (const auto& e : impulses) {
        const std::string ctx = "impulses[" + std::to_string(ei++) + "]";
        if (e.is_number()) {
            file.spec.impulses.values.push_back({e.get<double>()});
        } else {
            file.spec.impulses.values.push_back(number_array(e, ctx));
        }
    }

    file.spec.initial_state = number_array(doc["initial_state"], "initial_state");

    const auto& grid = doc["grid"];
    expect_keys(grid, "grid", {"dt", "x_min", "x_max", "nx"});
    file.grid.dt = number_at(grid, "grid", "dt");
    file.grid.x_min = number_array(grid["x_min"], "grid.x_min");
    file.grid.x_max = number_array(grid["x_max"], "grid.x_max");
    if (!grid["nx"].is_array()) schema_error("grid.nx", "expected an array of integers");
    for (const auto& v : grid["nx"]) {
        if (!v.is_number_integer()) schema_error("grid.nx", "expected an array of integers");
        file.grid.nx.push_back(v.get<int>());
    }

    return file;
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open problem file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str());
}

namespace {

ordered_json scalar_json(const ScalarSpec& s) {
    ordered_json o;
    switch (s.family) {
        case ScalarFamily::constant:
            o["family"] = "constant";
            o["value"] = s.value;
            break;
        case ScalarFamily::affine:
            o["family"] = "affine";
            o["coeffs"] = s.coeffs;
            break;
        case ScalarFamily::call:
        case ScalarFamily::put:
            o["family"] = s.family == ScalarFamily::call ? "call" : "put";
            o["strike"] = s.strike;
            o["axis"] = s.axis;
            break;
        case ScalarFamily::polynomial:
            o["family"] = "polynomial";
            o["coeffs"] = s.coeffs;
            o["axis"] = s.axis;
            break;
        case ScalarFamily::shortfall:
            o["family"] = "shortfall";
            o["strike"] = s.strike;
            o["claim"] = s.claim_is_put ? "put" : "call";
            break;
    }
    return o;
}

ordered_json cost_json(const CostSpec& c) {
    ordered_json o;
    switch (c.family) {
        case CostFamily::constant:
            o["family"] = "constant";
            o["value"] = c.value;
            break;
        case CostFamily::affine:
            o["family"] = "affine";
            o["coeffs"] = c.coeffs;
            break;
        case CostFamily::scaled_call:
        case CostFamily::scaled_put:
            o["family"] = c.family == CostFamily::scaled_call ? "scaled_call" : "scaled_put";
            o["strike"] = c.strike;
            o["axis"] = c.axis;
            break;
        case CostFamily::table:
            o["family"] = "table";
            o["values"] = c.table;
            break;
    }
    return o;
}

ordered_json impulse_map_json(const ImpulseMapSpec& g) {
    ordered_json o;
    switch (g.family) {
        case ImpulseMapFamily::identity:
            o["family"] = "identity";
            break;
        case ImpulseMapFamily::translate:
            o["family"] = "translate";
            o["axis"] = g.axis;
            break;
        case ImpulseMapFamily::set_component:
            o["family"] = "set_component";
            o["axis"] = g.axis;
            break;
        case ImpulseMapFamily::financial:
            o["family"] = "financial";
            break;
    }
    return o;
}

} // namespace

std::string serialize_problem(const ProblemFile& file) {
    ordered_json doc;
    ordered_json comps = ordered_json::array();
    for (const auto& c : file.spec.dynamics.components) {
        ordered_json o;
        switch (c.family) {
            case DynamicsFamily::arithmetic_bm:
                o["family"] = "abm";
                o["mu"] = c.mu;
                o["sigma"] = c.sigma;
                break;
            case DynamicsFamily::geometric_bm:
                o["family"] = "gbm";
                o["mu"] = c.mu;
                o["sigma"] = c.sigma;
                break;
            case DynamicsFamily::ornstein_uhlenbeck:
                o["family"] = "ou";
                o["kappa"] = c.kappa;
                o["theta"] = c.theta;
                o["sigma"] = c.sigma;
                break;
        }
        comps.push_back(std::move(o));
    }
    doc["dynamics"] = ordered_json{{"components", comps}};
    doc["rewards"] = ordered_json{{"f", scalar_json(file.spec.rewards.running_profit)},
                                  {"g", scalar_json(file.spec.rewards.terminal_profit)},
                                  {"c", cost_json(file.spec.rewards.execution_cost)},
                                  {"gamma", impulse_map_json(file.spec.rewards.impulse_map)}};
    doc["delay"] = ordered_json{{"T", file.spec.delay.horizon},
                                {"h", file.spec.delay.lag},
                                {"m", file.spec.delay.multiplier}};
    doc["impulses"] = file.spec.impulses.values;
    doc["initial_state"] = file.spec.initial_state;
    doc["grid"] = ordered_json{{"dt", file.grid.dt},
                               {"x_min", file.grid.x_min},
                               {"x_max", file.grid.x_max},
                               {"nx", file.grid.nx}};
    return doc.dump(2) + "\n";
}

bool problems_equal(const ProblemFile& a, const ProblemFile& b) {
    return serialize_problem(a) == serialize_problem(b);
}

} // namespace dimpulse
