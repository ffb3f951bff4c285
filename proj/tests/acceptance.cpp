// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Usage: acceptance <problems-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dimpulse/checks.hpp"
#include "dimpulse/policy.hpp"
#include "dimpulse/problem_io.hpp"
#include "dimpulse/rng.hpp"
#include "dimpulse/solver.hpp"
#include "dimpulse/store_io.hpp"

using namespace dimpulse;

namespace {

std::string problems_dir;

struct RunContext {
    std::string name;
    ValidatedProblem problem;
    TimeGrid tg;
    SpaceGrid sg;
    ValueStore store;
};

std::vector<std::shared_ptr<RunContext>> completed_runs;

struct CriterionResult {
    int index = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<CriterionResult> results;

void criterion(int index, const std::string& name,
               const std::function<std::string()>& body) {
    CriterionResult r;
    r.index = index;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        r.detail = body();
        r.passed = true;
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(std::move(r));
}

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void require_runtime(double seconds, double limit) {
    if (seconds > limit) {
        fail("runtime " + std::to_string(seconds) + "s exceeds the " +
             std::to_string(limit) + "s budget");
    }
}

std::shared_ptr<RunContext> solve_file(const std::string& file_name, int threads = 2) {
    const std::string path = problems_dir + "/" + file_name;
    ProblemFile file = load_problem(path);
    ValidatedProblem problem = validate_problem(file.spec);
    auto [tg, sg] = build_grids(file.spec.delay, file.grid, problem.dim());
    ValueStore store = solve(problem, tg, sg, {threads});
    auto ctx = std::make_shared<RunContext>(
        RunContext{file_name, std::move(problem), tg, sg, std::move(store)});
    completed_runs.push_back(ctx);
    return ctx;
}

std::shared_ptr<RunContext> solve_spec(const std::string& name, const ProblemSpec& spec,
                                       const GridRequest& grid, int threads = 2) {
    ValidatedProblem problem = validate_problem(spec);
    auto [tg, sg] = build_grids(spec.delay, grid, problem.dim());
    ValueStore store = solve(problem, tg, sg, {threads});
    auto ctx = std::make_shared<RunContext>(
        RunContext{name, std::move(problem), tg, sg, std::move(store)});
    completed_runs.push_back(ctx);
    return ctx;
}

ProblemSpec counting_spec(double horizon, double lag, int m) {
    ProblemSpec spec;
    spec.dynamics.components = {{DynamicsFamily::arithmetic_bm, 0.0, 0.0, 0.0, 0.0}};
    spec.rewards.running_profit = {ScalarFamily::constant, 0.0, {}, 0, 0.0, true};
    spec.rewards.terminal_profit = {ScalarFamily::constant, 0.0, {}, 0, 0.0, true};
    spec.rewards.execution_cost.family = CostFamily::constant;
    spec.rewards.execution_cost.value = 1.0;
    spec.rewards.impulse_map.family = ImpulseMapFamily::identity;
    spec.delay = {horizon, lag, m};
    spec.impulses.values = {{1.0}, {-1.0}};
    spec.initial_state = {0.0};
    return spec;
}

GridRequest grid1d(double dt, double lo, double hi, int n) {
    GridRequest r;
    r.dt = dt;
    r.x_min = {lo};
    r.x_max = {hi};
    r.nx = {n};
    return r;
}

// ---------------------------------------------------------------- criteria

std::string criterion_counting() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto main_run = solve_file("counting.json");
    const double solve_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (double v : main_run->store.v0(0)) {
        if (std::abs(v - 3.0) > 1e-12) fail("v0(0,x) != 3 on counting.json");
    }

    const auto two = solve_spec("counting(h=0.5,m=1)", counting_spec(1.0, 0.5, 1),
                                grid1d(0.0625, -1.0, 1.0, 51));
    for (double v : two->store.v0(0)) {
        if (std::abs(v - 2.0) > 1e-12) fail("v0(0,x) != 2 for h=0.5, m=1");
    }

    const auto one = solve_spec("counting(T=mh)", counting_spec(0.5, 0.25, 2),
                                grid1d(0.0625, -1.0, 1.0, 51));
    for (double v : one->store.v0(0)) {
        if (std::abs(v - 1.0) > 1e-12) fail("v0(0,x) != 1 for T = m*h");
    }
    require_runtime(solve_secs, 10.0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "3/2/1 executions exact; nx=51 solve in %.2fs",
                  solve_secs);
    return buf;
}

std::string criterion_never_impulse() {
    const auto run = solve_file("never_impulse.json");
    const auto& store = run->store;
    for (int j = 0; j <= run->tg.num_steps; ++j) {
        const auto v0 = store.v0(j);
        const auto w = store.no_impulse(j);
        for (std::size_t i = 0; i < v0.size(); ++i) {
            if (std::abs(v0[i] - w[i]) > 1e-12) {
                fail("v0 deviates from the Feynman-Kac field");
            }
        }
    }
    OrderBook book;
    std::vector<double> x(1);
    std::size_t queries = 0;
    for (int j = 0; j <= run->tg.num_steps; ++j) {
        for (std::size_t i = 0; i < run->sg.size(); ++i) {
            run->sg.node(i, x);
            if (extract_decision(store, j, x, book).decide) {
                fail("policy wants to impulse at a destructive-cost node");
            }
            ++queries;
        }
    }
    return "v0 == FK to 1e-12; wait at all " + std::to_string(queries) + " nodes";
}

std::string criterion_m1_reduction() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = solve_file("gbm_m1.json");
    const auto& store = run->store;
    const Stepper stepper(run->problem, run->tg, run->sg);
    const int lag = run->tg.lag_steps;
    const int n_t = run->tg.num_steps;
    const std::size_t nodes = run->sg.size();

    std::vector<std::vector<double>> v0d(n_t + 1);
    for (int j = n_t - lag + 1; j <= n_t; ++j) {
        v0d[j].assign(store.no_impulse(j).begin(), store.no_impulse(j).end());
    }
    double worst = 0.0;
    std::vector<double> x(1), mapped(1), cont(nodes);
    const int ecount = run->problem.impulse_count();
    for (int j = n_t - lag; j >= 0; --j) {
        std::vector<double> best_first;
        for (int e = 0; e < ecount; ++e) {
            ValueField boundary;
            boundary.time_node = j + lag;
            boundary.values.resize(nodes);
            for (std::size_t i = 0; i < nodes; ++i) {
                run->sg.node(i, x);
                run->problem.apply_impulse(x, e, mapped);
                boundary.values[i] = run->problem.execution_cost(x, e) +
                                     interpolate(run->sg, v0d[j + lag], mapped);
            }
            const auto stack = feynman_kac_solve(stepper, boundary, j);
            const PendingConfig p = PendingConfig{}.append(j, e);
            for (int jj = j; jj <= j + lag; ++jj) {
                const auto stored = store.field(1, p, jj);
                for (std::size_t i = 0; i < nodes; ++i) {
                    worst = std::max(worst, std::abs(stored[i] - stack[jj - j].values[i]));
                }
            }
            if (e == 0) {
                best_first = stack.front().values;
            } else {
                for (std::size_t i = 0; i < nodes; ++i) {
                    best_first[i] = std::max(best_first[i], stack.front().values[i]);
                }
            }
        }
        stepper.step(v0d[j + 1], cont);
        for (std::size_t i = 0; i < nodes; ++i) cont[i] = std::max(cont[i], best_first[i]);
        v0d[j] = cont;
    }
    for (int j = 0; j <= n_t; ++j) {
        const auto stored = store.v0(j);
        for (std::size_t i = 0; i < nodes; ++i) {
            worst = std::max(worst, std::abs(stored[i] - v0d[j][i]));
        }
    }
    if (worst > 1e-12) fail("direct (4.6)-(4.8) route deviates by " + std::to_string(worst));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require_runtime(secs, 30.0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max field gap %.3g at nx=101 in %.2fs", worst, secs);
    return buf;
}

ProblemSpec random_tiny_spec(std::uint64_t seed, GridRequest& grid) {
    NormalSampler rng(seed);
    auto pick = [&](int n) { return static_cast<int>(rng.uniform() * n); };
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

    ProblemSpec spec;
    const int family = pick(3);
    double lo = -2.0, hi = 2.0;
    if (family == 0) {
        spec.dynamics.components = {
            {DynamicsFamily::arithmetic_bm, uni(-0.3, 0.3), uni(0.1, 0.5), 0.0, 0.0}};
    } else if (family == 1) {
        spec.dynamics.components = {
            {DynamicsFamily::geometric_bm, uni(-0.2, 0.2), uni(0.05, 0.25), 0.0, 0.0}};
        lo = 0.5;
        hi = 4.5;
    } else {
        spec.dynamics.components = {
            {DynamicsFamily::ornstein_uhlenbeck, 0.0, uni(0.1, 0.4), uni(0.3, 1.0), 0.0}};
    }
    const double mid = 0.5 * (lo + hi);

    spec.rewards.running_profit = {ScalarFamily::constant, uni(-0.2, 0.3), {}, 0, 0.0, true};
    if (pick(2) == 0) {
        spec.rewards.terminal_profit = {
            ScalarFamily::affine, 0.0, {uni(-1.0, 1.0), uni(-1.0, 1.0)}, 0, 0.0, true};
    } else {
        spec.rewards.terminal_profit = {ScalarFamily::put, 0.0, {}, 0, mid, true};
    }

    const int cost_kind = pick(3);
    if (cost_kind == 0) {
        spec.rewards.execution_cost.family = CostFamily::constant;
        spec.rewards.execution_cost.value = uni(-0.5, 1.0);
    } else if (cost_kind == 1) {
        spec.rewards.execution_cost.family = CostFamily::scaled_put;
        spec.rewards.execution_cost.strike = mid;
    } else {
        spec.rewards.execution_cost.family = CostFamily::table;
    }

    spec.rewards.impulse_map.family =
        pick(2) == 0 ? ImpulseMapFamily::identity : ImpulseMapFamily::translate;

    const int ecount = 1 + pick(2);
    for (int e = 0; e < ecount; ++e) {
        spec.impulses.values.push_back({uni(0.1, 0.5) * (pick(2) == 0 ? 1.0 : -1.0)});
    }
    if (cost_kind == 2) {
        for (int e = 0; e < ecount; ++e) {
            spec.rewards.execution_cost.table.push_back(uni(-0.5, 1.0));
        }
    }

    const int m = 1 + pick(2);
    const int lag_steps = 1 + pick(2);
    const int min_steps = std::max(m * lag_steps + 1, 4);
    const int n_t = min_steps + pick(8 - min_steps + 1);
    grid.dt = 0.125;
    grid.x_min = {lo};
    grid.x_max = {hi};
    grid.nx = {5 + 2 * pick(2)};
    spec.delay = {n_t * 0.125, lag_steps * 0.125, m};
    spec.initial_state = {mid};
    return spec;
}

std::string criterion_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    const int instances = 24;
    for (int t = 0; t < instances; ++t) {
        GridRequest grid;
        const ProblemSpec spec = random_tiny_spec(path_seed(20240808, t), grid);
        const ValidatedProblem problem = validate_problem(spec);
        auto [tg, sg] = build_grids(spec.delay, grid, 1);
        const ValueStore store = solve(problem, tg, sg, {1});
        const auto oracle = brute_force_oracle(problem, tg, sg);
        const auto v0 = store.v0(0);
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            worst = std::max(worst, std::abs(oracle[i] - v0[i]));
        }
        if (worst > 1e-9) fail("instance " + std::to_string(t) + " disagrees by " +
                               std::to_string(worst));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require_runtime(secs, 60.0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%d instances, max gap %.3g in %.2fs", instances, worst,
                  secs);
    return buf;
}

std::string criterion_boundary_data() {
    std::size_t checked = 0;
    for (const auto& run : completed_runs) {
        DelaySolver solver(run->problem, run->tg, run->sg);
        for (const auto& [key, entry] : run->store.entries()) {
            const ValueField g = solver.execution_boundary(run->store, entry.config);
            if (g.values != entry.fields.back()) {
                fail(run->name + ": stored terminal differs from c + v_{k-1} ∘ Gamma for " +
                     key);
            }
            ++checked;
        }
    }
    return std::to_string(checked) + " execution boundaries re-evaluated bit-exactly over " +
           std::to_string(completed_runs.size()) + " runs";
}

std::string criterion_dominance() {
    for (const auto& run : completed_runs) {
        const auto& store = run->store;
        const TimeGrid& tg = run->tg;
        const int ecount = run->problem.impulse_count();
        for (const auto& [key, entry] : store.entries()) {
            const int k = entry.config.count();
            if (k >= tg.multiplier()) continue;
            const DomainPartition dp = partition_domain(entry.config, tg);
            for (int j = dp.second_lo; j < dp.second_hi; ++j) {
                const auto own = store.field(k, entry.config, j);
                for (int e = 0; e < ecount; ++e) {
                    const auto other = store.field(k + 1, entry.config.append(j, e), j);
                    for (std::size_t i = 0; i < own.size(); ++i) {
                        if (own[i] < other[i]) fail(run->name + ": dominance fails for " + key);
                    }
                }
            }
        }
        for (int j = 0; j <= tg.num_steps; ++j) {
            const auto v0 = store.v0(j);
            const auto w = store.no_impulse(j);
            for (std::size_t i = 0; i < v0.size(); ++i) {
                if (v0[i] < w[i]) fail(run->name + ": no-action bound fails at node " +
                                       std::to_string(j));
            }
        }
    }
    return "pointwise over " + std::to_string(completed_runs.size()) + " runs";
}

std::string criterion_policy_attainment() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string path = problems_dir + "/gbm_m1.json";
    ProblemFile file = load_problem(path);
    ValidatedProblem problem = validate_problem(file.spec);
    auto [tg, sg] = build_grids(file.spec.delay, file.grid, problem.dim());
    const ValueStore store = solve(problem, tg, sg, {2});

    const double v0 = interpolate(sg, store.v0(0), file.spec.initial_state);
    const double tol = 0.02 * std::abs(v0);

    const MonteCarloResult mc =
        monte_carlo_value(problem, tg, store_policy(store), 10000, 4242, 2);
    if (std::abs(mc.mean - v0) > 3.0 * mc.std_error + tol) {
        fail("extracted policy misses v0: mc=" + std::to_string(mc.mean) +
             " v0=" + std::to_string(v0) + " stderr=" + std::to_string(mc.std_error));
    }

    const int lag = tg.lag_steps, delay = tg.delay_steps, n_t = tg.num_steps;
    auto admissible = [&](int j, const OrderBook& book) {
        if (book.count() >= tg.multiplier()) return false;
        if (book.has_decided && j < book.last_decision_node + lag) return false;
        return j + delay <= n_t;
    };
    const PolicyFn never = never_impulse_policy();
    const PolicyFn asap = [&](int j, std::span<const double>, const OrderBook& book) {
        return admissible(j, book) ? Decision{true, 0} : Decision{};
    };
    const PolicyFn threshold = [&](int j, std::span<const double> x, const OrderBook& book) {
        return (admissible(j, book) && x[0] < 100.0) ? Decision{true, 0} : Decision{};
    };
    std::string detail;
    int idx = 0;
    for (const auto* policy : {&never, &asap, &threshold}) {
        const MonteCarloResult r = monte_carlo_value(problem, tg, *policy, 10000, 777, 2);
        if (r.mean > v0 + 3.0 * r.std_error + tol) {
            fail("fixed strategy " + std::to_string(idx) + " beats v0: " +
                 std::to_string(r.mean) + " > " + std::to_string(v0));
        }
        detail += (idx ? "/" : "") + std::to_string(r.mean).substr(0, 7);
        ++idx;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require_runtime(secs, 60.0);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "v0=%.4f mc=%.4f±%.4f; fixed %s in %.1fs", v0, mc.mean,
                  mc.std_error, detail.c_str(), secs);
    return buf;
}

std::string criterion_fk_accuracy() {
    ProblemSpec spec;
    spec.dynamics.components = {{DynamicsFamily::geometric_bm, 0.05, 0.2, 0.0, 0.0}};
    spec.rewards.running_profit = {ScalarFamily::constant, 0.0, {}, 0, 0.0, true};
    spec.rewards.terminal_profit = {ScalarFamily::affine, 0.0, {0.0, 1.0}, 0, 0.0, true};
    spec.rewards.execution_cost.family = CostFamily::constant;
    spec.rewards.impulse_map.family = ImpulseMapFamily::identity;
    spec.delay = {1.0, 0.5, 1};
    spec.impulses.values = {{1.0}};
    spec.initial_state = {100.0};
    const ValidatedProblem problem = validate_problem(spec);
    auto [tg, sg] = build_grids(spec.delay, grid1d(1.0 / 4096.0, 0.0, 398.0, 200), 1);

    const Stepper stepper(problem, tg, sg);
    ValueField terminal;
    terminal.time_node = tg.num_steps;
    terminal.values.resize(sg.size());
    for (std::size_t i = 0; i < sg.size(); ++i) terminal.values[i] = sg.coord(0, i);
    const auto stack = feynman_kac_solve(stepper, terminal, 0);
    const double got = interpolate(sg, stack.front().values, std::vector<double>{100.0});
    const double expect = 100.0 * std::exp(0.05);
    const double rel = std::abs(got - expect) / expect;
    if (rel > 0.005) fail("relative error " + std::to_string(rel) + " > 0.5%");
    char buf[128];
    std::snprintf(buf, sizeof(buf), "v(0,100)=%.5f vs 100e^mu=%.5f (rel %.2e)", got, expect,
                  rel);
    return buf;
}

std::string criterion_determinism() {
    const std::string path = problems_dir + "/counting.json";
    ProblemFile file = load_problem(path);
    ValidatedProblem problem = validate_problem(file.spec);
    auto [tg, sg] = build_grids(file.spec.delay, file.grid, problem.dim());
    const std::uint64_t hash = hash_file(path);

    const int hw = std::max(2u, std::thread::hardware_concurrency());
    std::vector<std::string> store_bytes;
    std::vector<std::string> manifests;
    std::vector<double> totals;
    std::vector<Trajectory> trajectories;
    for (int threads : {1, 2, hw}) {
        SolveTelemetry telemetry;
        ValueStore store = solve(problem, tg, sg, {threads}, &telemetry);
        store.set_problem_hash(hash);
        const auto tmp = std::filesystem::temp_directory_path() /
                         ("dimpulse_det_" + std::to_string(threads) + ".store");
        persist_store(store, tmp.string());
        std::ifstream in(tmp, std::ios::binary);
        store_bytes.emplace_back(std::string(std::istreambuf_iterator<char>(in),
                                             std::istreambuf_iterator<char>()));
        std::filesystem::remove(tmp);
        manifests.push_back(manifest_text(path, hash, file.spec.delay, tg, sg, telemetry, 0.0));

        const Trajectory traj =
            simulate_path(problem, tg, store_policy(store), 2026);
        totals.push_back(traj.total());
        const MonteCarloResult mc =
            monte_carlo_value(problem, tg, store_policy(store), 400, 5, threads);
        totals.push_back(mc.mean);
        totals.push_back(mc.std_error);
        trajectories.push_back(traj);
    }
    for (std::size_t t = 1; t < trajectories.size(); ++t) {
        if (trajectories[t].points.size() != trajectories[0].points.size()) {
            fail("trajectory lengths differ across thread counts");
        }
        for (std::size_t j = 0; j < trajectories[0].points.size(); ++j) {
            if (trajectories[t].points[j].state != trajectories[0].points[j].state ||
                trajectories[t].points[j].action != trajectories[0].points[j].action) {
                fail("trajectories differ across thread counts");
            }
        }
    }
    if (store_bytes[0] != store_bytes[1] || store_bytes[1] != store_bytes[2]) {
        fail("persisted stores differ across thread counts");
    }
    for (int g = 0; g < 3; ++g) {
        if (totals[g] != totals[g + 3] || totals[g + 3] != totals[g + 6]) {
            fail("trajectories or MC statistics differ across thread counts");
        }
    }
    auto strip_timing = [](const std::string& text) {
        auto j = nlohmann::ordered_json::parse(text);
        j.erase("timing");
        return j.dump();
    };
    const std::string m0 = strip_timing(manifests[0]);
    if (m0 != strip_timing(manifests[1]) || m0 != strip_timing(manifests[2])) {
        fail("manifests differ (beyond timing) across thread counts");
    }
    return "stores, trajectories, MC stats and manifests identical for 1/2/" +
           std::to_string(hw) + " threads";
}

std::string criterion_shortfall() {
    const auto base = solve_file("shortfall.json");

    // invariants 5-6 on this store are covered by those criteria via
    // completed_runs; here: solve again with a higher claim strike and
    // check v0 is pointwise nonincreasing in the strike
    const std::string path = problems_dir + "/shortfall.json";
    ProblemFile file = load_problem(path);
    file.spec.rewards.terminal_profit.strike = 11.0;
    const auto higher = solve_spec("shortfall(K=11)", file.spec, file.grid);

    for (int j = 0; j <= base->tg.num_steps; ++j) {
        const auto a = base->store.v0(j);
        const auto b = higher->store.v0(j);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (b[i] > a[i]) fail("v0 increased with the claim strike at node " +
                                  std::to_string(j));
        }
    }
    const std::vector<double> x0{10.0, 0.0, 0.0};
    const double v0 = interpolate(base->sg, base->store.v0(0), x0);
    const double v1 = interpolate(higher->sg, higher->store.v0(0), x0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "3-D solve ok; v0(K=10)=%.5f >= v0(K=11)=%.5f", v0, v1);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    problems_dir = argc > 1 ? argv[1] : "problems";

    criterion(1, "counting family: exact execution counts", criterion_counting);
    criterion(2, "never-impulse family: v0 == Feynman-Kac, policy waits",
              criterion_never_impulse);
    criterion(3, "m=1 reduction matches the direct variational route", criterion_m1_reduction);
    criterion(4, "solver matches the exhaustive oracle on tiny instances", criterion_oracle);
    criterion(10, "shortfall example: 3-D solve, strike monotonicity", criterion_shortfall);
    criterion(5, "execution boundary data re-evaluates bit-exactly", criterion_boundary_data);
    criterion(6, "impulse dominance and no-action lower bound", criterion_dominance);
    criterion(7, "extracted policy attains v0; fixed strategies do not beat it",
              criterion_policy_attainment);
    criterion(8, "Feynman-Kac accuracy at nx=200", criterion_fk_accuracy);
    criterion(9, "bit-identical stores, trajectories and manifests across threads",
              criterion_determinism);

    std::sort(results.begin(), results.end(),
              [](const CriterionResult& a, const CriterionResult& b) {
                  return a.index < b.index;
              });
    int failures = 0;
    for (const auto& r : results) {
        std::printf("[%s] %2d. %s (%.2fs)%s%s\n", r.passed ? "PASS" : "FAIL", r.index,
                    r.name.c_str(), r.seconds, r.detail.empty() ? "" : " — ",
                    r.detail.c_str());
        if (!r.passed) ++failures;
    }
    if (failures > 0) {
        std::printf("%d acceptance criteria FAILED\n", failures);
        return 1;
    }
    std::printf("all 10 acceptance criteria passed\n");
    return 0;
}
