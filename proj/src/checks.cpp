#include "dimpulse/checks.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "dimpulse/rng.hpp"
#include "dimpulse/store_io.hpp"

namespace dimpulse {

namespace {

std::string at_node(const SpaceGrid& sg, std::size_t i) {
    std::vector<double> x(sg.dim());
    sg.node(i, x);
    std::ostringstream os;
    os << "x=(";
    for (int a = 0; a < sg.dim(); ++a) os << (a ? "," : "") << x[a];
    os << ")";
    return os.str();
}

bool spans_equal(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    return true;
}

} // namespace

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results) {
        if (!r.passed) return false;
    }
    return true;
}

std::vector<CheckResult> run_invariant_suite(const ProblemFile& file,
                                             const ValidatedProblem& problem,
                                             const TimeGrid& tg, const SpaceGrid& sg,
                                             const ValueStore& store,
                                             const CheckOptions& options) {
    std::vector<CheckResult> out;
    auto check = [&](const std::string& name, auto&& body) {
        CheckResult r;
        r.name = name;
        try {
            std::string detail = body();
            r.passed = true;
            r.detail = std::move(detail);
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = e.what();
        }
        out.push_back(std::move(r));
    };
    auto fail = [](const std::string& msg) { throw std::runtime_error(msg); };

    const int d = problem.dim();
    const std::size_t nodes = sg.size();
    const int ecount = problem.impulse_count();

    // ---- model ----
    check("model.growth_bound", [&]() -> std::string {
        std::vector<double> lo(d), hi(d);
        for (int a = 0; a < d; ++a) {
            lo[a] = sg.axes[a].lo;
            hi[a] = sg.axes[a].hi;
        }
        const double c = problem.growth_constant(lo, hi);
        std::vector<double> x(d), mapped(d);
        for (std::size_t i = 0; i < nodes; ++i) {
            sg.node(i, x);
            double norm = 0.0;
            for (int a = 0; a < d; ++a) norm = std::max(norm, std::abs(x[a]));
            const double envelope = c * (1.0 + norm) * (1.0 + 1e-12) + 1e-12;
            for (int e = 0; e < ecount; ++e) {
                const double total = std::abs(problem.running_profit(x)) +
                                     std::abs(problem.terminal_profit(x)) +
                                     std::abs(problem.execution_cost(x, e));
                if (total > envelope) {
                    fail("reward growth bound violated at " + at_node(sg, i));
                }
                problem.apply_impulse(x, e, mapped);
                double mnorm = 0.0;
                for (int a = 0; a < d; ++a) mnorm = std::max(mnorm, std::abs(mapped[a]));
                if (mnorm > envelope) {
                    fail("impulse map growth bound violated at " + at_node(sg, i));
                }
            }
        }
        std::ostringstream os;
        os << "C = " << c;
        return os.str();
    });

    check("model.eval_purity", [&]() -> std::string {
        std::vector<double> x(d), b1(d), s1(d), b2(d), s2(d), m1(d), m2(d);
        for (std::size_t i = 0; i < nodes; i += std::max<std::size_t>(1, nodes / 64)) {
            sg.node(i, x);
            problem.drift_and_vol(x, b1, s1);
            problem.drift_and_vol(x, b2, s2);
            if (b1 != b2 || s1 != s2) fail("dynamics evaluation is not pure");
            const double f1 = problem.running_profit(x);
            const double f2 = problem.running_profit(x);
            const double g1 = problem.terminal_profit(x);
            const double g2 = problem.terminal_profit(x);
            if (f1 != f2 || g1 != g2) fail("reward evaluation is not pure");
            for (int e = 0; e < ecount; ++e) {
                if (problem.execution_cost(x, e) != problem.execution_cost(x, e)) {
                    fail("execution cost not pure");
                }
                problem.apply_impulse(x, e, m1);
                problem.apply_impulse(x, e, m2);
                if (m1 != m2) fail("impulse map not pure");
            }
        }
        return {};
    });

    // ---- lattice ----
    check("lattice.no_configs_beyond_m", [&]() -> std::string {
        const int big_n = tg.num_stages();
        if (!enumerate_configs(tg.multiplier() + 1, big_n, tg, ecount).empty()) {
            fail("k = m+1 admits configurations");
        }
        return {};
    });

    check("lattice.partition_cover", [&]() -> std::string {
        for (const auto& [key, entry] : store.entries()) {
            const DomainPartition dp = partition_domain(entry.config, tg);
            if (dp.first_lo >= dp.first_hi) fail("empty T_p^1 for " + key);
            if (dp.first_hi != dp.second_lo) fail("partition gap for " + key);
            if (dp.second_hi != dp.terminal) fail("partition overrun for " + key);
            if (entry.config.count() == tg.multiplier() && !dp.second_empty()) {
                fail("T_p^2 nonempty at k = m for " + key);
            }
        }
        return {};
    });

    check("lattice.stage_monotone", [&]() -> std::string {
        const int big_n = tg.num_stages();
        for (int k = 1; k <= tg.multiplier(); ++k) {
            std::size_t prev = 0;
            for (int n = tg.multiplier(); n <= big_n; ++n) {
                const auto configs = enumerate_configs(k, n, tg, ecount);
                if (configs.size() < prev) fail("config set shrank with the stage");
                prev = configs.size();
            }
            if (k == 1) {
                const auto full = enumerate_configs(1, big_n, tg, ecount);
                const std::size_t expect =
                    static_cast<std::size_t>(tg.num_steps + 1) * static_cast<std::size_t>(ecount);
                if (full.size() != expect) fail("k=1 config count formula mismatch");
            }
        }
        return {};
    });

    // ---- kernel ----
    const Stepper stepper(problem, tg, sg);

    check("kernel.fk_equals_unconstrained_stopping", [&]() -> std::string {
        const int end = tg.num_steps;
        const int start = std::max(0, end - std::min(tg.lag_steps, 16));
        ValueField terminal;
        terminal.time_node = end;
        terminal.values.assign(store.no_impulse(end).begin(), store.no_impulse(end).end());
        auto fk = feynman_kac_solve(stepper, terminal, start);
        ObstacleField never;
        never.lo = start;
        never.values.assign(end - start, std::vector<double>(nodes, -1e300));
        auto stopped = optimal_stopping_solve(stepper, never, terminal, start);
        for (std::size_t j = 0; j < fk.size(); ++j) {
            if (fk[j].values != stopped[j].values) fail("stacks differ bit-wise");
        }
        return {};
    });

    check("kernel.monotone_step", [&]() -> std::string {
        if (!stepper.all_weights_nonnegative()) {
            return "not applicable: stencil has drift-dominated negative weights";
        }
        NormalSampler rng(options.seed ^ 0xABCDEFULL);
        std::vector<double> a(nodes), b(nodes), sa(nodes), sb(nodes);
        for (int rep = 0; rep < 8; ++rep) {
            for (std::size_t i = 0; i < nodes; ++i) {
                a[i] = 10.0 * rng.next();
                b[i] = a[i] + std::abs(rng.next());
            }
            stepper.step(a, sa);
            stepper.step(b, sb);
            for (std::size_t i = 0; i < nodes; ++i) {
                if (sa[i] > sb[i]) fail("ordered inputs produced unordered outputs");
            }
        }
        return {};
    });

    check("kernel.affine_invariance", [&]() -> std::string {
        // zero-dynamics problem on the same grid: affine fields are fixed points
        ProblemSpec zero;
        zero.dynamics.components.assign(d, DynamicsComponent{});
        zero.rewards.running_profit = {ScalarFamily::constant, 0.0, {}, 0, 0.0, true};
        zero.rewards.terminal_profit = {ScalarFamily::constant, 0.0, {}, 0, 0.0, true};
        zero.rewards.execution_cost.family = CostFamily::constant;
        zero.rewards.execution_cost.value = 0.0;
        zero.impulses.values = {{0.0}};
        zero.delay = problem.spec().delay;
        zero.initial_state.assign(d, sg.axes[0].lo);
        const ValidatedProblem zp = validate_problem(zero);
        const Stepper zstep(zp, tg, sg);
        ValueField affine;
        affine.time_node = std::min(tg.num_steps, 12);
        affine.values.resize(nodes);
        std::vector<double> x(d);
        for (std::size_t i = 0; i < nodes; ++i) {
            sg.node(i, x);
            double v = 0.5;
            for (int a = 0; a < d; ++a) v += (a + 1.0) * x[a];
            affine.values[i] = v;
        }
        auto stack = feynman_kac_solve(zstep, affine, 0);
        for (const auto& f : stack) {
            if (f.values != stack.back().values) fail("affine field drifted");
        }
        return {};
    });

    check("kernel.generator_consistency", [&]() -> std::string {
        std::vector<double> x(d), b(d), s(d);
        std::vector<double> lin(nodes), quad(nodes), glin(nodes), gquad(nodes);
        for (int axis = 0; axis < d; ++axis) {
            for (std::size_t i = 0; i < nodes; ++i) {
                sg.node(i, x);
                lin[i] = x[axis];
                quad[i] = x[axis] * x[axis];
            }
            stepper.generator(lin, glin);
            stepper.generator(quad, gquad);
            std::vector<int> idx(d);
            for (std::size_t i = 0; i < nodes; ++i) {
                sg.unflat(i, idx);
                bool interior = true;
                for (int a = 0; a < d; ++a) {
                    interior = interior && idx[a] > 0 && idx[a] < sg.axes[a].n - 1;
                }
                if (!interior) continue;
                sg.node(i, x);
                problem.drift_and_vol(x, b, s);
                const double scale = 1.0 + std::abs(b[axis]) + s[axis] * s[axis] +
                                     std::abs(x[axis]);
                if (std::abs(glin[i] - b[axis]) > 1e-9 * scale) {
                    fail("generator(x) != b at " + at_node(sg, i));
                }
                const double expect = 2.0 * x[axis] * b[axis] + s[axis] * s[axis];
                if (std::abs(gquad[i] - expect) > 1e-9 * (1.0 + std::abs(expect) + scale)) {
                    fail("generator(x^2) != 2xb + sigma^2 at " + at_node(sg, i));
                }
            }
        }
        return {};
    });

    // ---- solver / store ----
    check("store.v0_terminal_is_g", [&]() -> std::string {
        std::vector<double> x(d);
        const auto v0T = store.v0(tg.num_steps);
        for (std::size_t i = 0; i < nodes; ++i) {
            sg.node(i, x);
            if (v0T[i] != problem.terminal_profit(x)) fail("v0(T) != g at " + at_node(sg, i));
        }
        return {};
    });

    check("store.execution_boundary_bitexact", [&]() -> std::string {
        std::size_t checked = 0;
        for (const auto& [key, entry] : store.entries()) {
            const PendingConfig& p = entry.config;
            const int terminal = p.first_node() + tg.delay_steps;
            const PendingConfig p_minus = p.drop_first();
            const auto prev = store.field(p_minus.count(), p_minus, terminal);
            ValueField prev_field;
            prev_field.time_node = terminal;
            prev_field.values.assign(prev.begin(), prev.end());
            const ValueField g =
                apply_execution_boundary(problem, sg, prev_field, p.impulse_indices.front());
            if (g.values != entry.fields.back()) {
                fail("stored terminal differs from re-evaluated boundary for " + key);
            }
            ++checked;
        }
        return std::to_string(checked) + " boundaries re-evaluated";
    });

    check("store.impulse_dominance", [&]() -> std::string {
        // v_k >= max_e v_{k+1}(., p U (t,e)) on T_p^2, exact
        for (const auto& [key, entry] : store.entries()) {
            const PendingConfig& p = entry.config;
            const int k = p.count();
            if (k >= tg.multiplier()) continue;
            const DomainPartition dp = partition_domain(p, tg);
            for (int j = dp.second_lo; j < dp.second_hi; ++j) {
                const auto own = store.field(k, p, j);
                for (int e = 0; e < ecount; ++e) {
                    const auto other = store.field(k + 1, p.append(j, e), j);
                    for (std::size_t i = 0; i < nodes; ++i) {
                        if (own[i] < other[i]) {
                            fail("dominance violated for " + key + " at node " +
                                 std::to_string(j) + ", " + at_node(sg, i));
                        }
                    }
                }
            }
        }
        // v0 >= max_e v1(., (t,e)) wherever decisions are possible
        for (int j = 0; j + tg.delay_steps <= tg.num_steps; ++j) {
            const auto own = store.v0(j);
            for (int e = 0; e < ecount; ++e) {
                const auto other = store.field(1, PendingConfig{}.append(j, e), j);
                for (std::size_t i = 0; i < nodes; ++i) {
                    if (own[i] < other[i]) {
                        fail("v0 dominance violated at node " + std::to_string(j));
                    }
                }
            }
        }
        return {};
    });

    check("store.no_action_lower_bound", [&]() -> std::string {
        for (int j = 0; j <= tg.num_steps; ++j) {
            const auto v0 = store.v0(j);
            const auto w = store.no_impulse(j);
            for (std::size_t i = 0; i < nodes; ++i) {
                if (v0[i] < w[i]) {
                    fail("v0 < no-impulse value at node " + std::to_string(j) + ", " +
                         at_node(sg, i));
                }
            }
        }
        return {};
    });

    check("store.dpp_residual", [&]() -> std::string {
        std::vector<double> buf(nodes);
        for (const auto& [key, entry] : store.entries()) {
            const DomainPartition dp = partition_domain(entry.config, tg);
            for (int j = dp.first_lo; j < dp.first_hi; ++j) {
                stepper.step(entry.fields[j + 1 - entry.lo], buf);
                if (buf != entry.fields[j - entry.lo]) {
                    fail("linear-region residual nonzero for " + key);
                }
            }
        }
        // v0 is a supersolution of its own continuation everywhere
        for (int j = 0; j < tg.num_steps; ++j) {
            stepper.step(store.v0(j + 1), buf);
            const auto v0 = store.v0(j);
            for (std::size_t i = 0; i < nodes; ++i) {
                if (v0[i] < buf[i]) fail("v0 below its continuation at node " + std::to_string(j));
            }
        }
        return {};
    });

    check("store.thread_determinism", [&]() -> std::string {
        SolveOptions opt1{1};
        SolveOptions opt2{std::max(2, options.threads)};
        ValueStore s1 = solve(problem, tg, sg, opt1);
        ValueStore s2 = solve(problem, tg, sg, opt2);
        for (int j = 0; j <= tg.num_steps; ++j) {
            if (!spans_equal(s1.v0(j), s2.v0(j)) || !spans_equal(store.v0(j), s1.v0(j))) {
                fail("v0 depends on the thread count");
            }
        }
        if (s1.entries().size() != s2.entries().size() ||
            s1.entries().size() != store.entries().size()) {
            fail("entry sets depend on the thread count");
        }
        for (const auto& [key, e1] : s1.entries()) {
            const auto& e2 = s2.entries().at(key);
            const auto& e0 = store.entries().at(key);
            if (e1.fields != e2.fields || e1.fields != e0.fields) {
                fail("fields depend on the thread count: " + key);
            }
        }
        return {};
    });

    // ---- policy ----
    check("policy.admissibility_and_bookkeeping", [&]() -> std::string {
        const PolicyFn policy = store_policy(store);
        for (std::size_t s = 0; s < options.sim_paths; ++s) {
            const Trajectory traj =
                simulate_path(problem, tg, policy, path_seed(options.seed, s));
            int last_decision = -1;
            std::vector<int> decision_nodes;
            int executions = 0;
            for (std::size_t j = 0; j < traj.points.size(); ++j) {
                const auto& pt = traj.points[j];
                if (pt.pending_count > tg.multiplier()) fail("pending count exceeded m");
                if (pt.action.find("decide") != std::string::npos) {
                    const int node = static_cast<int>(j);
                    if (last_decision >= 0 && node - last_decision < tg.lag_steps) {
                        fail("decision lag violated");
                    }
                    if (node + tg.delay_steps > tg.num_steps) {
                        fail("decision could never execute");
                    }
                    decision_nodes.push_back(node);
                    last_decision = node;
                }
                if (pt.action.find("execute") != std::string::npos) ++executions;
            }
            if (executions != static_cast<int>(decision_nodes.size())) {
                fail("decided and executed order counts differ");
            }
            for (std::size_t q = 0; q < decision_nodes.size(); ++q) {
                const std::size_t exec_node = decision_nodes[q] + tg.delay_steps;
                if (exec_node >= traj.points.size() ||
                    traj.points[exec_node].action.find("execute") == std::string::npos) {
                    fail("execution did not land exactly m*h after its decision");
                }
            }
            const double recomputed =
                traj.running_integral + traj.execution_rewards + traj.terminal_reward;
            if (recomputed != traj.total()) fail("profit decomposition inconsistent");
            if (!traj.points.empty() &&
                traj.points.back().running_value != traj.total()) {
                fail("trajectory running value does not end at the total profit");
            }
        }
        return std::to_string(options.sim_paths) + " paths checked";
    });

    check("policy.simulation_determinism", [&]() -> std::string {
        const PolicyFn policy = store_policy(store);
        const Trajectory a = simulate_path(problem, tg, policy, options.seed);
        const Trajectory b = simulate_path(problem, tg, policy, options.seed);
        if (a.total() != b.total() || a.points.size() != b.points.size()) {
            fail("same seed produced different trajectories");
        }
        for (std::size_t j = 0; j < a.points.size(); ++j) {
            if (a.points[j].state != b.points[j].state ||
                a.points[j].action != b.points[j].action) {
                fail("same seed produced different trajectories");
            }
        }
        return {};
    });

    check("policy.mc_consistency", [&]() -> std::string {
        const std::vector<double>& x0 = problem.spec().initial_state;
        const double v0 = interpolate(sg, store.v0(0), x0);
        const double tol = options.value_tolerance * (1.0 + std::abs(v0));
        const PolicyFn policy = store_policy(store);
        const MonteCarloResult mc =
            monte_carlo_value(problem, tg, policy, options.mc_paths, options.seed,
                              options.threads);
        const double band = 3.0 * mc.std_error + tol;
        std::ostringstream os;
        os << "v0 = " << v0 << ", mc = " << mc.mean << " +- " << mc.std_error;
        if (std::abs(mc.mean - v0) > band) fail("extracted policy does not attain v0: " + os.str());
        const MonteCarloResult idle = monte_carlo_value(
            problem, tg, never_impulse_policy(), options.mc_paths, options.seed,
            options.threads);
        if (idle.mean > v0 + 3.0 * idle.std_error + tol) {
            fail("no-impulse strategy beats v0: " + os.str());
        }
        return os.str();
    });

    // ---- persistence ----
    check("io.problem_roundtrip", [&]() -> std::string {
        const ProblemFile again = parse_problem(serialize_problem(file));
        if (!problems_equal(file, again)) fail("problem JSON round-trip changed the document");
        return {};
    });

    check("io.store_roundtrip", [&]() -> std::string {
        const std::string tmp =
            (std::filesystem::temp_directory_path() / "dimpulse_validate.store").string();
        persist_store(store, tmp);
        const ValueStore loaded = load_store(tmp);
        std::filesystem::remove(tmp);
        for (int j = 0; j <= tg.num_steps; ++j) {
            if (!spans_equal(loaded.v0(j), store.v0(j)) ||
                !spans_equal(loaded.no_impulse(j), store.no_impulse(j))) {
                fail("store round-trip changed v0 or the no-impulse field");
            }
        }
        if (loaded.entries().size() != store.entries().size()) {
            fail("store round-trip changed the entry set");
        }
        for (const auto& [key, entry] : store.entries()) {
            if (loaded.entries().at(key).fields != entry.fields) {
                fail("store round-trip changed entry " + key);
            }
        }
        return {};
    });

    return out;
}

double oracle_max_gap(const ValidatedProblem& problem, const TimeGrid& tg,
                      const SpaceGrid& sg, const ValueStore& store) {
    const std::vector<double> oracle = brute_force_oracle(problem, tg, sg);
    const auto v0 = store.v0(0);
    double gap = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
        gap = std::max(gap, std::abs(oracle[i] - v0[i]));
    }
    return gap;
}

} // namespace dimpulse
