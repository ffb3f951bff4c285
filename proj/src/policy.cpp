#include "dimpulse/policy.hpp"

#include <cmath>

#include "dimpulse/parallel.hpp"
#include "dimpulse/rng.hpp"

namespace dimpulse {

PendingConfig OrderBook::as_config() const {
    PendingConfig p;
    p.decision_nodes.reserve(pending.size());
    p.impulse_indices.reserve(pending.size());
    for (const auto& o : pending) {
        p.decision_nodes.push_back(o.decision_node);
        p.impulse_indices.push_back(o.impulse_index);
    }
    return p;
}

Decision extract_decision(const ValueStore& store, int j, std::span<const double> x,
                          const OrderBook& book, ClampStats* clamp_stats) {
    if (!store.complete()) {
        throw Error(Errc::store_incomplete, "extract_decision requires a completed store");
    }
    const TimeGrid& tg = store.time_grid();
    const SpaceGrid& sg = store.space_grid();
    const int k = book.count();

    if (k >= store.max_pending()) return {};
    if (book.has_decided && j < book.last_decision_node + tg.lag_steps) return {};
    if (j + tg.delay_steps > tg.num_steps) return {};  // could never execute

    const PendingConfig p = book.as_config();
    const double v_now = interpolate(sg, store.field(k, p, j), x, clamp_stats);

    double best = 0.0;
    int best_e = -1;
    const int ecount = static_cast<int>(store.impulses().size());
    for (int e = 0; e < ecount; ++e) {
        const double v = interpolate(sg, store.field(k + 1, p.append(j, e), j), x, clamp_stats);
        if (best_e < 0 || v > best) {
            best = v;
            best_e = e;
        }
    }

    const double eps_bind = 1e-9 * (1.0 + std::abs(v_now));
    if (v_now <= best + eps_bind) return {true, best_e};
    return {};
}

PolicyFn store_policy(const ValueStore& store, ClampStats* clamp_stats) {
    return [&store, clamp_stats](int j, std::span<const double> x, const OrderBook& book) {
        return extract_decision(store, j, x, book, clamp_stats);
    };
}

PolicyFn never_impulse_policy() {
    return [](int, std::span<const double>, const OrderBook&) { return Decision{}; };
}

namespace {

Trajectory run_path(const ValidatedProblem& problem, const TimeGrid& tg,
                    const PolicyFn& policy, std::uint64_t seed, bool record) {
    const int d = problem.dim();
    Trajectory traj;
    NormalSampler normals(seed);
    std::vector<double> x = problem.spec().initial_state;
    std::vector<double> mapped(d), drift(d), vol(d);
    OrderBook book;

    for (int j = 0; j <= tg.num_steps; ++j) {
        std::string action;

        // execution due at this node (at most one: decisions are >= h apart)
        if (!book.pending.empty() &&
            book.pending.front().decision_node + tg.delay_steps == j) {
            const auto order = book.pending.front();
            book.pending.erase(book.pending.begin());
            book.consumed += 1;
            traj.execution_rewards += problem.execution_cost(x, order.impulse_index);
            problem.apply_impulse(x, order.impulse_index, mapped);
            x = mapped;
            traj.executions += 1;
            if (record) action = "execute(" + std::to_string(order.impulse_index) + ")";
        }

        const Decision dec = policy(j, x, book);
        if (dec.decide) {
            if (book.count() >= tg.multiplier()) {
                throw Error(Errc::invalid_argument, "policy exceeded pending capacity");
            }
            if (book.has_decided && j < book.last_decision_node + tg.lag_steps) {
                throw Error(Errc::invalid_argument, "policy violated the decision lag");
            }
            book.pending.push_back({j, dec.impulse_index});
            book.last_decision_node = j;
            book.has_decided = true;
            traj.decisions += 1;
            if (record) {
                if (!action.empty()) action += "+";
                action += "decide(" + std::to_string(dec.impulse_index) + ")";
            }
        }

        if (j < tg.num_steps) {
            traj.running_integral += problem.running_profit(x) * tg.dt;
        } else {
            traj.terminal_reward = problem.terminal_profit(x);
        }

        if (record) {
            TrajectoryPoint pt;
            pt.time = tg.time_of(j);
            pt.state = x;
            pt.action = action.empty() ? "wait" : action;
            pt.pending_count = book.count();
            pt.running_value = traj.running_integral + traj.execution_rewards +
                               (j == tg.num_steps ? traj.terminal_reward : 0.0);
            traj.points.push_back(std::move(pt));
        }

        if (j < tg.num_steps) {
            problem.drift_and_vol(x, drift, vol);
            const double sqdt = std::sqrt(tg.dt);
            for (int a = 0; a < d; ++a) {
                const double z = normals.next();
                x[a] += drift[a] * tg.dt + vol[a] * sqdt * z;
            }
        }
    }
    return traj;
}

} // namespace

Trajectory simulate_path(const ValidatedProblem& problem, const TimeGrid& tg,
                         const PolicyFn& policy, std::uint64_t seed) {
    return run_path(problem, tg, policy, seed, true);
}

MonteCarloResult monte_carlo_value(const ValidatedProblem& problem, const TimeGrid& tg,
                                   const PolicyFn& policy, std::size_t n_paths,
                                   std::uint64_t seed, int threads) {
    if (n_paths < 2) {
        throw Error(Errc::invalid_argument, "monte_carlo_value requires n_paths >= 2");
    }
    std::vector<double> payoffs(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        payoffs[i] = run_path(problem, tg, policy, path_seed(seed, i), false).total();
    });

    MonteCarloResult r;
    r.paths = n_paths;
    r.mean = pairwise_sum(payoffs) / static_cast<double>(n_paths);
    std::vector<double> sq(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double dev = payoffs[i] - r.mean;
        sq[i] = dev * dev;
    }
    const double var =
        pairwise_sum(sq) / (static_cast<double>(n_paths) * static_cast<double>(n_paths - 1));
    r.std_error = std::sqrt(var);
    return r;
}

} // namespace dimpulse
