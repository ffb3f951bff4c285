#ifndef DIMPULSE_POLICY_HPP
#define DIMPULSE_POLICY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dimpulse/solver.hpp"

namespace dimpulse {

/// Live order book of a simulated controller.
struct OrderBook {
    struct Order {
        int decision_node;
        int impulse_index;
    };
    std::vector<Order> pending;  // ascending decision nodes, at most m
    int consumed = 0;            // executed orders so far (iota)
    int last_decision_node = -1;
    bool has_decided = false;

    int count() const { return static_cast<int>(pending.size()); }
    PendingConfig as_config() const;
};

struct Decision {
    bool decide = false;
    int impulse_index = -1;
};

/// Greedy stopping-region rule: decide iff the current value sits on the
/// obstacle (within eps_bind = 1e-9*(1+|v|)); the impulse is the argmax
/// over E with ties broken by list order. Lag, capacity and horizon
/// preconditions force wait. Throws store_incomplete on a partial store.
Decision extract_decision(const ValueStore& store, int j, std::span<const double> x,
                          const OrderBook& book, ClampStats* clamp_stats = nullptr);

/// A strategy consulted at each node (after due executions are applied).
using PolicyFn =
    std::function<Decision(int j, std::span<const double> x, const OrderBook& book)>;

PolicyFn store_policy(const ValueStore& store, ClampStats* clamp_stats = nullptr);
PolicyFn never_impulse_policy();

struct TrajectoryPoint {
    double time;
    std::vector<double> state;   // post-execution state at the node
    std::string action;          // "wait", "decide(i)", "execute(i)", "execute(i)+decide(j)"
    int pending_count;
    double running_value;        // accumulated int f + sum c (+ g at the last node)
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    double running_integral = 0.0;   // int_0^T f dt (Euler sum)
    double execution_rewards = 0.0;  // sum of c at executions
    double terminal_reward = 0.0;    // g(X_T)
    int decisions = 0;
    int executions = 0;

    double total() const { return running_integral + execution_rewards + terminal_reward; }
};

/// Euler-Maruyama simulation of the controlled SDE on the solve grid.
/// At each node: due execution first (state jump + cost credit), then the
/// policy is consulted, then f accrues on the post-execution state.
Trajectory simulate_path(const ValidatedProblem& problem, const TimeGrid& tg,
                         const PolicyFn& policy, std::uint64_t seed);

struct MonteCarloResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t paths = 0;
};

/// Sample mean and standard error of the path profit over independent
/// paths (path i is driven by path_seed(seed, i)); reductions are pairwise
/// so any thread count produces identical output.
MonteCarloResult monte_carlo_value(const ValidatedProblem& problem, const TimeGrid& tg,
                                   const PolicyFn& policy, std::size_t n_paths,
                                   std::uint64_t seed, int threads = 1);

/// Exact dynamic programming on the finite chain (time node, space node,
/// pending-order list) induced by the explicit stencil; shares only model
/// evaluation with the solver. Returns v0(0, .) over the space grid.
/// Caps: N_T <= 10, total space nodes <= 9, |E| <= 2, m <= 2.
std::vector<double> brute_force_oracle(const ValidatedProblem& problem, const TimeGrid& tg,
                                       const SpaceGrid& sg);

} // namespace dimpulse

#endif // DIMPULSE_POLICY_HPP
