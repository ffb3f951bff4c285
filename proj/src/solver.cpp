#include "dimpulse/solver.hpp"

#include <algorithm>
#include <chrono>

#include "dimpulse/parallel.hpp"

namespace dimpulse {

ValueStore::ValueStore(TimeGrid tg, SpaceGrid sg, std::vector<std::vector<double>> impulses)
    : tg_(tg), sg_(std::move(sg)), impulses_(std::move(impulses)) {
    no_impulse_.resize(tg_.num_steps + 1);
    v0_.resize(tg_.num_steps + 1);
    v0_low_ = tg_.num_steps + 1;
}

std::span<const double> ValueStore::v0(int j) const {
    if (j < v0_low_ || j > tg_.num_steps) {
        throw Error(Errc::dependency_incomplete,
                    "v0 at node " + std::to_string(j) + " not yet computed");
    }
    return v0_[j];
}

std::span<const double> ValueStore::field(int k, const PendingConfig& p, int j) const {
    if (k != p.count()) {
        throw Error(Errc::invalid_argument, "pending count does not match k");
    }
    if (k == 0) return v0(j);
    if (classify_config(p, tg_) == ConfigRegion::never_executed) {
        if (no_impulse_.at(j).empty()) {
            throw Error(Errc::dependency_incomplete, "no-impulse field not initialized");
        }
        return no_impulse_[j];
    }
    const auto it = entries_.find(p.key());
    if (it == entries_.end() || !it->second.complete) {
        throw Error(Errc::dependency_incomplete,
                    "configuration " + p.key() + " not yet computed");
    }
    const Entry& e = it->second;
    if (j < e.lo || j > e.hi) {
        throw Error(Errc::dependency_incomplete,
                    "node " + std::to_string(j) + " outside domain of " + p.key());
    }
    return e.fields[j - e.lo];
}

void ValueStore::set_no_impulse(std::vector<std::vector<double>> fields) {
    no_impulse_ = std::move(fields);
}

void ValueStore::assign_v0_range(int lo, int hi, std::vector<std::vector<double>> fields) {
    // write-once: the range must sit directly below the known region
    if (hi != v0_low_ - 1 || static_cast<int>(fields.size()) != hi - lo + 1) {
        throw Error(Errc::invalid_argument, "v0 range must extend the known region downward");
    }
    for (int j = lo; j <= hi; ++j) {
        v0_[j] = std::move(fields[j - lo]);
    }
    v0_low_ = lo;
}

ValueStore::Entry& ValueStore::create_entry(const PendingConfig& p, int lo, int hi,
                                            int stage) {
    auto [it, inserted] = entries_.emplace(p.key(), Entry{});
    if (!inserted) {
        throw Error(Errc::invalid_argument, "duplicate store entry " + p.key());
    }
    Entry& e = it->second;
    e.config = p;
    e.lo = lo;
    e.hi = hi;
    e.stage_written = stage;
    e.fields.resize(hi - lo + 1);
    return e;
}

void ValueStore::finalize(int stage) {
    stage_ = stage;
    if (v0_low_ == 0) {
        complete_ = true;
        for (const auto& [key, e] : entries_) {
            if (!e.complete) {
                complete_ = false;
                break;
            }
        }
    }
}

DelaySolver::DelaySolver(const ValidatedProblem& problem, const TimeGrid& tg,
                         const SpaceGrid& sg, SolveOptions options)
    : problem_(problem),
      tg_(tg),
      sg_(sg),
      options_(options),
      stepper_(problem, tg, sg),
      configs_(build_config_set(tg, problem.impulse_count())) {
    telemetry_.num_stages = tg_.num_stages();
    telemetry_.cfl_ratio = stepper_.cfl_ratio();
}

ValueStore DelaySolver::init_stage() const {
    ValueStore store(tg_, sg_, problem_.spec().impulses.values);

    // no-impulse Feynman-Kac field over [0, T]: terminal g, source f
    ValueField terminal;
    terminal.time_node = tg_.num_steps;
    terminal.values.resize(sg_.size());
    std::vector<double> x(sg_.dim());
    for (std::size_t i = 0; i < terminal.values.size(); ++i) {
        sg_.node(i, x);
        terminal.values[i] = problem_.terminal_profit(x);
    }
    auto stack = feynman_kac_solve(stepper_, std::move(terminal), 0);
    std::vector<std::vector<double>> fields(stack.size());
    for (std::size_t j = 0; j < stack.size(); ++j) fields[j] = std::move(stack[j].values);
    store.set_no_impulse(std::move(fields));

    // v0 = F0 = no-impulse value on (T - m*h, T]
    const int lo = tg_.num_steps - tg_.delay_steps + 1;
    std::vector<std::vector<double>> v0_fields;
    v0_fields.reserve(tg_.num_steps - lo + 1);
    for (int j = lo; j <= tg_.num_steps; ++j) {
        v0_fields.push_back(std::vector<double>(store.no_impulse(j).begin(),
                                                store.no_impulse(j).end()));
    }
    store.assign_v0_range(lo, tg_.num_steps, std::move(v0_fields));
    store.finalize(tg_.multiplier());
    return store;
}

ValueField DelaySolver::execution_boundary(const ValueStore& store,
                                           const PendingConfig& p) const {
    const int terminal_node = p.first_node() + tg_.delay_steps;
    const PendingConfig p_minus = p.drop_first();
    const auto prev = store.field(p_minus.count(), p_minus, terminal_node);
    ValueField prev_field;
    prev_field.time_node = terminal_node;
    prev_field.values.assign(prev.begin(), prev.end());
    return apply_execution_boundary(problem_, sg_, prev_field, p.impulse_indices.front(),
                                    &clamp_stats_);
}

ObstacleField DelaySolver::obstacle_field(const ValueStore& store, int k,
                                          const PendingConfig& p, int lo, int hi) const {
    ObstacleField obstacle;
    obstacle.lo = lo;
    obstacle.values.resize(hi - lo + 1);
    const int ecount = problem_.impulse_count();
    for (int j = lo; j <= hi; ++j) {
        auto& slot = obstacle.values[j - lo];
        for (int e = 0; e < ecount; ++e) {
            const auto cand = store.field(k + 1, p.append(j, e), j);
            if (e == 0) {
                slot.assign(cand.begin(), cand.end());
            } else {
                for (std::size_t i = 0; i < slot.size(); ++i) {
                    if (cand[i] > slot[i]) slot[i] = cand[i];
                }
            }
        }
    }
    return obstacle;
}

void DelaySolver::compute_config(const ValueStore& store, int k, const PendingConfig& p,
                                 ValueStore::Entry& entry) const {
    const DomainPartition dp = partition_domain(p, tg_);
    ValueField g = execution_boundary(store, p);

    std::vector<ValueField> tail;
    if (!dp.second_empty()) {
        const ObstacleField obstacle =
            obstacle_field(store, k, p, dp.second_lo, dp.second_hi - 1);
        tail = optimal_stopping_solve(stepper_, obstacle, std::move(g), dp.second_lo);
    } else {
        tail.push_back(std::move(g));
    }

    // T_p^1 with terminal at min(t_k + h, t1 + m*h)
    std::vector<ValueField> head = feynman_kac_solve(stepper_, tail.front(), dp.first_lo);

    for (int j = dp.first_lo; j <= dp.first_hi; ++j) {
        entry.fields[j - entry.lo] = std::move(head[j - dp.first_lo].values);
    }
    for (int j = dp.first_hi + 1; j <= dp.terminal; ++j) {
        entry.fields[j - entry.lo] = std::move(tail[j - dp.second_lo].values);
    }
    entry.complete = true;
}

void DelaySolver::advance_stage(ValueStore& store, int n) const {
    const auto t0 = std::chrono::steady_clock::now();
    const int m = tg_.multiplier();
    const int next_stage = n + 1;
    std::size_t stage_configs = 0;

    for (int k = m; k >= 1; --k) {
        const auto& fresh = configs_.fresh[k][next_stage - m - 1];
        stage_configs += fresh.size();
        std::vector<ValueStore::Entry*> slots;
        slots.reserve(fresh.size());
        for (const auto& p : fresh) {
            const DomainPartition dp = partition_domain(p, tg_);
            slots.push_back(&store.create_entry(p, dp.first_lo, dp.terminal, next_stage));
        }
        parallel_for(fresh.size(), options_.threads, [&](std::size_t i) {
            compute_config(store, k, fresh[i], *slots[i]);
        });
    }

    // k = 0: extend v0 over the newly exposed window (T-(n+1)h, T-nh]
    const int j_hi = store.v0_low() - 1;
    const int j_lo = std::max(0, tg_.num_steps - next_stage * tg_.lag_steps + 1);
    if (j_lo <= j_hi) {
        const ObstacleField obstacle = obstacle_field(store, 0, PendingConfig{}, j_lo, j_hi);
        ValueField terminal;
        terminal.time_node = j_hi + 1;
        const auto known = store.v0(j_hi + 1);
        terminal.values.assign(known.begin(), known.end());
        auto stack = optimal_stopping_solve(stepper_, obstacle, std::move(terminal), j_lo);
        std::vector<std::vector<double>> fields(j_hi - j_lo + 1);
        for (int j = j_lo; j <= j_hi; ++j) fields[j - j_lo] = std::move(stack[j - j_lo].values);
        store.assign_v0_range(j_lo, j_hi, std::move(fields));
    }

    store.finalize(next_stage);
    const auto t1 = std::chrono::steady_clock::now();
    telemetry_.stages.push_back(
        {next_stage, std::chrono::duration<double>(t1 - t0).count(), stage_configs});
}

ValueStore DelaySolver::run() {
    telemetry_.stages.clear();
    telemetry_.config_counts.assign(tg_.multiplier() + 1, 0);
    for (int k = 1; k <= tg_.multiplier(); ++k) {
        telemetry_.config_counts[k] = configs_.interior_count(k);
    }

    ValueStore store = init_stage();
    const int big_n = tg_.num_stages();
    for (int n = tg_.multiplier(); n < big_n; ++n) {
        advance_stage(store, n);
    }
    telemetry_.clamp_events = clamp_stats_.count();
    return store;
}

ValueStore solve(const ValidatedProblem& problem, const TimeGrid& tg, const SpaceGrid& sg,
                 SolveOptions options, SolveTelemetry* telemetry) {
    DelaySolver solver(problem, tg, sg, options);
    ValueStore store = solver.run();
    if (telemetry) *telemetry = solver.telemetry();
    return store;
}

} // namespace dimpulse
