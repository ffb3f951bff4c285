#ifndef DIMPULSE_SOLVER_HPP
#define DIMPULSE_SOLVER_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dimpulse/kernel.hpp"
#include "dimpulse/lattice.hpp"
#include "dimpulse/model.hpp"

namespace dimpulse {

/// All computed value-function fields of one solve.
///
/// Interior configurations own a stack over [t_k, t1+mh]; the entry at the
/// terminal node t1+mh stores the left limit c(x,e1) + v_{k-1}(t1+mh,
/// Gamma(x,e1), p_-), never g. Never-executed configurations resolve to the
/// shared no-impulse field; k = 0 resolves to the v0 stack over [0, T].
/// Entries are write-once: stage n+1 never mutates stage <= n data.
class ValueStore {
public:
    struct Entry {
        PendingConfig config;
        int lo = 0;          // first time node of the stack (t_k)
        int hi = 0;          // last time node (t1 + m*lag), inclusive
        int stage_written = 0;
        bool complete = false;
        std::vector<std::vector<double>> fields;  // fields[j - lo]
    };

    ValueStore(TimeGrid tg, SpaceGrid sg, std::vector<std::vector<double>> impulses);

    const TimeGrid& time_grid() const { return tg_; }
    const SpaceGrid& space_grid() const { return sg_; }
    const std::vector<std::vector<double>>& impulses() const { return impulses_; }
    int max_pending() const { return tg_.multiplier(); }

    /// v_k(t_j, ., p); dispatches to the no-impulse field for never-executed
    /// p and to the v0 stack for k = 0. Throws dependency_incomplete when
    /// the requested data has not been finalized yet.
    std::span<const double> field(int k, const PendingConfig& p, int j) const;

    std::span<const double> no_impulse(int j) const { return no_impulse_[j]; }
    std::span<const double> v0(int j) const;
    int v0_low() const { return v0_low_; }

    bool complete() const { return complete_; }
    int stage() const { return stage_; }
    std::uint64_t problem_hash() const { return problem_hash_; }
    void set_problem_hash(std::uint64_t h) { problem_hash_ = h; }

    /// Deterministically ordered (by key) interior entries.
    const std::map<std::string, Entry>& entries() const { return entries_; }

    // --- write surface (solver / store loader) ---
    void set_no_impulse(std::vector<std::vector<double>> fields);
    void assign_v0_range(int lo, int hi, std::vector<std::vector<double>> fields);
    Entry& create_entry(const PendingConfig& p, int lo, int hi, int stage);
    void finalize(int stage);

private:
    TimeGrid tg_;
    SpaceGrid sg_;
    std::vector<std::vector<double>> impulses_;
    std::vector<std::vector<double>> no_impulse_;  // [0..N_T]
    std::vector<std::vector<double>> v0_;          // [0..N_T], valid from v0_low_
    int v0_low_ = 0;
    std::map<std::string, Entry> entries_;
    int stage_ = 0;
    bool complete_ = false;
    std::uint64_t problem_hash_ = 0;
};

struct SolveOptions {
    int threads = 1;
};

struct StageTiming {
    int stage = 0;
    double seconds = 0.0;
    std::size_t configs = 0;
};

struct SolveTelemetry {
    int num_stages = 0;
    std::vector<std::size_t> config_counts;  // per k, interior configs computed
    std::vector<StageTiming> stages;
    std::uint64_t clamp_events = 0;
    double cfl_ratio = 0.0;
};

/// Orchestrates the staged computation: initialization at n = m, then
/// stages n -> n+1 processing k = m..1 followed by k = 0, exactly in the
/// dependency order of the backward/forward induction.
class DelaySolver {
public:
    DelaySolver(const ValidatedProblem& problem, const TimeGrid& tg, const SpaceGrid& sg,
                SolveOptions options = {});

    /// Full solve: init_stage, then advance_stage for n = m..N-1.
    ValueStore run();

    ValueStore init_stage() const;
    void advance_stage(ValueStore& store, int n) const;

    /// Pointwise max over e of v_{k+1}(t, ., p U (t, e)) for t in [lo, hi].
    ObstacleField obstacle_field(const ValueStore& store, int k, const PendingConfig& p,
                                 int lo, int hi) const;

    /// G_{k,p} = c(., e1) + v_{k-1}(t1+mh, Gamma(., e1), p_-).
    ValueField execution_boundary(const ValueStore& store, const PendingConfig& p) const;

    const SolveTelemetry& telemetry() const { return telemetry_; }
    const Stepper& stepper() const { return stepper_; }
    const ConfigSet& configs() const { return configs_; }

private:
    void compute_config(const ValueStore& store, int k, const PendingConfig& p,
                        ValueStore::Entry& entry) const;

    const ValidatedProblem& problem_;
    TimeGrid tg_;
    SpaceGrid sg_;
    SolveOptions options_;
    Stepper stepper_;
    ConfigSet configs_;
    mutable ClampStats clamp_stats_;
    mutable SolveTelemetry telemetry_;
};

/// One-call convenience wrapper.
ValueStore solve(const ValidatedProblem& problem, const TimeGrid& tg, const SpaceGrid& sg,
                 SolveOptions options = {}, SolveTelemetry* telemetry = nullptr);

} // namespace dimpulse

#endif // DIMPULSE_SOLVER_HPP
