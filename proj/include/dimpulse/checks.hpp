#ifndef DIMPULSE_CHECKS_HPP
#define DIMPULSE_CHECKS_HPP

#include <string>
#include <vector>

#include "dimpulse/policy.hpp"
#include "dimpulse/problem_io.hpp"
#include "dimpulse/solver.hpp"

namespace dimpulse {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CheckOptions {
    int threads = 1;
    std::uint64_t seed = 1;
    std::size_t mc_paths = 2000;
    std::size_t sim_paths = 8;
    double value_tolerance = 0.02;  // relative grid tolerance for MC bounds
};

/// Runs every invariant from the module contracts against a completed
/// store: model growth/purity, lattice partition and stage monotonicity,
/// kernel identities, solver boundary/dominance/residual checks, policy
/// admissibility and Monte Carlo bounds, and persistence round-trips.
std::vector<CheckResult> run_invariant_suite(const ProblemFile& file,
                                             const ValidatedProblem& problem,
                                             const TimeGrid& tg, const SpaceGrid& sg,
                                             const ValueStore& store,
                                             const CheckOptions& options = {});

/// Solver-vs-oracle disagreement, max over the v0(0, .) field.
/// Throws instance_too_large beyond the oracle caps.
double oracle_max_gap(const ValidatedProblem& problem, const TimeGrid& tg,
                      const SpaceGrid& sg, const ValueStore& store);

bool all_passed(const std::vector<CheckResult>& results);

} // namespace dimpulse

#endif // DIMPULSE_CHECKS_HPP
