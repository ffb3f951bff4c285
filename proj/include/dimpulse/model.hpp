#ifndef DIMPULSE_MODEL_HPP
#define DIMPULSE_MODEL_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dimpulse/errors.hpp"

namespace dimpulse {

/// Per-component diffusion family. Noise is diagonal: component d is driven
/// by its own Brownian motion with coefficient sigma_d(x_d).
enum class DynamicsFamily { arithmetic_bm, geometric_bm, ornstein_uhlenbeck };

struct DynamicsComponent {
    DynamicsFamily family = DynamicsFamily::arithmetic_bm;
    double mu = 0.0;     // drift coefficient (abm: b=mu, gbm: b=mu*x)
    double sigma = 0.0;  // volatility coefficient (abm/ou: s=sigma, gbm: s=sigma*x)
    double kappa = 0.0;  // ou reversion speed (b = kappa*(theta - x))
    double theta = 0.0;  // ou long-run level
};

struct DynamicsSpec {
    std::vector<DynamicsComponent> components;
    int dim() const { return static_cast<int>(components.size()); }
};

/// Scalar reward families for f (running profit) and g (terminal profit).
enum class ScalarFamily { constant, affine, call, put, polynomial, shortfall };

struct ScalarSpec {
    ScalarFamily family = ScalarFamily::constant;
    double value = 0.0;          // constant
    std::vector<double> coeffs;  // affine: a0 + sum a_i x_i ; polynomial: sum c_j x_axis^j
    int axis = 0;                // call/put/polynomial coordinate
    double strike = 0.0;         // call/put strike; shortfall claim strike
    bool claim_is_put = true;    // shortfall claim type
};

/// Executed-cost families for c(x, e).
enum class CostFamily { constant, affine, scaled_call, scaled_put, table };

struct CostSpec {
    CostFamily family = CostFamily::constant;
    double value = 0.0;
    std::vector<double> coeffs;  // affine in x
    int axis = 0;
    double strike = 0.0;         // scaled_call: e0*(x_axis-K)+ ; scaled_put: e0*(K-x_axis)+
    std::vector<double> table;   // per-impulse constant, one entry per element of E
};

/// Impulse map families for Gamma(x, e).
enum class ImpulseMapFamily { identity, translate, set_component, financial };

struct ImpulseMapSpec {
    ImpulseMapFamily family = ImpulseMapFamily::identity;
    int axis = 0;  // translate: x_axis += e0 ; set_component: x_axis = e0
};

struct RewardSpec {
    ScalarSpec running_profit;   // f
    ScalarSpec terminal_profit;  // g
    CostSpec execution_cost;     // c
    ImpulseMapSpec impulse_map;  // Gamma
};

struct DelayParams {
    double horizon = 1.0;  // T
    double lag = 0.25;     // h, minimum spacing between decisions
    int multiplier = 1;    // m, execution happens m*h after the decision
};

/// Finite ordered impulse set E; each value lives in R^q, q <= 2.
struct ImpulseSet {
    std::vector<std::vector<double>> values;
    int size() const { return static_cast<int>(values.size()); }
    int arity() const { return values.empty() ? 0 : static_cast<int>(values.front().size()); }
};

struct ProblemSpec {
    DynamicsSpec dynamics;
    RewardSpec rewards;
    DelayParams delay;
    ImpulseSet impulses;
    std::vector<double> initial_state;
};

struct Violation {
    std::string field;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

/// Collects every invariant violation (empty report means the problem is valid).
ValidationReport check_problem(const ProblemSpec& spec);

/// Immutable validated problem; safe to share across threads.
class ValidatedProblem {
public:
    const ProblemSpec& spec() const { return spec_; }
    int dim() const { return spec_.dynamics.dim(); }
    int impulse_count() const { return spec_.impulses.size(); }

    /// b(x) and the diagonal of sigma(x), one entry per component.
    void drift_and_vol(std::span<const double> x, std::span<double> drift,
                       std::span<double> vol) const;

    double running_profit(std::span<const double> x) const;   // f(x)
    double terminal_profit(std::span<const double> x) const;  // g(x)
    double execution_cost(std::span<const double> x, int impulse_index) const;  // c(x,e)
    void apply_impulse(std::span<const double> x, int impulse_index,
                       std::span<double> out) const;  // Gamma(x,e)

    std::span<const double> impulse_value(int impulse_index) const;
    /// Exact-match lookup of e in E; throws impulse_not_in_set.
    int impulse_index_of(std::span<const double> e) const;

    /// C with |f|+|g|+|c| <= C(1+|x|_inf) and |Gamma|_inf <= C(1+|x|_inf)
    /// for all x in the box [lo, hi] and all e in E, derived from the family
    /// coefficients (polynomial/shortfall additionally use the box bounds).
    double growth_constant(std::span<const double> lo, std::span<const double> hi) const;

private:
    friend ValidatedProblem validate_problem(const ProblemSpec&);
    explicit ValidatedProblem(ProblemSpec spec) : spec_(std::move(spec)) {}
    ProblemSpec spec_;
};

/// Throws Error(validation_failed) carrying the full violation list.
ValidatedProblem validate_problem(const ProblemSpec& spec);

/// (b(x), diag sigma(x)) as vectors; throws dimension_mismatch.
std::pair<std::vector<double>, std::vector<double>>
eval_dynamics(const ValidatedProblem& problem, std::span<const double> x);

struct RewardEval {
    double running_profit;               // f(x)
    double terminal_profit;              // g(x)
    double execution_cost;               // c(x,e)
    std::vector<double> post_impulse;    // Gamma(x,e)
};

/// Evaluates all four reward maps at (x, e); e must be an element of E.
RewardEval eval_rewards(const ValidatedProblem& problem, std::span<const double> x,
                        std::span<const double> e);

} // namespace dimpulse

#endif // DIMPULSE_MODEL_HPP
