#include "dimpulse/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dimpulse {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::delay_exceeds_horizon: return "DelayExceedsHorizon";
        case Errc::empty_impulse_set: return "EmptyImpulseSet";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::impulse_not_in_set: return "ImpulseNotInSet";
        case Errc::validation_failed: return "ValidationFailed";
        case Errc::misaligned_grid: return "MisalignedGrid";
        case Errc::config_outside_interior: return "ConfigOutsideInterior";
        case Errc::cfl_violation: return "CFLViolation";
        case Errc::dependency_incomplete: return "DependencyIncomplete";
        case Errc::store_incomplete: return "StoreIncomplete";
        case Errc::instance_too_large: return "InstanceTooLarge";
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::parse_error: return "ParseError";
        case Errc::schema_violation: return "SchemaViolation";
        case Errc::version_mismatch: return "VersionMismatch";
        case Errc::checksum_failure: return "ChecksumFailure";
        case Errc::grid_mismatch: return "GridMismatch";
        case Errc::numerical_failure: return "NumericalFailure";
        case Errc::io_failure: return "IoFailure";
    }
    return "UnknownError";
}

int Error::exit_code() const {
    switch (code_) {
        case Errc::cfl_violation:
        case Errc::numerical_failure:
            return 4;
        case Errc::dependency_incomplete:
        case Errc::store_incomplete:
            return 2;
        default:
            return 3;
    }
}

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << v.field << ": " << v.message << "\n";
    }
    return os.str();
}

namespace {

double eval_scalar(const ScalarSpec& s, std::span<const double> x) {
    switch (s.family) {
        case ScalarFamily::constant:
            return s.value;
        case ScalarFamily::affine: {
            double r = s.coeffs.empty() ? 0.0 : s.coeffs[0];
            for (std::size_t i = 1; i < s.coeffs.size() && i <= x.size(); ++i) {
                r += s.coeffs[i] * x[i - 1];
            }
            return r;
        }
        case ScalarFamily::call:
            return std::max(x[s.axis] - s.strike, 0.0);
        case ScalarFamily::put:
            return std::max(s.strike - x[s.axis], 0.0);
        case ScalarFamily::polynomial: {
            double r = 0.0;
            const double xi = x[s.axis];
            for (std::size_t j = s.coeffs.size(); j-- > 0;) {
                r = r * xi + s.coeffs[j];
            }
            return r;
        }
        case ScalarFamily::shortfall: {
            // x = (s, y, z); wealth L = z + y*s; claim H(s); value = -(H - L)+
            const double claim = s.claim_is_put ? std::max(s.strike - x[0], 0.0)
                                                : std::max(x[0] - s.strike, 0.0);
            const double wealth = x[2] + x[1] * x[0];
            return -std::max(claim - wealth, 0.0);
        }
    }
    return 0.0;
}

bool scalar_needs_axis(ScalarFamily f) {
    return f == ScalarFamily::call || f == ScalarFamily::put ||
           f == ScalarFamily::polynomial;
}

} // namespace

ValidationReport check_problem(const ProblemSpec& spec) {
    ValidationReport report;
    auto fail = [&](const std::string& field, const std::string& msg) {
        report.violations.push_back({field, msg});
    };

    const int d = spec.dynamics.dim();
    if (d < 1 || d > 3) {
        fail("dynamics", "state dimension must be between 1 and 3, got " + std::to_string(d));
    }
    for (int i = 0; i < d; ++i) {
        if (spec.dynamics.components[i].sigma < 0.0) {
            fail("dynamics[" + std::to_string(i) + "].sigma", "volatility must be >= 0");
        }
    }

    const auto& delay = spec.delay;
    if (!(delay.lag > 0.0)) {
        fail("delay.h", "decision lag must be > 0");
    }
    if (delay.multiplier < 1) {
        fail("delay.m", "delay multiplier must be >= 1");
    }
    if (delay.lag > 0.0 && delay.multiplier >= 1 &&
        delay.horizon < delay.multiplier * delay.lag) {
        fail("delay", "DelayExceedsHorizon: T < m*h (T=" + std::to_string(delay.horizon) +
                          ", m*h=" + std::to_string(delay.multiplier * delay.lag) + ")");
    }

    if (spec.impulses.size() == 0) {
        fail("impulses", "EmptyImpulseSet: impulse set must be nonempty");
    }
    const int arity = spec.impulses.arity();
    if (arity > 2) {
        fail("impulses", "impulse values must live in R^q with q <= 2");
    }
    for (int i = 0; i < spec.impulses.size(); ++i) {
        if (static_cast<int>(spec.impulses.values[i].size()) != arity) {
            fail("impulses[" + std::to_string(i) + "]", "inconsistent impulse arity");
        }
        for (int j = 0; j < i; ++j) {
            if (spec.impulses.values[i] == spec.impulses.values[j]) {
                fail("impulses[" + std::to_string(i) + "]", "duplicate impulse value");
            }
        }
    }

    if (static_cast<int>(spec.initial_state.size()) != d) {
        fail("initial_state", "DimensionMismatch: expected " + std::to_string(d) +
                                  " components, got " + std::to_string(spec.initial_state.size()));
    }

    auto check_scalar = [&](const ScalarSpec& s, const std::string& name) {
        if (scalar_needs_axis(s.family) && (s.axis < 0 || s.axis >= d)) {
            fail(name + ".axis", "DimensionMismatch: axis out of range");
        }
        if (s.family == ScalarFamily::shortfall && d != 3) {
            fail(name, "DimensionMismatch: shortfall family requires d=3 (s,y,z)");
        }
        if (s.family == ScalarFamily::affine &&
            static_cast<int>(s.coeffs.size()) > d + 1) {
            fail(name + ".coeffs", "DimensionMismatch: affine family takes at most d+1 coefficients");
        }
    };
    check_scalar(spec.rewards.running_profit, "rewards.f");
    check_scalar(spec.rewards.terminal_profit, "rewards.g");

    const auto& c = spec.rewards.execution_cost;
    if ((c.family == CostFamily::scaled_call || c.family == CostFamily::scaled_put) &&
        (c.axis < 0 || c.axis >= d)) {
        fail("rewards.c.axis", "DimensionMismatch: axis out of range");
    }
    if (c.family == CostFamily::affine && static_cast<int>(c.coeffs.size()) > d + 1) {
        fail("rewards.c.coeffs", "DimensionMismatch: affine family takes at most d+1 coefficients");
    }
    if (c.family == CostFamily::table &&
        static_cast<int>(c.table.size()) != spec.impulses.size()) {
        fail("rewards.c.table", "table must have one entry per impulse value");
    }

    const auto& gamma = spec.rewards.impulse_map;
    if ((gamma.family == ImpulseMapFamily::translate ||
         gamma.family == ImpulseMapFamily::set_component) &&
        (gamma.axis < 0 || gamma.axis >= d)) {
        fail("rewards.gamma.axis", "DimensionMismatch: axis out of range");
    }
    if (gamma.family == ImpulseMapFamily::financial && d != 3) {
        fail("rewards.gamma", "DimensionMismatch: financial map requires d=3 (s,y,z)");
    }
    if (gamma.family != ImpulseMapFamily::identity && arity < 1 &&
        spec.impulses.size() > 0) {
        fail("rewards.gamma", "impulse map reads e[0] but impulses are empty tuples");
    }

    return report;
}

ValidatedProblem validate_problem(const ProblemSpec& spec) {
    ValidationReport report = check_problem(spec);
    if (!report.ok()) {
        throw Error(Errc::validation_failed, "\n" + report.to_string());
    }
    return ValidatedProblem(spec);
}

void ValidatedProblem::drift_and_vol(std::span<const double> x, std::span<double> drift,
                                     std::span<double> vol) const {
    const int d = dim();
    if (static_cast<int>(x.size()) != d) {
        throw Error(Errc::dimension_mismatch,
                    "state has " + std::to_string(x.size()) + " components, expected " +
                        std::to_string(d));
    }
    for (int i = 0; i < d; ++i) {
        const auto& comp = spec_.dynamics.components[i];
        switch (comp.family) {
            case DynamicsFamily::arithmetic_bm:
                drift[i] = comp.mu;
                vol[i] = comp.sigma;
                break;
            case DynamicsFamily::geometric_bm:
                drift[i] = comp.mu * x[i];
                vol[i] = comp.sigma * x[i];
                break;
            case DynamicsFamily::ornstein_uhlenbeck:
                drift[i] = comp.kappa * (comp.theta - x[i]);
                vol[i] = comp.sigma;
                break;
        }
    }
}

double ValidatedProblem::running_profit(std::span<const double> x) const {
    return eval_scalar(spec_.rewards.running_profit, x);
}

double ValidatedProblem::terminal_profit(std::span<const double> x) const {
    return eval_scalar(spec_.rewards.terminal_profit, x);
}

double ValidatedProblem::execution_cost(std::span<const double> x, int impulse_index) const {
    const auto& c = spec_.rewards.execution_cost;
    const auto& e = spec_.impulses.values[impulse_index];
    switch (c.family) {
        case CostFamily::constant:
            return c.value;
        case CostFamily::affine: {
            double r = c.coeffs.empty() ? 0.0 : c.coeffs[0];
            for (std::size_t i = 1; i < c.coeffs.size() && i <= x.size(); ++i) {
                r += c.coeffs[i] * x[i - 1];
            }
            return r;
        }
        case CostFamily::scaled_call:
            return e[0] * std::max(x[c.axis] - c.strike, 0.0);
        case CostFamily::scaled_put:
            return e[0] * std::max(c.strike - x[c.axis], 0.0);
        case CostFamily::table:
            return c.table[impulse_index];
    }
    return 0.0;
}

void ValidatedProblem::apply_impulse(std::span<const double> x, int impulse_index,
                                     std::span<double> out) const {
    const auto& gamma = spec_.rewards.impulse_map;
    const auto& e = spec_.impulses.values[impulse_index];
    const int d = dim();
    for (int i = 0; i < d; ++i) out[i] = x[i];
    switch (gamma.family) {
        case ImpulseMapFamily::identity:
            break;
        case ImpulseMapFamily::translate:
            out[gamma.axis] += e[0];
            break;
        case ImpulseMapFamily::set_component:
            out[gamma.axis] = e[0];
            break;
        case ImpulseMapFamily::financial:
            // (s, y, z) -> (s, e0, z - e0*s)
            out[1] = e[0];
            out[2] = x[2] - e[0] * x[0];
            break;
    }
}

std::span<const double> ValidatedProblem::impulse_value(int impulse_index) const {
    return spec_.impulses.values[impulse_index];
}

int ValidatedProblem::impulse_index_of(std::span<const double> e) const {
    for (int i = 0; i < impulse_count(); ++i) {
        const auto& v = spec_.impulses.values[i];
        if (v.size() == e.size() && std::equal(v.begin(), v.end(), e.begin())) {
            return i;
        }
    }
    throw Error(Errc::impulse_not_in_set, "impulse value is not an element of E");
}

namespace {

double box_abs_bound(std::span<const double> lo, std::span<const double> hi, int axis) {
    return std::max(std::abs(lo[axis]), std::abs(hi[axis]));
}

double scalar_growth(const ScalarSpec& s, std::span<const double> lo,
                     std::span<const double> hi) {
    switch (s.family) {
        case ScalarFamily::constant:
            return std::abs(s.value);
        case ScalarFamily::affine: {
            double c = 0.0;
            for (double a : s.coeffs) c += std::abs(a);
            return c;
        }
        case ScalarFamily::call:
        case ScalarFamily::put:
            return 1.0 + std::abs(s.strike);
        case ScalarFamily::polynomial: {
            // |sum c_j x^j| <= |c_0| + sum_{j>=1} |c_j| B^{j-1} |x| on |x| <= B
            const double b = std::max(1.0, box_abs_bound(lo, hi, s.axis));
            double c = 0.0;
            double pw = 1.0;
            for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
                c += std::abs(s.coeffs[j]) * pw;
                if (j >= 1) pw *= b;
            }
            return c;
        }
        case ScalarFamily::shortfall: {
            const double ybound = std::max(1.0, box_abs_bound(lo, hi, 1));
            return (1.0 + std::abs(s.strike)) + 1.0 + ybound;
        }
    }
    return 0.0;
}

} // namespace

double ValidatedProblem::growth_constant(std::span<const double> lo,
                                         std::span<const double> hi) const {
    double e_max = 0.0;
    for (const auto& v : spec_.impulses.values) {
        for (double ev : v) e_max = std::max(e_max, std::abs(ev));
    }

    double c = scalar_growth(spec_.rewards.running_profit, lo, hi) +
               scalar_growth(spec_.rewards.terminal_profit, lo, hi);

    const auto& cost = spec_.rewards.execution_cost;
    switch (cost.family) {
        case CostFamily::constant:
            c += std::abs(cost.value);
            break;
        case CostFamily::affine:
            for (double a : cost.coeffs) c += std::abs(a);
            break;
        case CostFamily::scaled_call:
        case CostFamily::scaled_put:
            c += e_max * (1.0 + std::abs(cost.strike));
            break;
        case CostFamily::table: {
            double t_max = 0.0;
            for (double t : cost.table) t_max = std::max(t_max, std::abs(t));
            c += t_max;
            break;
        }
    }

    double gamma_c = 1.0;
    switch (spec_.rewards.impulse_map.family) {
        case ImpulseMapFamily::identity:
            gamma_c = 1.0;
            break;
        case ImpulseMapFamily::translate:
        case ImpulseMapFamily::set_component:
            gamma_c = 1.0 + e_max;
            break;
        case ImpulseMapFamily::financial:
            gamma_c = 1.0 + 2.0 * e_max;
            break;
    }
    return std::max(c, gamma_c);
}

std::pair<std::vector<double>, std::vector<double>>
eval_dynamics(const ValidatedProblem& problem, std::span<const double> x) {
    std::vector<double> drift(problem.dim()), vol(problem.dim());
    problem.drift_and_vol(x, drift, vol);
    return {std::move(drift), std::move(vol)};
}

RewardEval eval_rewards(const ValidatedProblem& problem, std::span<const double> x,
                        std::span<const double> e) {
    if (static_cast<int>(x.size()) != problem.dim()) {
        throw Error(Errc::dimension_mismatch, "state dimension mismatch in eval_rewards");
    }
    const int idx = problem.impulse_index_of(e);
    RewardEval out;
    out.running_profit = problem.running_profit(x);
    out.terminal_profit = problem.terminal_profit(x);
    out.execution_cost = problem.execution_cost(x, idx);
    out.post_impulse.resize(problem.dim());
    problem.apply_impulse(x, idx, out.post_impulse);
    return out;
}

} // namespace dimpulse
