#include "dimpulse/kernel.hpp"

#include <cmath>
#include <sstream>

namespace dimpulse {

double interpolate(const SpaceGrid& sg, std::span<const double> values,
                   std::span<const double> x, ClampStats* stats) {
    const int d = sg.dim();
    int cell[3];
    double w[3];
    bool clamped = false;
    for (int a = 0; a < d; ++a) {
        const auto& ax = sg.axes[a];
        const double u = (x[a] - ax.lo) / ax.dx();
        if (u < 0.0 || u > static_cast<double>(ax.n - 1)) clamped = true;
        double c = std::floor(u);
        if (c < 0.0) c = 0.0;
        if (c > static_cast<double>(ax.n - 2)) c = static_cast<double>(ax.n - 2);
        cell[a] = static_cast<int>(c);
        w[a] = u - c;
        if (w[a] < 0.0) w[a] = 0.0;
        if (w[a] > 1.0) w[a] = 1.0;
    }
    if (clamped && stats) stats->record();

    double r = 0.0;
    const int corners = 1 << d;
    int idx[3];
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        for (int a = 0; a < d; ++a) {
            const bool upper = (c >> a) & 1;
            idx[a] = cell[a] + (upper ? 1 : 0);
            weight *= upper ? w[a] : (1.0 - w[a]);
        }
        if (weight != 0.0) {
            r += weight * values[sg.flat(std::span<const int>(idx, d))];
        }
    }
    return r;
}

Stepper::Stepper(const ValidatedProblem& problem, const TimeGrid& tg, const SpaceGrid& sg)
    : tg_(tg), sg_(sg), total_(sg.size()), dim_(sg.dim()) {
    up_.assign(total_ * dim_, 0.0);
    down_.assign(total_ * dim_, 0.0);
    center_.assign(total_ * dim_, 0.0);
    center_total_.assign(total_, 1.0);
    source_.assign(total_, 0.0);

    const double dt = tg_.dt;
    std::vector<double> xbuf(dim_), b(dim_), s(dim_);
    std::vector<int> idx(dim_);
    double worst = 0.0;
    std::size_t worst_node = 0;
    int worst_axis = 0;

    for (std::size_t i = 0; i < total_; ++i) {
        sg_.unflat(i, idx);
        sg_.node(i, xbuf);
        problem.drift_and_vol(xbuf, b, s);
        source_[i] = dt * problem.running_profit(xbuf);
        for (int a = 0; a < dim_; ++a) {
            const double dx = sg_.axes[a].dx();
            const double ratio = dt * (s[a] * s[a] / (dx * dx) + std::abs(b[a]) / dx);
            if (ratio > worst) {
                worst = ratio;
                worst_node = i;
                worst_axis = a;
            }
            const std::size_t at = i * dim_ + a;
            if (idx[a] == 0) {
                // boundary: zero second derivative, one-sided first derivative
                up_[at] = dt * b[a] / dx;
                down_[at] = 0.0;
                center_[at] = -dt * b[a] / dx;
            } else if (idx[a] == sg_.axes[a].n - 1) {
                up_[at] = 0.0;
                down_[at] = -dt * b[a] / dx;
                center_[at] = dt * b[a] / dx;
            } else {
                const double diff = dt * 0.5 * s[a] * s[a] / (dx * dx);
                const double adv = dt * 0.5 * b[a] / dx;
                up_[at] = diff + adv;
                down_[at] = diff - adv;
                center_[at] = -2.0 * diff;
            }
            center_total_[i] += center_[at];
        }
    }
    cfl_ratio_ = worst;
    if (worst > 0.5 * (1.0 + 1e-12)) {
        sg_.node(worst_node, xbuf);
        std::ostringstream os;
        os << "dt*(sigma^2/dx^2 + |b|/dx) = " << worst << " > 0.5 on axis " << worst_axis
           << " at x = (";
        for (int a = 0; a < dim_; ++a) os << (a ? "," : "") << xbuf[a];
        os << "); reduce dt or coarsen the grid";
        throw Error(Errc::cfl_violation, os.str());
    }
}

bool Stepper::all_weights_nonnegative() const {
    for (double w : center_total_) {
        if (w < 0.0) return false;
    }
    for (std::size_t i = 0; i < up_.size(); ++i) {
        if (up_[i] < 0.0 || down_[i] < 0.0) return false;
    }
    return true;
}

void Stepper::step(std::span<const double> next, std::span<double> out) const {
    // Pure weighted-sum form: every weight is nonnegative under the CFL
    // bound (away from drift-dominated boundaries), which keeps the step
    // monotone down to the last ulp.
    double probe = 0.0;
    std::vector<int> idx(dim_);
    for (std::size_t i = 0; i < total_; ++i) {
        sg_.unflat(i, idx);
        double acc = center_total_[i] * next[i];
        for (int a = 0; a < dim_; ++a) {
            const std::size_t at = i * dim_ + a;
            const std::size_t s = sg_.stride(a);
            if (idx[a] + 1 < sg_.axes[a].n) acc += up_[at] * next[i + s];
            if (idx[a] > 0) acc += down_[at] * next[i - s];
        }
        acc += source_[i];
        out[i] = acc;
        probe += acc;
    }
    if (!std::isfinite(probe)) {
        for (std::size_t i = 0; i < total_; ++i) {
            if (!std::isfinite(out[i])) {
                throw Error(Errc::numerical_failure,
                            "non-finite value at space node " + std::to_string(i));
            }
        }
        throw Error(Errc::numerical_failure, "non-finite field after backward step");
    }
}

ValueField Stepper::backward_step(const ValueField& next) const {
    ValueField out;
    out.time_node = next.time_node - 1;
    out.values.resize(total_);
    step(next.values, out.values);
    return out;
}

void Stepper::generator(std::span<const double> field, std::span<double> out) const {
    std::vector<int> idx(dim_);
    for (std::size_t i = 0; i < total_; ++i) {
        sg_.unflat(i, idx);
        double acc = 0.0;
        for (int a = 0; a < dim_; ++a) {
            const std::size_t at = i * dim_ + a;
            const std::size_t s = sg_.stride(a);
            acc += center_[at] * field[i];
            if (idx[a] + 1 < sg_.axes[a].n) acc += up_[at] * field[i + s];
            if (idx[a] > 0) acc += down_[at] * field[i - s];
        }
        out[i] = acc / tg_.dt;
    }
}

std::vector<ValueField> feynman_kac_solve(const Stepper& stepper, ValueField terminal,
                                          int start_node) {
    const int end = terminal.time_node;
    if (start_node > end) {
        throw Error(Errc::invalid_argument, "feynman_kac_solve: start node after terminal");
    }
    std::vector<ValueField> stack(end - start_node + 1);
    stack.back() = std::move(terminal);
    for (int j = end - 1; j >= start_node; --j) {
        stack[j - start_node] = stepper.backward_step(stack[j - start_node + 1]);
    }
    return stack;
}

std::vector<ValueField> optimal_stopping_solve(const Stepper& stepper,
                                               const ObstacleField& obstacle,
                                               ValueField terminal, int start_node) {
    const int end = terminal.time_node;
    if (start_node > end) {
        throw Error(Errc::invalid_argument, "optimal_stopping_solve: start node after terminal");
    }
    if (start_node < end && (obstacle.lo > start_node || obstacle.hi() < end)) {
        throw Error(Errc::invalid_argument,
                    "optimal_stopping_solve: obstacle does not cover the interval");
    }
    std::vector<ValueField> stack(end - start_node + 1);
    stack.back() = std::move(terminal);
    for (int j = end - 1; j >= start_node; --j) {
        ValueField f = stepper.backward_step(stack[j - start_node + 1]);
        const auto barrier = obstacle.at(j);
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            if (barrier[i] > f.values[i]) f.values[i] = barrier[i];
        }
        stack[j - start_node] = std::move(f);
    }
    return stack;
}

ValueField apply_execution_boundary(const ValidatedProblem& problem, const SpaceGrid& sg,
                                    const ValueField& v_prev, int impulse_index,
                                    ClampStats* stats) {
    ValueField g;
    g.time_node = v_prev.time_node;
    g.values.resize(sg.size());
    const int d = sg.dim();
    std::vector<double> x(d), mapped(d);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        sg.node(i, x);
        problem.apply_impulse(x, impulse_index, mapped);
        g.values[i] = problem.execution_cost(x, impulse_index) +
                      interpolate(sg, v_prev.values, mapped, stats);
    }
    return g;
}

} // namespace dimpulse
