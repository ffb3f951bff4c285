#ifndef DIMPULSE_KERNEL_HPP
#define DIMPULSE_KERNEL_HPP

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "dimpulse/lattice.hpp"
#include "dimpulse/model.hpp"

namespace dimpulse {

/// One time slice of a value function over the space grid.
struct ValueField {
    int time_node = 0;
    std::vector<double> values;
};

/// Telemetry for off-grid impulse images clamped to the grid boundary.
class ClampStats {
public:
    void record() { clamped_.fetch_add(1, std::memory_order_relaxed); }
    std::uint64_t count() const { return clamped_.load(std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> clamped_{0};
};

/// Multilinear interpolation over the tensor cell containing x, clamped to
/// the grid bounds (a clamp is recorded, never an error).
double interpolate(const SpaceGrid& sg, std::span<const double> values,
                   std::span<const double> x, ClampStats* stats = nullptr);

/// Obstacle values per time node over [lo, lo + values.size()).
struct ObstacleField {
    int lo = 0;
    std::vector<std::vector<double>> values;

    int hi() const { return lo + static_cast<int>(values.size()); }  // exclusive
    std::span<const double> at(int j) const { return values[j - lo]; }
};

/// Explicit one-step backward operator for -dv/dt - Lv - f = 0 with
/// central differences inside and one-sided first derivatives plus zero
/// second derivative on the space boundary. Construction enforces the
/// stability condition dt*(sigma^2/dx^2 + |b|/dx) <= 1/2 per axis.
class Stepper {
public:
    Stepper(const ValidatedProblem& problem, const TimeGrid& tg, const SpaceGrid& sg);

    const TimeGrid& time() const { return tg_; }
    const SpaceGrid& space() const { return sg_; }
    double cfl_ratio() const { return cfl_ratio_; }

    /// True when every stencil weight is nonnegative (the step is then
    /// monotone to the last ulp). Drift-dominated rows can break this.
    bool all_weights_nonnegative() const;

    /// out = next + dt*L_disc(next) + dt*f; throws numerical_failure on NaN/Inf.
    void step(std::span<const double> next, std::span<double> out) const;
    ValueField backward_step(const ValueField& next) const;

    /// L_disc applied to an arbitrary field (test/validation hook).
    void generator(std::span<const double> field, std::span<double> out) const;

    std::span<const double> source() const { return source_; }  // dt*f per node

private:
    TimeGrid tg_;
    SpaceGrid sg_;
    std::size_t total_;
    int dim_;
    // stencil weights per (node, axis), dt-scaled
    std::vector<double> up_, down_, center_;
    std::vector<double> center_total_;  // 1 + sum_axis center, per node
    std::vector<double> source_;
    double cfl_ratio_ = 0.0;
};

/// Iterated backward steps from the terminal field down to start_node.
/// Returns fields for every node in [start_node, terminal.time_node],
/// ascending; the last element is the terminal itself.
std::vector<ValueField> feynman_kac_solve(const Stepper& stepper, ValueField terminal,
                                          int start_node);

/// Obstacle (optimal stopping) solve: v_j = max(step(v_{j+1}), F_j) pointwise
/// for j < terminal.time_node; the terminal node keeps the terminal data
/// (the obstacle is not applied there). The obstacle must cover every
/// computed node [start_node, terminal.time_node).
std::vector<ValueField> optimal_stopping_solve(const Stepper& stepper,
                                               const ObstacleField& obstacle,
                                               ValueField terminal, int start_node);

/// Execution-boundary map G(x) = c(x, e1) + v_prev(Gamma(x, e1)) where
/// v_prev is the (k-1, p_-) field at t1 + m*h. Off-grid images clamp.
ValueField apply_execution_boundary(const ValidatedProblem& problem, const SpaceGrid& sg,
                                    const ValueField& v_prev, int impulse_index,
                                    ClampStats* stats = nullptr);

} // namespace dimpulse

#endif // DIMPULSE_KERNEL_HPP
