#ifndef DIMPULSE_LATTICE_HPP
#define DIMPULSE_LATTICE_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dimpulse/model.hpp"

namespace dimpulse {

/// Uniform time grid with h and T exact integer multiples of dt.
struct TimeGrid {
    double dt = 0.0;
    int num_steps = 0;    // N_T, node times t_j = j*dt for j = 0..N_T
    int lag_steps = 0;    // L_h = h/dt
    int delay_steps = 0;  // m*L_h, nodes between a decision and its execution

    double time_of(int j) const { return j * dt; }
    int multiplier() const { return delay_steps / lag_steps; }
    /// N = min{n >= 1 : T - n*h < 0}; stages run n = m..N.
    int num_stages() const { return num_steps / lag_steps + 1; }
};

/// Tensor-product space grid, row-major flattening (axis 0 slowest).
struct SpaceGrid {
    struct Axis {
        double lo = 0.0;
        double hi = 1.0;
        int n = 3;
        double dx() const { return (hi - lo) / (n - 1); }
    };
    std::vector<Axis> axes;

    int dim() const { return static_cast<int>(axes.size()); }
    std::size_t size() const;
    std::size_t stride(int axis) const;
    double coord(int axis, int i) const { return axes[axis].lo + i * axes[axis].dx(); }
    std::size_t flat(std::span<const int> idx) const;
    void unflat(std::size_t flat_index, std::span<int> idx) const;
    void node(std::size_t flat_index, std::span<double> out) const;
};

struct GridRequest {
    double dt = 0.0;
    std::vector<double> x_min;
    std::vector<double> x_max;
    std::vector<int> nx;
};

/// Builds the h-aligned time grid and the tensor space grid.
/// Throws misaligned_grid when dt does not divide h and T.
std::pair<TimeGrid, SpaceGrid> build_grids(const DelayParams& delay,
                                           const GridRequest& request, int dim);

/// A discretized pending-order configuration p = (t_i, e_i)_{1<=i<=k}.
/// Decision times are stored as grid node indices, impulses as positions
/// into the problem's impulse list. k = 0 is the empty configuration.
struct PendingConfig {
    std::vector<int> decision_nodes;   // ascending
    std::vector<int> impulse_indices;  // parallel to decision_nodes

    int count() const { return static_cast<int>(decision_nodes.size()); }
    int first_node() const { return decision_nodes.front(); }
    int last_node() const { return decision_nodes.back(); }

    PendingConfig drop_first() const;  // p_-
    PendingConfig append(int node, int impulse_index) const;  // p U (t, e)

    /// Canonical persistence key "k|t1,...,tk|e1,...,ek" (grid indices).
    std::string key() const;

    bool operator==(const PendingConfig&) const = default;
};

/// Interior (Theta_k^m: t1 + m*h <= T) vs never-executed (Theta_k(m)).
enum class ConfigRegion { interior, never_executed };

/// k = 0 is interior by convention.
ConfigRegion classify_config(const PendingConfig& p, const TimeGrid& tg);

/// Time-domain partition of an interior configuration with k >= 1:
/// T_p = [t_k, t1+mh) split at t_k + h, plus the terminal node t1 + mh.
struct DomainPartition {
    int first_lo, first_hi;    // T_p^1 = [first_lo, first_hi) node indices
    int second_lo, second_hi;  // T_p^2 = [second_lo, second_hi), empty if lo >= hi
    int terminal;              // node index of t1 + m*h

    bool second_empty() const { return second_lo >= second_hi; }
};

/// Throws config_outside_interior for never-executed configurations.
DomainPartition partition_domain(const PendingConfig& p, const TimeGrid& tg);

/// All configurations of Theta_k(n) x E^k on the lattice: tuples of grid
/// nodes with t1 > T - n*h, gaps >= h, spread t_k - t1 < m*h, crossed with
/// impulse assignments. k = 0 yields the single empty configuration; k > m
/// yields nothing. Ordered deterministically (lexicographic).
std::vector<PendingConfig> enumerate_configs(int k, int n, const TimeGrid& tg,
                                             int impulse_count);

/// Stage-resolved configuration sets for the solve loop.
struct ConfigSet {
    int max_pending = 0;  // m
    int num_stages = 0;   // N
    /// fresh[k][n - m - 1]: interior configs first reachable at stage n,
    /// i.e. T - n*h < t1 <= T - (n-1)*h, for n = m+1..N.
    std::vector<std::vector<std::vector<PendingConfig>>> fresh;
    /// never_executed[k]: Theta_k(m) x E^k (value = no-impulse field).
    std::vector<std::vector<PendingConfig>> never_executed;

    std::size_t interior_count(int k) const;
};

ConfigSet build_config_set(const TimeGrid& tg, int impulse_count);

} // namespace dimpulse

#endif // DIMPULSE_LATTICE_HPP
