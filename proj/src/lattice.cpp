#include "dimpulse/lattice.hpp"

#include <cmath>
#include <sstream>

namespace dimpulse {

std::size_t SpaceGrid::size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.n);
    return n;
}

std::size_t SpaceGrid::stride(int axis) const {
    std::size_t s = 1;
    for (int a = dim() - 1; a > axis; --a) s *= static_cast<std::size_t>(axes[a].n);
    return s;
}

std::size_t SpaceGrid::flat(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim(); ++a) f = f * static_cast<std::size_t>(axes[a].n) + idx[a];
    return f;
}

void SpaceGrid::unflat(std::size_t flat_index, std::span<int> idx) const {
    for (int a = dim() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat_index % static_cast<std::size_t>(axes[a].n));
        flat_index /= static_cast<std::size_t>(axes[a].n);
    }
}

void SpaceGrid::node(std::size_t flat_index, std::span<double> out) const {
    int idx[3];
    unflat(flat_index, std::span<int>(idx, dim()));
    for (int a = 0; a < dim(); ++a) out[a] = coord(a, idx[a]);
}

namespace {

// Nearest-integer quotient; rejects when value/dt is not an integer to
// 1e-9 relative accuracy. Exactness downstream comes from storing the
// integer, not the float.
int exact_steps(double value, double dt, const char* what) {
    const double q = value / dt;
    const double r = std::round(q);
    if (r < 0.5 || std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
        std::ostringstream os;
        os << what << " = " << value << " is not an integer multiple of dt = " << dt;
        throw Error(Errc::misaligned_grid, os.str());
    }
    return static_cast<int>(r);
}

} // namespace

std::pair<TimeGrid, SpaceGrid> build_grids(const DelayParams& delay,
                                           const GridRequest& request, int dim) {
    if (!(request.dt > 0.0)) {
        throw Error(Errc::misaligned_grid, "grid.dt must be > 0");
    }
    TimeGrid tg;
    tg.dt = request.dt;
    tg.lag_steps = exact_steps(delay.lag, request.dt, "h");
    tg.num_steps = exact_steps(delay.horizon, request.dt, "T");
    tg.delay_steps = delay.multiplier * tg.lag_steps;
    if (tg.delay_steps > tg.num_steps) {
        throw Error(Errc::delay_exceeds_horizon, "m*h exceeds T on the grid");
    }

    if (dim < 1 || dim > 3) {
        throw Error(Errc::dimension_mismatch, "state dimension must be between 1 and 3");
    }
    if (static_cast<int>(request.x_min.size()) != dim ||
        static_cast<int>(request.x_max.size()) != dim ||
        static_cast<int>(request.nx.size()) != dim) {
        throw Error(Errc::dimension_mismatch, "grid axes must match the state dimension");
    }
    SpaceGrid sg;
    sg.axes.resize(dim);
    for (int a = 0; a < dim; ++a) {
        if (!(request.x_min[a] < request.x_max[a])) {
            throw Error(Errc::misaligned_grid, "grid.x_min must be < grid.x_max per axis");
        }
        if (request.nx[a] < 3) {
            throw Error(Errc::misaligned_grid, "grid.nx must be >= 3 per axis");
        }
        sg.axes[a] = {request.x_min[a], request.x_max[a], request.nx[a]};
    }
    return {tg, sg};
}

PendingConfig PendingConfig::drop_first() const {
    PendingConfig p;
    p.decision_nodes.assign(decision_nodes.begin() + 1, decision_nodes.end());
    p.impulse_indices.assign(impulse_indices.begin() + 1, impulse_indices.end());
    return p;
}

PendingConfig PendingConfig::append(int node, int impulse_index) const {
    PendingConfig p = *this;
    p.decision_nodes.push_back(node);
    p.impulse_indices.push_back(impulse_index);
    return p;
}

std::string PendingConfig::key() const {
    std::ostringstream os;
    os << count() << '|';
    for (std::size_t i = 0; i < decision_nodes.size(); ++i) {
        if (i) os << ',';
        os << decision_nodes[i];
    }
    os << '|';
    for (std::size_t i = 0; i < impulse_indices.size(); ++i) {
        if (i) os << ',';
        os << impulse_indices[i];
    }
    return os.str();
}

ConfigRegion classify_config(const PendingConfig& p, const TimeGrid& tg) {
    if (p.count() == 0) return ConfigRegion::interior;
    return p.first_node() + tg.delay_steps <= tg.num_steps ? ConfigRegion::interior
                                                           : ConfigRegion::never_executed;
}

DomainPartition partition_domain(const PendingConfig& p, const TimeGrid& tg) {
    if (p.count() == 0 || classify_config(p, tg) != ConfigRegion::interior) {
        throw Error(Errc::config_outside_interior,
                    "partition_domain requires an interior configuration with k >= 1");
    }
    DomainPartition dp;
    dp.terminal = p.first_node() + tg.delay_steps;
    dp.first_lo = p.last_node();
    dp.first_hi = std::min(p.last_node() + tg.lag_steps, dp.terminal);
    dp.second_lo = dp.first_hi;
    dp.second_hi = dp.terminal;
    return dp;
}

namespace {

void enumerate_times(int k, int n, const TimeGrid& tg, std::vector<int>& nodes,
                     std::vector<std::vector<int>>& out) {
    if (static_cast<int>(nodes.size()) == k) {
        out.push_back(nodes);
        return;
    }
    const int depth = static_cast<int>(nodes.size());
    int lo;
    if (depth == 0) {
        // t1 > T - n*h
        lo = std::max(0, tg.num_steps - n * tg.lag_steps + 1);
    } else {
        lo = nodes.back() + tg.lag_steps;
    }
    for (int j = lo; j <= tg.num_steps; ++j) {
        if (depth > 0 && j - nodes.front() >= tg.delay_steps) break;  // t_k - t1 < m*h
        nodes.push_back(j);
        enumerate_times(k, n, tg, nodes, out);
        nodes.pop_back();
    }
}

} // namespace

std::vector<PendingConfig> enumerate_configs(int k, int n, const TimeGrid& tg,
                                             int impulse_count) {
    std::vector<PendingConfig> out;
    if (k == 0) {
        out.push_back(PendingConfig{});
        return out;
    }
    if (k > tg.multiplier()) return out;  // gaps >= h contradict spread < m*h

    std::vector<std::vector<int>> tuples;
    std::vector<int> nodes;
    enumerate_times(k, n, tg, nodes, tuples);

    // cross with impulse assignments, last index fastest
    std::vector<int> e(k, 0);
    for (const auto& t : tuples) {
        std::fill(e.begin(), e.end(), 0);
        while (true) {
            PendingConfig p;
            p.decision_nodes = t;
            p.impulse_indices = e;
            out.push_back(std::move(p));
            int pos = k - 1;
            while (pos >= 0 && ++e[pos] == impulse_count) {
                e[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }
    return out;
}

ConfigSet build_config_set(const TimeGrid& tg, int impulse_count) {
    ConfigSet cs;
    cs.max_pending = tg.multiplier();
    cs.num_stages = tg.num_stages();
    const int m = cs.max_pending;
    const int big_n = cs.num_stages;

    cs.fresh.assign(m + 1, {});
    cs.never_executed.assign(m + 1, {});
    for (int k = 1; k <= m; ++k) {
        cs.fresh[k].assign(big_n - m, {});
        for (const auto& p : enumerate_configs(k, big_n, tg, impulse_count)) {
            if (classify_config(p, tg) == ConfigRegion::never_executed) {
                cs.never_executed[k].push_back(p);
                continue;
            }
            // stage of first reachability: smallest n with t1 > T - n*h
            const int gap = tg.num_steps - p.first_node();  // >= delay_steps
            const int n = gap / tg.lag_steps + 1;
            cs.fresh[k][n - m - 1].push_back(p);
        }
    }
    return cs;
}

std::size_t ConfigSet::interior_count(int k) const {
    std::size_t c = 0;
    for (const auto& stage : fresh[k]) c += stage.size();
    return c;
}

} // namespace dimpulse
