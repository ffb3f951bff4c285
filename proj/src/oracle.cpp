#include "dimpulse/policy.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace dimpulse {

// Exhaustive backward induction on the chain whose state is (time node,
// space node, pending-order list). Deliberately shares nothing with the
// kernel or solver beyond model evaluation: the stencil weights, the
// interpolation, and the recursion are re-derived here from scratch.
std::vector<double> brute_force_oracle(const ValidatedProblem& problem, const TimeGrid& tg,
                                       const SpaceGrid& sg) {
    if (tg.num_steps > 10 || sg.size() > 9 || problem.impulse_count() > 2 ||
        tg.multiplier() > 2) {
        throw Error(Errc::instance_too_large,
                    "oracle caps: N_T <= 10, nodes <= 9, |E| <= 2, m <= 2");
    }

    const std::size_t nodes = sg.size();
    const int d = sg.dim();
    const int ecount = problem.impulse_count();
    const int lag = tg.lag_steps;
    const int delay = tg.delay_steps;
    const int m = tg.multiplier();
    const double dt = tg.dt;

    // Trinomial weights per node, derived directly from the generator:
    // self 1 - sum_a dt*s_a^2/dx_a^2, neighbors dt*(s_a^2/2dx_a^2 +- b_a/2dx_a),
    // boundary rows use the one-sided drift transport with no diffusion.
    std::vector<double> w_self(nodes), f_term(nodes), g_term(nodes);
    std::vector<std::vector<double>> w_up(nodes, std::vector<double>(d, 0.0));
    std::vector<std::vector<double>> w_dn(nodes, std::vector<double>(d, 0.0));
    {
        std::vector<double> x(d), b(d), s(d);
        std::vector<int> idx(d);
        for (std::size_t i = 0; i < nodes; ++i) {
            sg.unflat(i, idx);
            sg.node(i, x);
            problem.drift_and_vol(x, b, s);
            f_term[i] = dt * problem.running_profit(x);
            g_term[i] = problem.terminal_profit(x);
            double self = 1.0;
            for (int a = 0; a < d; ++a) {
                const double dx = sg.axes[a].dx();
                if (idx[a] == 0) {
                    w_up[i][a] = dt * b[a] / dx;
                    self -= dt * b[a] / dx;
                } else if (idx[a] == sg.axes[a].n - 1) {
                    w_dn[i][a] = -dt * b[a] / dx;
                    self += dt * b[a] / dx;
                } else {
                    const double diff = 0.5 * dt * s[a] * s[a] / (dx * dx);
                    const double adv = 0.5 * dt * b[a] / dx;
                    w_up[i][a] = diff + adv;
                    w_dn[i][a] = diff - adv;
                    self -= 2.0 * diff;
                }
            }
            w_self[i] = self;
        }
    }

    // own multilinear interpolation with boundary clamping
    auto interp = [&](const std::vector<double>& vals, std::span<const double> q) {
        int cell[3];
        double frac[3];
        for (int a = 0; a < d; ++a) {
            const auto& ax = sg.axes[a];
            double u = (q[a] - ax.lo) / ax.dx();
            if (u < 0.0) u = 0.0;
            if (u > ax.n - 1.0) u = ax.n - 1.0;
            int c = static_cast<int>(u);
            if (c > ax.n - 2) c = ax.n - 2;
            cell[a] = c;
            frac[a] = u - c;
        }
        double acc = 0.0;
        int corner[3];
        for (int mask = 0; mask < (1 << d); ++mask) {
            double w = 1.0;
            for (int a = 0; a < d; ++a) {
                const bool up = (mask >> a) & 1;
                corner[a] = cell[a] + (up ? 1 : 0);
                w *= up ? frac[a] : 1.0 - frac[a];
            }
            acc += w * vals[sg.flat(std::span<const int>(corner, d))];
        }
        return acc;
    };

    // pending list encoded as (node, impulse) pairs, flattened into the key
    using Pending = std::vector<std::pair<int, int>>;
    std::map<std::vector<int>, std::vector<double>> memo;

    auto key_of = [](int j, const Pending& p) {
        std::vector<int> key{j};
        for (const auto& [n, e] : p) {
            key.push_back(n);
            key.push_back(e);
        }
        return key;
    };

    std::function<const std::vector<double>&(int, const Pending&)> value =
        [&](int j, const Pending& pend) -> const std::vector<double>& {
        const auto key = key_of(j, pend);
        if (auto it = memo.find(key); it != memo.end()) return it->second;

        std::vector<double> u(nodes);
        if (j == tg.num_steps) {
            u = g_term;
        } else {
            // candidate pending lists after the (optional) decision at j
            std::vector<Pending> actions{pend};
            const bool lag_ok = pend.empty() || j >= pend.back().first + lag;
            if (static_cast<int>(pend.size()) < m && lag_ok && j + delay <= tg.num_steps) {
                for (int e = 0; e < ecount; ++e) {
                    Pending next = pend;
                    next.emplace_back(j, e);
                    actions.push_back(std::move(next));
                }
            }

            // continuation array at j+1 for each action, execution applied
            std::vector<std::vector<double>> conts;
            conts.reserve(actions.size());
            std::vector<double> x(d), mapped(d);
            for (const auto& p2 : actions) {
                std::vector<double> cont(nodes);
                if (!p2.empty() && p2.front().first + delay == j + 1) {
                    Pending rest(p2.begin() + 1, p2.end());
                    const auto& base = value(j + 1, rest);
                    const int e = p2.front().second;
                    for (std::size_t l = 0; l < nodes; ++l) {
                        sg.node(l, x);
                        problem.apply_impulse(x, e, mapped);
                        cont[l] = problem.execution_cost(x, e) + interp(base, mapped);
                    }
                } else {
                    cont = value(j + 1, p2);
                }
                conts.push_back(std::move(cont));
            }

            std::vector<int> idx(d);
            for (std::size_t i = 0; i < nodes; ++i) {
                sg.unflat(i, idx);
                double best = 0.0;
                for (std::size_t a = 0; a < actions.size(); ++a) {
                    const auto& cont = conts[a];
                    double q = f_term[i] + w_self[i] * cont[i];
                    for (int ax = 0; ax < d; ++ax) {
                        const std::size_t s = sg.stride(ax);
                        if (idx[ax] + 1 < sg.axes[ax].n) q += w_up[i][ax] * cont[i + s];
                        if (idx[ax] > 0) q += w_dn[i][ax] * cont[i - s];
                    }
                    if (a == 0 || q > best) best = q;
                }
                u[i] = best;
            }
        }
        return memo.emplace(key, std::move(u)).first->second;
    };

    return value(0, {});
}

} // namespace dimpulse
