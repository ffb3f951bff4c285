#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dimpulse/checks.hpp"
#include "dimpulse/parallel.hpp"
#include "dimpulse/policy.hpp"
#include "dimpulse/problem_io.hpp"
#include "dimpulse/rng.hpp"
#include "dimpulse/solver.hpp"
#include "dimpulse/store_io.hpp"

namespace {

using dimpulse::Errc;
using dimpulse::Error;
using ordered_json = nlohmann::ordered_json;

std::string default_store_path(const std::string& problem_path) {
    return std::filesystem::path(problem_path).stem().string() + ".store";
}

std::string default_manifest_path(const std::string& problem_path) {
    return std::filesystem::path(problem_path).stem().string() + ".manifest.json";
}

struct LoadedProblem {
    dimpulse::ProblemFile file;
    dimpulse::ValidatedProblem problem;
    dimpulse::TimeGrid tg;
    dimpulse::SpaceGrid sg;
    std::uint64_t hash;
};

LoadedProblem load_and_validate(const std::string& path) {
    dimpulse::ProblemFile file = dimpulse::load_problem(path);
    dimpulse::ValidatedProblem problem = dimpulse::validate_problem(file.spec);
    auto [tg, sg] = dimpulse::build_grids(file.spec.delay, file.grid, problem.dim());
    return {std::move(file), std::move(problem), tg, sg, dimpulse::hash_file(path)};
}

int node_of_time(const dimpulse::TimeGrid& tg, double t) {
    const double q = t / tg.dt;
    const int j = static_cast<int>(std::llround(q));
    if (std::abs(q - j) > 1e-9 * std::max(1.0, std::abs(q)) || j < 0 || j > tg.num_steps) {
        throw Error(Errc::invalid_argument,
                    "time " + std::to_string(t) + " is not a grid node");
    }
    return j;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

void write_trajectory_csv(const std::string& path, const dimpulse::Trajectory& traj, int dim) {
    std::ostringstream os;
    os << "time";
    for (int a = 0; a < dim; ++a) os << ",x" << a;
    os << ",action,pending,running_pi\n";
    for (const auto& pt : traj.points) {
        os << dimpulse::format_g17(pt.time);
        for (int a = 0; a < dim; ++a) os << ',' << dimpulse::format_g17(pt.state[a]);
        os << ',' << pt.action << ',' << pt.pending_count << ','
           << dimpulse::format_g17(pt.running_value) << '\n';
    }
    dimpulse::atomic_write_text(path, os.str());
}

int run_solve(const std::string& problem_path, std::string store_path,
              std::string manifest_path, int threads) {
    const auto t0 = std::chrono::steady_clock::now();
    LoadedProblem lp = load_and_validate(problem_path);
    if (store_path.empty()) store_path = default_store_path(problem_path);
    if (manifest_path.empty()) manifest_path = default_manifest_path(problem_path);

    dimpulse::SolveTelemetry telemetry;
    dimpulse::ValueStore store =
        dimpulse::solve(lp.problem, lp.tg, lp.sg, {threads}, &telemetry);
    store.set_problem_hash(lp.hash);
    dimpulse::persist_store(store, store_path);

    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    dimpulse::atomic_write_text(
        manifest_path, dimpulse::manifest_text(problem_path, lp.hash, lp.file.spec.delay,
                                               lp.tg, lp.sg, telemetry, total));

    std::cout << "solved " << problem_path << ": stages=" << telemetry.num_stages
              << " configs=";
    for (std::size_t k = 1; k < telemetry.config_counts.size(); ++k) {
        std::cout << (k > 1 ? "/" : "") << telemetry.config_counts[k];
    }
    std::cout << " cfl=" << telemetry.cfl_ratio << " clamps=" << telemetry.clamp_events
              << " time=" << total << "s\n"
              << "store: " << store_path << "\nmanifest: " << manifest_path << "\n";
    return 0;
}

dimpulse::ValueStore load_matching_store(const LoadedProblem& lp, std::string store_path,
                                         const std::string& problem_path) {
    if (store_path.empty()) store_path = default_store_path(problem_path);
    dimpulse::ValueStore store = dimpulse::load_store(store_path);
    dimpulse::require_store_matches(store, lp.tg, lp.sg, lp.file.spec.impulses.values,
                                    lp.hash);
    return store;
}

int run_simulate(const std::string& problem_path, const std::string& store_path,
                 std::size_t paths, std::uint64_t seed, int threads, int export_trajectories,
                 std::string out_prefix) {
    LoadedProblem lp = load_and_validate(problem_path);
    const dimpulse::ValueStore store = load_matching_store(lp, store_path, problem_path);
    dimpulse::ClampStats clamps;
    const dimpulse::PolicyFn policy = dimpulse::store_policy(store, &clamps);

    const dimpulse::MonteCarloResult mc =
        dimpulse::monte_carlo_value(lp.problem, lp.tg, policy, paths, seed, threads);
    const double v0 =
        dimpulse::interpolate(lp.sg, store.v0(0), lp.file.spec.initial_state);
    std::cout << "paths=" << mc.paths << " mean=" << dimpulse::format_g17(mc.mean)
              << " stderr=" << dimpulse::format_g17(mc.std_error)
              << " v0(0,x0)=" << dimpulse::format_g17(v0)
              << " clamp_events=" << clamps.count() << "\n";

    if (export_trajectories > 0) {
        if (out_prefix.empty()) {
            out_prefix = std::filesystem::path(problem_path).stem().string() + "_traj";
        }
        for (int i = 0; i < export_trajectories; ++i) {
            const dimpulse::Trajectory traj = dimpulse::simulate_path(
                lp.problem, lp.tg, policy, dimpulse::path_seed(seed, i));
            write_trajectory_csv(out_prefix + "_" + std::to_string(i) + ".csv", traj,
                                 lp.problem.dim());
        }
        std::cout << "trajectories: " << out_prefix << "_0.csv .. " << out_prefix << "_"
                  << (export_trajectories - 1) << ".csv\n";
    }
    return 0;
}

int run_decide(const std::string& problem_path, const std::string& store_path, double t,
               const std::string& x_text, const std::string& pending_text) {
    LoadedProblem lp = load_and_validate(problem_path);
    const dimpulse::ValueStore store = load_matching_store(lp, store_path, problem_path);
    const int j = node_of_time(lp.tg, t);
    const std::vector<double> x = parse_csv_doubles(x_text);
    if (static_cast<int>(x.size()) != lp.problem.dim()) {
        throw Error(Errc::dimension_mismatch, "--x must have one value per state component");
    }

    dimpulse::OrderBook book;
    if (!pending_text.empty()) {
        std::istringstream is(pending_text);
        std::string tok;
        while (std::getline(is, tok, ';')) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) {
                throw Error(Errc::invalid_argument,
                            "--pending format is t1:e1;t2:e2 (times and impulse indices)");
            }
            const int node = node_of_time(lp.tg, std::stod(tok.substr(0, colon)));
            const int e = std::stoi(tok.substr(colon + 1));
            if (e < 0 || e >= lp.problem.impulse_count()) {
                throw Error(Errc::impulse_not_in_set, "pending impulse index out of range");
            }
            book.pending.push_back({node, e});
            book.last_decision_node = node;
            book.has_decided = true;
        }
        for (std::size_t i = 0; i < book.pending.size(); ++i) {
            const int node = book.pending[i].decision_node;
            if (node > j || node <= j - lp.tg.delay_steps) {
                throw Error(Errc::invalid_argument,
                            "pending decision times must lie in (t - m*h, t]");
            }
            if (i > 0 &&
                node - book.pending[i - 1].decision_node < lp.tg.lag_steps) {
                throw Error(Errc::invalid_argument,
                            "pending decision times must be >= h apart and ascending");
            }
        }
        if (static_cast<int>(book.pending.size()) > lp.tg.multiplier()) {
            throw Error(Errc::invalid_argument, "more than m pending orders");
        }
    }

    const dimpulse::Decision dec = dimpulse::extract_decision(store, j, x, book);
    if (dec.decide) {
        std::cout << "decide(e_index=" << dec.impulse_index << ", e=[";
        const auto& e = store.impulses()[dec.impulse_index];
        for (std::size_t i = 0; i < e.size(); ++i) {
            std::cout << (i ? "," : "") << dimpulse::format_g17(e[i]);
        }
        std::cout << "])\n";
    } else {
        std::cout << "wait\n";
    }
    return 0;
}

int run_validate(const std::string& problem_path, int threads, std::uint64_t seed,
                 std::size_t paths) {
    LoadedProblem lp = load_and_validate(problem_path);
    dimpulse::ValueStore store = dimpulse::solve(lp.problem, lp.tg, lp.sg, {threads});
    store.set_problem_hash(lp.hash);

    dimpulse::CheckOptions opts;
    opts.threads = threads;
    opts.seed = seed;
    opts.mc_paths = paths;
    const auto results =
        dimpulse::run_invariant_suite(lp.file, lp.problem, lp.tg, lp.sg, store, opts);
    for (const auto& r : results) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
        if (!r.detail.empty()) std::cout << " — " << r.detail;
        std::cout << "\n";
    }
    if (!dimpulse::all_passed(results)) {
        std::cout << "validation FAILED\n";
        return 2;
    }
    std::cout << "all invariants hold\n";
    return 0;
}

int run_oracle_check(const std::string& problem_path, int threads) {
    LoadedProblem lp = load_and_validate(problem_path);
    const dimpulse::ValueStore store = dimpulse::solve(lp.problem, lp.tg, lp.sg, {threads});
    const double gap = dimpulse::oracle_max_gap(lp.problem, lp.tg, lp.sg, store);
    const bool ok = gap <= 1e-9;
    std::cout << (ok ? "PASS" : "FAIL") << " max|solver - oracle| = "
              << dimpulse::format_g17(gap) << "\n";
    return ok ? 0 : 2;
}

int run_export(const std::string& problem_path, const std::string& store_path, int k,
               double t, const std::string& config_text, std::string out_path) {
    LoadedProblem lp = load_and_validate(problem_path);
    const dimpulse::ValueStore store = load_matching_store(lp, store_path, problem_path);
    const int j = node_of_time(lp.tg, t);

    dimpulse::PendingConfig p;
    if (k > 0) {
        const auto bar = config_text.find('|');
        if (config_text.empty() || bar == std::string::npos) {
            throw Error(Errc::invalid_argument,
                        "--config required for k >= 1: t1,..,tk|e1,..,ek");
        }
        for (double tv : parse_csv_doubles(config_text.substr(0, bar))) {
            p.decision_nodes.push_back(node_of_time(lp.tg, tv));
        }
        std::istringstream is(config_text.substr(bar + 1));
        std::string tok;
        while (std::getline(is, tok, ',')) {
            if (!tok.empty()) p.impulse_indices.push_back(std::stoi(tok));
        }
        if (p.count() != k || static_cast<int>(p.impulse_indices.size()) != k) {
            throw Error(Errc::invalid_argument, "--config does not describe k orders");
        }
    }

    const auto field = store.field(k, p, j);
    std::ostringstream os;
    for (int a = 0; a < lp.sg.dim(); ++a) os << "x" << a << ",";
    os << "value\n";
    std::vector<double> x(lp.sg.dim());
    for (std::size_t i = 0; i < field.size(); ++i) {
        lp.sg.node(i, x);
        for (int a = 0; a < lp.sg.dim(); ++a) os << dimpulse::format_g17(x[a]) << ',';
        os << dimpulse::format_g17(field[i]) << '\n';
    }
    if (out_path.empty()) {
        std::cout << os.str();
    } else {
        dimpulse::atomic_write_text(out_path, os.str());
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon stochastic impulse control with decision lag and execution delay"};
    app.require_subcommand(1);

    std::string problem_path, store_path, manifest_path, out_path, out_prefix;
    std::string x_text, pending_text, config_text;
    int threads = 0;
    std::uint64_t seed = 42;
    std::size_t paths = 1000;
    int export_trajectories = 0;
    int k = 0;
    double t = 0.0;

    auto* solve_cmd = app.add_subcommand("solve", "solve the value functions and persist the store");
    solve_cmd->add_option("problem", problem_path, "problem JSON file")->required();
    solve_cmd->add_option("--out", store_path, "store output path");
    solve_cmd->add_option("--manifest", manifest_path, "manifest output path");
    solve_cmd->add_option("--threads", threads, "worker threads (0 = auto)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo under the extracted policy");
    sim_cmd->add_option("problem", problem_path)->required();
    sim_cmd->add_option("--store", store_path, "store produced by solve");
    sim_cmd->add_option("--paths", paths, "number of paths");
    sim_cmd->add_option("--seed", seed, "master seed");
    sim_cmd->add_option("--threads", threads, "worker threads (0 = auto)");
    sim_cmd->add_option("--trajectories", export_trajectories, "export the first K trajectories as CSV");
    sim_cmd->add_option("--out-prefix", out_prefix, "trajectory CSV prefix");

    auto* decide_cmd = app.add_subcommand("decide", "query the policy at one (t, x, pending) point");
    decide_cmd->add_option("problem", problem_path)->required();
    decide_cmd->add_option("--store", store_path);
    decide_cmd->add_option("--t", t, "grid time")->required();
    decide_cmd->add_option("--x", x_text, "state, comma separated")->required();
    decide_cmd->add_option("--pending", pending_text, "pending orders t1:e1;t2:e2");

    auto* validate_cmd = app.add_subcommand("validate", "solve and run the full invariant suite");
    validate_cmd->add_option("problem", problem_path)->required();
    validate_cmd->add_option("--threads", threads);
    validate_cmd->add_option("--seed", seed);
    validate_cmd->add_option("--paths", paths, "Monte Carlo paths for the policy checks");

    auto* oracle_cmd = app.add_subcommand("oracle-check", "compare the solver against the exhaustive oracle");
    oracle_cmd->add_option("problem", problem_path)->required();
    oracle_cmd->add_option("--threads", threads);

    auto* export_cmd = app.add_subcommand("export", "CSV slice v_k(t, ., p)");
    export_cmd->add_option("problem", problem_path)->required();
    export_cmd->add_option("--store", store_path);
    export_cmd->add_option("--k", k, "pending order count")->required();
    export_cmd->add_option("--t", t, "grid time")->required();
    export_cmd->add_option("--config", config_text, "t1,..,tk|e1,..,ek for k >= 1");
    export_cmd->add_option("--out", out_path, "output CSV (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);
    const int nthreads = dimpulse::effective_threads(threads);

    try {
        if (solve_cmd->parsed()) {
            return run_solve(problem_path, store_path, manifest_path, nthreads);
        }
        if (sim_cmd->parsed()) {
            return run_simulate(problem_path, store_path, paths, seed, nthreads,
                                export_trajectories, out_prefix);
        }
        if (decide_cmd->parsed()) {
            return run_decide(problem_path, store_path, t, x_text, pending_text);
        }
        if (validate_cmd->parsed()) {
            return run_validate(problem_path, nthreads, seed, paths);
        }
        if (oracle_cmd->parsed()) {
            return run_oracle_check(problem_path, nthreads);
        }
        if (export_cmd->parsed()) {
            return run_export(problem_path, store_path, k, t, config_text, out_path);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
