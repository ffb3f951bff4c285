#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dimpulse/problem_io.hpp"
#include "dimpulse/solver.hpp"
#include "dimpulse/store_io.hpp"

using namespace dimpulse;

namespace {

const char* kCountingJson = R"({
  "dynamics": {"components": [{"family": "abm", "mu": 0.0, "sigma": 0.0}]},
  "rewards": {
    "f": {"family": "constant", "value": 0.0},
    "g": {"family": "constant", "value": 0.0},
    "c": {"family": "constant", "value": 1.0},
    "gamma": {"family": "identity"}
  },
  "delay": {"T": 1.0, "h": 0.25, "m": 2},
  "impulses": [1.0, -1.0],
  "initial_state": [0.0],
  "grid": {"dt": 0.125, "x_min": [-1.0], "x_max": [1.0], "nx": [5]}
})";

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

ValueStore tiny_store() {
    const ProblemFile file = parse_problem(kCountingJson);
    const ValidatedProblem problem = validate_problem(file.spec);
    auto [tg, sg] = build_grids(file.spec.delay, file.grid, problem.dim());
    return solve(problem, tg, sg, {1});
}

} // namespace

TEST_CASE("parse_problem reads the counting document") {
    const ProblemFile file = parse_problem(kCountingJson);
    CHECK(file.spec.delay.horizon == 1.0);
    CHECK(file.spec.delay.lag == 0.25);
    CHECK(file.spec.delay.multiplier == 2);
    CHECK(file.spec.impulses.values.size() == 2);
    CHECK(file.spec.impulses.values[0] == std::vector<double>{1.0});
    CHECK(file.spec.rewards.execution_cost.value == 1.0);
    CHECK(file.grid.nx == std::vector<int>{5});
    CHECK_NOTHROW(validate_problem(file.spec));
}

TEST_CASE("schema violations are rejected with context") {
    SUBCASE("m = 0") {
        std::string doc = kCountingJson;
        const auto pos = doc.find("\"m\": 2");
        doc.replace(pos, 6, "\"m\": 0");
        try {
            parse_problem(doc);
            FAIL("expected SchemaViolation");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::schema_violation);
            CHECK(std::string(e.what()).find("delay.m") != std::string::npos);
        }
    }
    SUBCASE("unknown top-level key") {
        std::string doc = kCountingJson;
        doc.insert(doc.rfind('}'), ", \"extra\": 1");
        try {
            parse_problem(doc);
            FAIL("expected SchemaViolation");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::schema_violation);
            CHECK(std::string(e.what()).find("extra") != std::string::npos);
        }
    }
    SUBCASE("unknown nested key") {
        std::string doc = kCountingJson;
        const auto pos = doc.find("\"value\": 1.0");
        std::string patched = doc;
        patched.replace(pos, 12, "\"value\": 1.0, \"mystery\": 2");
        CHECK_THROWS_AS(parse_problem(patched), Error);
    }
    SUBCASE("missing required key") {
        std::string doc = kCountingJson;
        const auto pos = doc.find("\"initial_state\": [0.0],");
        doc.erase(pos, std::string("\"initial_state\": [0.0],").size());
        try {
            parse_problem(doc);
            FAIL("expected SchemaViolation");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::schema_violation);
            CHECK(std::string(e.what()).find("initial_state") != std::string::npos);
        }
    }
    SUBCASE("malformed JSON is a parse error") {
        try {
            parse_problem("{\"dynamics\": ");
            FAIL("expected ParseError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::parse_error);
        }
    }
}

TEST_CASE("problem JSON round-trips structurally") {
    const ProblemFile file = parse_problem(kCountingJson);
    const ProblemFile again = parse_problem(serialize_problem(file));
    CHECK(problems_equal(file, again));
}

TEST_CASE("load_problem reads from disk and reports missing files") {
    const auto path = temp_file("dimpulse_problem.json");
    {
        std::ofstream out(path);
        out << kCountingJson;
    }
    const ProblemFile file = load_problem(path.string());
    CHECK(file.spec.delay.multiplier == 2);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_problem(path.string()), Error);
}

TEST_CASE("store round-trip is bit-exact") {
    const ValueStore store = tiny_store();
    const auto path = temp_file("dimpulse_roundtrip.store");
    persist_store(store, path.string());
    const ValueStore loaded = load_store(path.string());
    std::filesystem::remove(path);

    const TimeGrid& tg = store.time_grid();
    CHECK(loaded.time_grid().dt == tg.dt);
    CHECK(loaded.time_grid().num_steps == tg.num_steps);
    CHECK(loaded.impulses() == store.impulses());
    CHECK(loaded.complete());
    for (int j = 0; j <= tg.num_steps; ++j) {
        const auto a = store.v0(j);
        const auto b = loaded.v0(j);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
    REQUIRE(loaded.entries().size() == store.entries().size());
    for (const auto& [key, entry] : store.entries()) {
        const auto& other = loaded.entries().at(key);
        CHECK(other.lo == entry.lo);
        CHECK(other.fields == entry.fields);
        CHECK(other.stage_written == entry.stage_written);
    }
}

TEST_CASE("truncated store files fail the checksum") {
    const ValueStore store = tiny_store();
    const auto path = temp_file("dimpulse_truncated.store");
    persist_store(store, path.string());
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size - 64);
    try {
        load_store(path.string());
        FAIL("expected ChecksumFailure");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::checksum_failure);
    }
    std::filesystem::remove(path);
}

TEST_CASE("corrupted payload bytes fail the checksum") {
    const ValueStore store = tiny_store();
    const auto path = temp_file("dimpulse_corrupt.store");
    persist_store(store, path.string());
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-9, std::ios::end);
        char b = 0x5a;
        f.write(&b, 1);
    }
    try {
        load_store(path.string());
        FAIL("expected ChecksumFailure");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::checksum_failure);
    }
    std::filesystem::remove(path);
}

TEST_CASE("foreign format versions are rejected") {
    const ValueStore store = tiny_store();
    const auto path = temp_file("dimpulse_version.store");
    persist_store(store, path.string());
    {
        // patch "version":1 -> "version":9 inside the JSON header
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        std::string blob((std::istreambuf_iterator<char>(f)), {});
        const auto pos = blob.find("\"version\":1");
        REQUIRE(pos != std::string::npos);
        f.seekp(pos + std::string("\"version\":").size());
        char nine = '9';
        f.write(&nine, 1);
    }
    try {
        load_store(path.string());
        FAIL("expected VersionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::version_mismatch);
    }
    std::filesystem::remove(path);
}

TEST_CASE("stores refuse to serve a different grid or problem") {
    const ValueStore store = tiny_store();
    const ProblemFile file = parse_problem(kCountingJson);
    const ValidatedProblem problem = validate_problem(file.spec);
    auto [tg, sg] = build_grids(file.spec.delay, file.grid, problem.dim());

    CHECK_NOTHROW(require_store_matches(store, tg, sg, file.spec.impulses.values, 0));

    SpaceGrid other = sg;
    other.axes[0].n = 7;
    CHECK_THROWS_AS(require_store_matches(store, tg, other, file.spec.impulses.values, 0),
                    Error);

    TimeGrid tg2 = tg;
    tg2.num_steps *= 2;
    CHECK_THROWS_AS(require_store_matches(store, tg2, sg, file.spec.impulses.values, 0),
                    Error);

    auto impulses = file.spec.impulses.values;
    impulses.push_back({3.0});
    CHECK_THROWS_AS(require_store_matches(store, tg, sg, impulses, 0), Error);
}

TEST_CASE("g17 formatting round-trips doubles losslessly") {
    for (double v : {3.141592653589793, -1.0 / 3.0, 1e-300, 105.12710963760242, 0.1}) {
        const std::string s = format_g17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("file hashing is stable and content-sensitive") {
    const auto path = temp_file("dimpulse_hash.bin");
    {
        std::ofstream out(path, std::ios::binary);
        out << "abc";
    }
    const auto h1 = hash_file(path.string());
    const auto h2 = hash_file(path.string());
    CHECK(h1 == h2);
    {
        std::ofstream out(path, std::ios::binary);
        out << "abd";
    }
    CHECK(hash_file(path.string()) != h1);
    std::filesystem::remove(path);
}

TEST_CASE("impulse values may be two-component tuples") {
    std::string doc = kCountingJson;
    const auto pos = doc.find("\"impulses\": [1.0, -1.0]");
    doc.replace(pos, std::string("\"impulses\": [1.0, -1.0]").size(),
                "\"impulses\": [[0.5, -0.5], [1.0, 0.0]]");
    const ProblemFile file = parse_problem(doc);
    CHECK(file.spec.impulses.arity() == 2);
    CHECK(file.spec.impulses.values[0] == std::vector<double>{0.5, -0.5});
    CHECK_NOTHROW(validate_problem(file.spec));
    const ProblemFile again = parse_problem(serialize_problem(file));
    CHECK(problems_equal(file, again));
}
