#include "dimpulse/store_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "store container assumes a little-endian host");

namespace dimpulse {

using nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'D', 'I', 'M', 'P', 'S', 'T', 'O', '1'};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
    return std::strtoull(s.c_str(), nullptr, 16);
}

struct EntryBlock {
    std::string key;
    int lo = 0;
    int stage = 0;
    std::uint64_t offset = 0;  // bytes from payload start
    std::size_t count = 0;     // number of time slices
    const std::vector<std::vector<double>>* fields = nullptr;
};

void append_doubles(std::string& out, std::span<const double> values) {
    const std::size_t old = out.size();
    out.resize(old + values.size() * sizeof(double));
    std::memcpy(out.data() + old, values.data(), values.size() * sizeof(double));
}

} // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_failure, "cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string s = buf.str();
    return fnv1a64(std::span<const unsigned char>(
        reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

void persist_store(const ValueStore& store, const std::string& path) {
    if (!store.complete()) {
        throw Error(Errc::store_incomplete, "refusing to persist a partial store");
    }
    const TimeGrid& tg = store.time_grid();
    const SpaceGrid& sg = store.space_grid();
    const std::size_t nodes = sg.size();

    // payload and per-entry checksums, deterministic order: w, v0, configs by key
    std::string payload;
    ordered_json entries = ordered_json::array();
    auto emit = [&](const std::string& key, int lo, std::size_t count, int stage,
                    auto&& slice_at) {
        const std::uint64_t offset = payload.size();
        for (std::size_t j = 0; j < count; ++j) {
            append_doubles(payload, slice_at(j));
        }
        const std::size_t bytes = count * nodes * sizeof(double);
        const auto span = std::span<const unsigned char>(
            reinterpret_cast<const unsigned char*>(payload.data() + offset), bytes);
        entries.push_back(ordered_json{{"key", key},
                                       {"lo", lo},
                                       {"count", count},
                                       {"stage", stage},
                                       {"offset", offset},
                                       {"fnv", hex64(fnv1a64(span))}});
    };

    emit("w", 0, static_cast<std::size_t>(tg.num_steps) + 1, tg.multiplier(),
         [&](std::size_t j) { return store.no_impulse(static_cast<int>(j)); });
    emit("v0", 0, static_cast<std::size_t>(tg.num_steps) + 1, store.stage(),
         [&](std::size_t j) { return store.v0(static_cast<int>(j)); });
    for (const auto& [key, entry] : store.entries()) {
        emit(key, entry.lo, entry.fields.size(), entry.stage_written,
             [&](std::size_t j) { return std::span<const double>(entry.fields[j]); });
    }

    ordered_json header;
    header["version"] = kStoreFormatVersion;
    header["tool"] = kToolVersion;
    header["problem_hash"] = hex64(store.problem_hash());
    header["time"] = ordered_json{{"dt", tg.dt},
                                  {"steps", tg.num_steps},
                                  {"lag_steps", tg.lag_steps},
                                  {"delay_steps", tg.delay_steps}};
    ordered_json axes = ordered_json::array();
    for (const auto& a : sg.axes) {
        axes.push_back(ordered_json{{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}});
    }
    header["space"] = axes;
    header["impulses"] = store.impulses();
    header["entries"] = entries;

    const std::string header_text = header.dump();
    std::string blob;
    blob.append(kMagic, sizeof(kMagic));
    std::uint64_t hlen = header_text.size();
    blob.append(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    blob.append(header_text);
    while (blob.size() % 8 != 0) blob.push_back('\0');
    blob.append(payload);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::io_failure, "cannot write store file: " + path);
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        if (!out) throw Error(Errc::io_failure, "short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

ValueStore load_store(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_failure, "cannot open store file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string blob = buf.str();

    if (blob.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
        std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
        throw Error(Errc::checksum_failure, "not a store file (bad magic or truncated)");
    }
    std::uint64_t hlen = 0;
    std::memcpy(&hlen, blob.data() + sizeof(kMagic), sizeof(hlen));
    const std::size_t header_start = sizeof(kMagic) + sizeof(std::uint64_t);
    if (header_start + hlen > blob.size()) {
        throw Error(Errc::checksum_failure, "truncated store header");
    }

    ordered_json header;
    try {
        header = ordered_json::parse(blob.substr(header_start, hlen));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(Errc::checksum_failure, std::string("corrupt store header: ") + e.what());
    }
    if (!header.contains("version") || header["version"].get<std::uint32_t>() != kStoreFormatVersion) {
        throw Error(Errc::version_mismatch,
                    "store format version is not " + std::to_string(kStoreFormatVersion));
    }

    std::size_t payload_start = header_start + hlen;
    while (payload_start % 8 != 0) ++payload_start;

    TimeGrid tg;
    tg.dt = header["time"]["dt"].get<double>();
    tg.num_steps = header["time"]["steps"].get<int>();
    tg.lag_steps = header["time"]["lag_steps"].get<int>();
    tg.delay_steps = header["time"]["delay_steps"].get<int>();

    SpaceGrid sg;
    for (const auto& a : header["space"]) {
        sg.axes.push_back({a["lo"].get<double>(), a["hi"].get<double>(), a["n"].get<int>()});
    }
    std::vector<std::vector<double>> impulses =
        header["impulses"].get<std::vector<std::vector<double>>>();

    ValueStore store(tg, sg, impulses);
    store.set_problem_hash(parse_hex64(header["problem_hash"].get<std::string>()));
    const std::size_t nodes = sg.size();

    auto read_block = [&](const ordered_json& e) {
        const std::uint64_t offset = e["offset"].get<std::uint64_t>();
        const std::size_t count = e["count"].get<std::size_t>();
        const std::size_t bytes = count * nodes * sizeof(double);
        if (payload_start + offset + bytes > blob.size()) {
            throw Error(Errc::checksum_failure, "truncated store payload");
        }
        const auto* base =
            reinterpret_cast<const unsigned char*>(blob.data() + payload_start + offset);
        if (hex64(fnv1a64(std::span<const unsigned char>(base, bytes))) !=
            e["fnv"].get<std::string>()) {
            throw Error(Errc::checksum_failure,
                        "checksum mismatch for entry " + e["key"].get<std::string>());
        }
        std::vector<std::vector<double>> fields(count, std::vector<double>(nodes));
        for (std::size_t j = 0; j < count; ++j) {
            std::memcpy(fields[j].data(), base + j * nodes * sizeof(double),
                        nodes * sizeof(double));
        }
        return fields;
    };

    int final_stage = tg.multiplier();
    for (const auto& e : header["entries"]) {
        const std::string key = e["key"].get<std::string>();
        const int stage = e["stage"].get<int>();
        final_stage = std::max(final_stage, stage);
        if (key == "w") {
            store.set_no_impulse(read_block(e));
        } else if (key == "v0") {
            store.assign_v0_range(0, tg.num_steps, read_block(e));
        } else {
            // decode "k|t1,...,tk|e1,...,ek"
            PendingConfig p;
            const auto bar1 = key.find('|');
            const auto bar2 = key.find('|', bar1 + 1);
            if (bar1 == std::string::npos || bar2 == std::string::npos) {
                throw Error(Errc::checksum_failure, "malformed entry key " + key);
            }
            auto parse_list = [](const std::string& s, std::vector<int>& out) {
                std::istringstream is(s);
                std::string tok;
                while (std::getline(is, tok, ',')) {
                    if (!tok.empty()) out.push_back(std::stoi(tok));
                }
            };
            parse_list(key.substr(bar1 + 1, bar2 - bar1 - 1), p.decision_nodes);
            parse_list(key.substr(bar2 + 1), p.impulse_indices);
            const int lo = e["lo"].get<int>();
            auto fields = read_block(e);
            auto& entry = store.create_entry(p, lo, lo + static_cast<int>(fields.size()) - 1,
                                             stage);
            entry.fields = std::move(fields);
            entry.complete = true;
        }
    }
    store.finalize(final_stage);
    if (!store.complete()) {
        throw Error(Errc::checksum_failure, "store file is missing required entries");
    }
    return store;
}

void require_store_matches(const ValueStore& store, const TimeGrid& tg, const SpaceGrid& sg,
                           const std::vector<std::vector<double>>& impulses,
                           std::uint64_t problem_hash) {
    const TimeGrid& stg = store.time_grid();
    if (stg.dt != tg.dt || stg.num_steps != tg.num_steps || stg.lag_steps != tg.lag_steps ||
        stg.delay_steps != tg.delay_steps) {
        throw Error(Errc::grid_mismatch, "store was solved on a different time grid");
    }
    const SpaceGrid& ssg = store.space_grid();
    if (ssg.dim() != sg.dim()) {
        throw Error(Errc::grid_mismatch, "store was solved on a different space grid");
    }
    for (int a = 0; a < sg.dim(); ++a) {
        if (ssg.axes[a].lo != sg.axes[a].lo || ssg.axes[a].hi != sg.axes[a].hi ||
            ssg.axes[a].n != sg.axes[a].n) {
            throw Error(Errc::grid_mismatch, "store was solved on a different space grid");
        }
    }
    if (store.impulses() != impulses) {
        throw Error(Errc::grid_mismatch, "store was solved with a different impulse set");
    }
    if (problem_hash != 0 && store.problem_hash() != 0 &&
        store.problem_hash() != problem_hash) {
        throw Error(Errc::grid_mismatch, "store was solved from a different problem file");
    }
}

void atomic_write_text(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::io_failure, "cannot write " + path);
        out << text;
        if (!out) throw Error(Errc::io_failure, "short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string manifest_text(const std::string& problem_path, std::uint64_t problem_hash,
                          const DelayParams& delay, const TimeGrid& tg, const SpaceGrid& sg,
                          const SolveTelemetry& telemetry, double total_seconds) {
    ordered_json m;
    m["tool"] = kToolVersion;
    m["problem_file"] = problem_path;
    m["problem_hash"] = hex64(problem_hash);
    m["delay"] = ordered_json{{"T", delay.horizon}, {"h", delay.lag}, {"m", delay.multiplier}};
    ordered_json axes = ordered_json::array();
    for (const auto& a : sg.axes) {
        axes.push_back(ordered_json{{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}});
    }
    m["grid"] = ordered_json{{"dt", tg.dt},
                             {"steps", tg.num_steps},
                             {"lag_steps", tg.lag_steps},
                             {"delay_steps", tg.delay_steps},
                             {"space", axes}};
    m["stages"] = telemetry.num_stages;
    m["config_counts"] = telemetry.config_counts;
    m["cfl_ratio"] = telemetry.cfl_ratio;
    m["clamp_events"] = telemetry.clamp_events;
    ordered_json stage_seconds = ordered_json::array();
    for (const auto& s : telemetry.stages) stage_seconds.push_back(s.seconds);
    m["timing"] =
        ordered_json{{"stage_seconds", stage_seconds}, {"total_seconds", total_seconds}};
    return m.dump(2) + "\n";
}

} // namespace dimpulse
