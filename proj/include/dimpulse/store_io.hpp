#ifndef DIMPULSE_STORE_IO_HPP
#define DIMPULSE_STORE_IO_HPP

#include <cstdint>
#include <span>
#include <string>

#include "dimpulse/solver.hpp"

namespace dimpulse {

inline constexpr const char* kToolVersion = "delay-impulse 0.1.0";
inline constexpr std::uint32_t kStoreFormatVersion = 1;

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);
std::uint64_t hash_file(const std::string& path);  // throws io_failure

/// Container layout: magic "DIMPSTO1", u64 LE header length, JSON header,
/// zero padding to 8-byte alignment, then raw little-endian float64 arrays
/// per (k, p, t). The header carries grids, impulses, the problem hash and
/// per-entry byte offsets plus FNV-1a checksums.
void persist_store(const ValueStore& store, const std::string& path);

/// Round-trip is bit-exact. Verifies the format version and every entry
/// checksum (VersionMismatch / ChecksumFailure).
ValueStore load_store(const std::string& path);

/// Guard for decide/simulate/export: the store must have been produced by
/// the same grids, impulse set and problem file (GridMismatch otherwise).
void require_store_matches(const ValueStore& store, const TimeGrid& tg, const SpaceGrid& sg,
                           const std::vector<std::vector<double>>& impulses,
                           std::uint64_t problem_hash);

/// Writes text atomically (temp file + rename).
void atomic_write_text(const std::string& path, const std::string& text);

/// %.17g formatting: lossless for doubles.
std::string format_g17(double v);

/// Run manifest: problem identity, grid summary, stage count, per-k config
/// counts, clamp telemetry and timing. Reruns with identical inputs differ
/// only under the "timing" key.
std::string manifest_text(const std::string& problem_path, std::uint64_t problem_hash,
                          const DelayParams& delay, const TimeGrid& tg, const SpaceGrid& sg,
                          const SolveTelemetry& telemetry, double total_seconds);

} // namespace dimpulse

#endif // DIMPULSE_STORE_IO_HPP
