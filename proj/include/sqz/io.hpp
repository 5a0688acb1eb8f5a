#pragma once

// On-disk formats.
//
// Time series: <name>.f64 holds the samples as raw little-endian IEEE-754
// doubles; <name>.meta is a `key = value` text sidecar:
//
//   format = sqz-timeseries-1
//   sample_rate_hz = 16384
//   duration_s = 48
//   n_samples = 786432
//   seed = 1
//   scenario_digest = <sha256 hex>
//   sha256 = <sha256 hex of the .f64 file>
//   scenario.<key> = ...        (the scenario's canonical parameters)
//
// Spectrum: CSV with columns frequency_hz, psd_rel_vacuum, db_rel_vacuum,
// segment_index, rbw_hz, n_averages, plus a JSON metadata document.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqz/spectral.hpp"
#include "sqz/synth.hpp"

namespace sqz::io {

inline constexpr const char* kTimeSeriesFormat = "sqz-timeseries-1";

struct TimeSeriesMeta {
    double sample_rate_hz = 0.0;
    double duration_s = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string scenario_digest;
    std::string sha256;
    std::map<std::string, std::string> scenario; // canonical scenario parameters
};

TimeSeriesMeta describe(const SimScenario& scenario, std::size_t n_samples);

std::filesystem::path samples_path(const std::filesystem::path& base);
std::filesystem::path meta_path(const std::filesystem::path& base);
/// Accepts "dir/name", "dir/name.f64" or "dir/name.meta".
std::filesystem::path strip_extension(const std::filesystem::path& path);

/// Writes <base>.f64 and <base>.meta atomically (temp file + rename) and
/// fills meta.sha256. Refuses existing files unless `force`.
void write_time_series(const std::filesystem::path& base, std::span<const double> samples,
                       TimeSeriesMeta& meta, bool force);

struct TimeSeries {
    TimeSeriesMeta meta;
    std::vector<double> samples;
};

TimeSeries read_time_series(const std::filesystem::path& base);

std::string sha256_hex(std::span<const unsigned char> bytes);
std::string file_sha256(const std::filesystem::path& path);

std::string spectrum_csv(const StitchedSpectrum& spectrum, double vacuum_level = 1.0);
nlohmann::json spectrum_metadata(const StitchedSpectrum& spectrum, const WindowPlan& plan,
                                 const std::vector<std::vector<std::size_t>>& floored_bins = {});

/// Text written via temp file + rename. Refuses existing files unless `force`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text, bool force);

void encode_le(std::span<const double> samples, std::vector<unsigned char>& out);
std::vector<double> decode_le(std::span<const unsigned char> bytes);

} // namespace sqz::io
