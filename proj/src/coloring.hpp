#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace sqz::detail {

// Output is produced in fixed blocks of kBlockSamples. Block b depends only
// on (seed, b), so a run of n samples is a prefix of any longer run.
inline constexpr std::size_t kBlockSamples = std::size_t{1} << 21;
// Colored blocks are shaped over kBlockSamples + 2 * kGuardSamples and the
// guards discarded, keeping circular wrap-around out of the kept samples.
inline constexpr std::size_t kGuardSamples = std::size_t{1} << 18;

std::vector<double> white_gaussian(double variance, std::size_t n, std::uint64_t seed,
                                   unsigned threads);

/// Zero-mean Gaussian noise with one-sided PSD psd(f), f > 0. The DC bin is
/// removed.
std::vector<double> colored_gaussian(const std::function<double(double)>& psd,
                                     double sample_rate_hz, std::size_t n, std::uint64_t seed,
                                     unsigned threads);

} // namespace sqz::detail
