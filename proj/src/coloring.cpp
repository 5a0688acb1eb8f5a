#include "coloring.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "fft.hpp"
#include "sqz/parallel.hpp"
#include "sqz/rng.hpp"

namespace sqz::detail {

namespace {

std::size_t block_count(std::size_t n) { return (n + kBlockSamples - 1) / kBlockSamples; }

void fill_normal(std::span<double> out, std::uint64_t seed) {
    rng::Engine engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& x : out)
        x = normal(engine);
}

} // namespace

std::vector<double> white_gaussian(double variance, std::size_t n, std::uint64_t seed,
                                   unsigned threads) {
    std::vector<double> out(n, 0.0);
    if (variance <= 0.0 || n == 0)
        return out;
    const double sigma = std::sqrt(variance);
    parallel_for(block_count(n), threads, [&](std::size_t b) {
        const std::size_t begin = b * kBlockSamples;
        const std::size_t len = std::min(kBlockSamples, n - begin);
        // Full block drawn regardless of len so truncation never shifts the stream.
        std::vector<double> block(kBlockSamples);
        fill_normal(block, rng::derive_seed(seed, rng::tag("white"), b));
        for (std::size_t i = 0; i < len; ++i)
            out[begin + i] = sigma * block[i];
    });
    return out;
}

std::vector<double> colored_gaussian(const std::function<double(double)>& psd,
                                     double sample_rate_hz, std::size_t n, std::uint64_t seed,
                                     unsigned threads) {
    std::vector<double> out(n, 0.0);
    if (n == 0)
        return out;

    constexpr std::size_t len = kBlockSamples + 2 * kGuardSamples;
    constexpr std::size_t half = len / 2 + 1;

    // |H(f_k)| = sqrt(S(f_k) fs / 2) maps unit-variance white noise (one-sided
    // PSD 2/fs) onto S; 1/len undoes FFTW's unnormalized round trip.
    std::vector<double> gain(half, 0.0);
    const double df = sample_rate_hz / static_cast<double>(len);
    bool silent = true;
    for (std::size_t k = 1; k < half; ++k) {
        const double s = psd(static_cast<double>(k) * df);
        gain[k] = s > 0.0 ? std::sqrt(s * sample_rate_hz / 2.0) / static_cast<double>(len) : 0.0;
        silent = silent && gain[k] == 0.0;
    }
    if (silent)
        return out;

    parallel_for(block_count(n), threads, [&](std::size_t b) {
        std::vector<double> block(len);
        std::vector<std::complex<double>> spectrum(half);
        fill_normal(block, rng::derive_seed(seed, rng::tag("colored"), b));
        forward_real(block, spectrum);
        for (std::size_t k = 0; k < half; ++k)
            spectrum[k] *= gain[k];
        inverse_real(spectrum, block);

        const std::size_t begin = b * kBlockSamples;
        const std::size_t keep = std::min(kBlockSamples, n - begin);
        for (std::size_t i = 0; i < keep; ++i)
            out[begin + i] = block[kGuardSamples + i];
    });
    return out;
}

} // namespace sqz::detail
