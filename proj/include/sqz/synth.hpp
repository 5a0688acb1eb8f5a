#pragma once

// Seeded generation of balanced-homodyne difference-photocurrent records.
//
// Units are vacuum-relative throughout: a one-sided PSD of 1 is the vacuum
// noise level at the reference LO power. A white record with one-sided PSD S
// sampled at fs has variance S * fs / 2.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sqz/noise_models.hpp"

namespace sqz {

struct HomodyneConfig {
    double lo_power_w = 464e-6;
    double lo_power_ref_w = 464e-6;
    double theta_rad = 0.0; // 0 reads the squeezed quadrature
    double visibility = 1.0;
    bool lo_blocked = false; // dark run: no optical signal reaches the diodes

    void validate() const;
    double lo_scale() const { return lo_blocked ? 0.0 : lo_power_w / lo_power_ref_w; }
};

/// Electronic dark noise, floor * (1 + knee/f). Does not scale with LO power.
struct DarkNoiseModel {
    double floor_rel_vacuum = 0.0;
    double knee_hz = 0.0;

    void validate() const;
    double psd(double f_hz) const;
};

struct MainsHarmonic {
    int order = 1;
    double amplitude = 0.0;
    double phase_rad = 0.0;
};

struct MainsModel {
    double fundamental_hz = 50.0;
    std::vector<MainsHarmonic> harmonics;

    void validate(double sample_rate_hz) const;
};

/// Scattered-light interference, psd_at_1hz * max(f, f_min)^-alpha relative
/// to vacuum at the actual LO power.
struct ParasiticModel {
    double psd_at_1hz_rel_vacuum = 0.0;
    double exponent_alpha = 2.0;
    double f_min_hz = 0.05;

    void validate() const;
    double psd(double f_hz) const;
};

struct SqueezerConfig {
    OpoParams opo;
    LossBudget losses;
};

struct SimScenario {
    HomodyneConfig homodyne;
    std::optional<SqueezerConfig> squeezer; // absent: vacuum at the signal port
    std::optional<DarkNoiseModel> dark;
    std::optional<MainsModel> mains;
    std::optional<ParasiticModel> parasitic;
    double sample_rate_hz = 16384.0;
    double analysis_max_hz = 3200.0;
    double duration_s = 1.0;
    std::uint64_t seed = 0;

    /// Largest record the generator accepts, in samples.
    static constexpr std::size_t kMaxSamples = std::size_t{1} << 28;

    void validate() const;
    std::size_t n_samples() const;

    /// One `key = value` line per parameter, fixed order and precision.
    std::string canonical_text() const;
    /// SHA-256 of canonical_text(), hex.
    std::string digest() const;
};

struct SynthOptions {
    unsigned threads = 0; // 0: hardware concurrency
};

/// Quadrature variance seen by the detector, V(theta) with visibility folded
/// into the loss (1 with no squeezer).
double detected_quadrature_variance(const SimScenario& scenario);

/// One-sided PSD of the quantum-noise component, lo_scale * V(theta).
double quantum_psd(const SimScenario& scenario);

std::vector<double> synth_quantum_noise(const SimScenario& scenario, std::size_t n_samples,
                                        const SynthOptions& options = {});

std::vector<double> synth_dark(const DarkNoiseModel& model, double sample_rate_hz,
                               std::size_t n_samples, std::uint64_t seed,
                               const SynthOptions& options = {});

std::vector<double> synth_mains(const MainsModel& model, double sample_rate_hz,
                                std::size_t n_samples);

/// lo_scale multiplies the vacuum-relative model PSD into absolute units.
std::vector<double> synth_parasitic(const ParasiticModel& model, double sample_rate_hz,
                                    std::size_t n_samples, std::uint64_t seed,
                                    double lo_scale = 1.0, const SynthOptions& options = {});

/// Sum of all configured components, each with its own sub-seed.
std::vector<double> compose_scenario(const SimScenario& scenario,
                                     const SynthOptions& options = {});

namespace component {
inline constexpr const char* quantum = "quantum";
inline constexpr const char* dark = "dark";
inline constexpr const char* parasitic = "parasitic";
} // namespace component

} // namespace sqz
