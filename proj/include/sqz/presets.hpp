#pragma once

// Operating points and measurement plans of the reference setup, and
// scenario builders for them.

#include <array>
#include <cstdint>
#include <string_view>

#include "sqz/spectral.hpp"
#include "sqz/synth.hpp"

namespace sqz::presets {

inline constexpr double kReferenceLoPowerW = 464e-6;
inline constexpr std::array<double, 3> kVacuumLoPowersW = {232e-6, 464e-6, 928e-6};
inline constexpr double kDefaultSampleRateHz = 16384.0;

inline constexpr double kGain = 12.0;
inline constexpr double kHighGain = 40.0;
inline constexpr double kLoss = 0.15;
inline constexpr double kCavityLinewidthHz = 27e6;
inline constexpr double kPumpPowerMw = 100.0;

// Low-frequency anchors at 1 Hz: observed and dark-subtracted suppression.
inline constexpr double kObservedDbAt1Hz = -1.5;
inline constexpr double kRecoveredDbAt1Hz = -3.5;
inline constexpr double kMidbandDarkFloorDb = -15.0;
inline constexpr double kParasiticAlpha = 2.0;

inline constexpr double kFastAverageDivisor = 10.0;

enum class Preset { fig2, fig3, fig2_fast, fig3_fast };

/// "fig2", "fig3", "fig2-fast", "fig3-fast"; "fast" alone means fig3-fast.
Preset parse_preset(std::string_view name);
std::string_view preset_name(Preset preset);
bool is_fast(Preset preset);

WindowPlan plan_for(Preset preset);

enum class State { vacuum, squeezed, dark };
State parse_state(std::string_view name);

DarkNoiseModel default_dark_model();
ParasiticModel default_parasitic_model();
/// Harmonics 1, 2, 3, 5 with amplitudes halving per listed harmonic.
MainsModel default_mains_model();
SqueezerConfig squeezer(double gain = kGain, double loss = kLoss);

struct ScenarioRequest {
    State state = State::vacuum;
    double lo_power_w = kReferenceLoPowerW;
    double gain = kGain;
    double loss = kLoss;
    std::uint64_t seed = 1;
    double sample_rate_hz = kDefaultSampleRateHz;
    bool with_mains = true;
    bool with_parasitic = true; // squeezed state only
};

/// Scenario long enough for `plan`. Vacuum runs carry dark + mains, squeezed
/// runs add parasitic interference, dark runs block the LO and carry dark
/// noise only.
SimScenario make_scenario(const WindowPlan& plan, const ScenarioRequest& request);

} // namespace sqz::presets
