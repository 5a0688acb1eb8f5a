#include "sqz/presets.hpp"

#include <cmath>
#include <string>

#include "sqz/error.hpp"
#include "sqz/verify.hpp"

namespace sqz::presets {

Preset parse_preset(std::string_view name) {
    if (name == "fig2")
        return Preset::fig2;
    if (name == "fig3")
        return Preset::fig3;
    if (name == "fig2-fast")
        return Preset::fig2_fast;
    if (name == "fig3-fast" || name == "fast")
        return Preset::fig3_fast;
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::string_view preset_name(Preset preset) {
    switch (preset) {
    case Preset::fig2:
        return "fig2";
    case Preset::fig3:
        return "fig3";
    case Preset::fig2_fast:
        return "fig2-fast";
    case Preset::fig3_fast:
        return "fig3-fast";
    }
    return "unknown";
}

bool is_fast(Preset preset) { return preset == Preset::fig2_fast || preset == Preset::fig3_fast; }

WindowPlan plan_for(Preset preset) {
    switch (preset) {
    case Preset::fig2:
        return fig2_plan();
    case Preset::fig3:
        return fig3_plan();
    case Preset::fig2_fast:
        return fig2_plan().scaled_averages(kFastAverageDivisor, "fig2-fast");
    case Preset::fig3_fast:
        return fig3_plan().scaled_averages(kFastAverageDivisor, "fig3-fast");
    }
    throw ConfigError("unknown preset");
}

State parse_state(std::string_view name) {
    if (name == "vacuum")
        return State::vacuum;
    if (name == "squeezed")
        return State::squeezed;
    if (name == "dark")
        return State::dark;
    throw ConfigError("unknown state '" + std::string(name) + "' (vacuum | squeezed | dark)");
}

DarkNoiseModel default_dark_model() {
    return calibrate_dark(kObservedDbAt1Hz, kRecoveredDbAt1Hz, 1.0, kMidbandDarkFloorDb).model;
}

ParasiticModel default_parasitic_model() {
    const double intrinsic_db = -squeezing_db(kGain, kLoss);
    return calibrate_parasitic(kRecoveredDbAt1Hz, intrinsic_db, 1.0, kParasiticAlpha);
}

MainsModel default_mains_model() {
    return {50.0, {{1, 2.0, 0.0}, {2, 1.0, 0.7}, {3, 0.5, 1.9}, {5, 0.25, -2.3}}};
}

SqueezerConfig squeezer(double gain, double loss) {
    OpoParams opo;
    opo.gain = gain;
    opo.cavity_linewidth_hz = kCavityLinewidthHz;
    opo.pump_power_mw = kPumpPowerMw;
    return {opo, LossBudget::from_total_loss(loss)};
}

SimScenario make_scenario(const WindowPlan& plan, const ScenarioRequest& request) {
    SimScenario s;
    s.homodyne.lo_power_w = request.lo_power_w;
    s.homodyne.lo_power_ref_w = kReferenceLoPowerW;
    s.sample_rate_hz = request.sample_rate_hz;
    s.analysis_max_hz = plan.max_frequency_hz();
    s.seed = request.seed;
    s.dark = default_dark_model();
    switch (request.state) {
    case State::dark:
        s.homodyne.lo_blocked = true;
        break;
    case State::squeezed:
        s.squeezer = squeezer(request.gain, request.loss);
        if (request.with_parasitic)
            s.parasitic = default_parasitic_model();
        [[fallthrough]];
    case State::vacuum:
        if (request.with_mains)
            s.mains = default_mains_model();
        break;
    }
    const std::size_t need = plan.required_samples(s.sample_rate_hz);
    s.duration_s = std::ceil(static_cast<double>(need) / s.sample_rate_hz);
    return s;
}

} // namespace sqz::presets
