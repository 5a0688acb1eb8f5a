#include "sqz/suite.hpp"

#include <cmath>
#include <map>
#include <string>

#include "sqz/presets.hpp"
#include "sqz/rng.hpp"

namespace sqz {

namespace {

StitchedSpectrum simulate_and_analyze(const SimScenario& scenario, const WindowPlan& plan,
                                      unsigned threads) {
    const auto samples = compose_scenario(scenario, {threads});
    auto spectrum = run_plan(samples, scenario.sample_rate_hz, plan, {kDefaultOverlap, threads});
    spectrum.provenance = scenario.digest();
    return spectrum;
}

std::uint64_t run_seed(std::uint64_t seed, const std::string& run) {
    return rng::derive_seed(seed, "run:" + run);
}

} // namespace

SuiteTolerances SuiteTolerances::uniform(double value) {
    return {value, value, value, value};
}

SuiteTolerances SuiteTolerances::widened_for_fast() const {
    SuiteTolerances t = *this;
    t.whiteness_slope_db_per_decade *= std::sqrt(presets::kFastAverageDivisor);
    return t;
}

WindowPlan closure_plan() { return {"closure-1hz", {{0.5, 2.0, 0.0625, 4000}}}; }

bool SuiteResult::all_passed() const {
    for (const auto& r : reports)
        if (!r.passed)
            return false;
    return true;
}

SuiteResult run_verification_suite(const SuiteOptions& options) {
    using namespace presets;
    SuiteResult result;
    const unsigned threads = options.threads;
    const double fs = kDefaultSampleRateHz;
    const bool subtract = !options.unsubtracted_dark_floor_db.has_value();

    // Vacuum spectra at three LO powers.
    {
        const WindowPlan plan = plan_for(options.fast ? Preset::fig2_fast : Preset::fig2);
        const BinMask mask =
            mains_mask(plan, fs, 50.0, kMainsHarmonicsMasked, kMainsMaskHalfWidthBins);

        ScenarioRequest dark_req;
        dark_req.state = State::dark;
        dark_req.seed = run_seed(options.seed, "fig2-dark");
        const auto dark = simulate_and_analyze(make_scenario(plan, dark_req), plan, threads);

        std::map<double, StitchedSpectrum> by_power;
        std::size_t floored = 0;
        for (double power : kVacuumLoPowersW) {
            ScenarioRequest req;
            req.state = State::vacuum;
            req.lo_power_w = power;
            req.seed = run_seed(options.seed, "fig2-vacuum-" + std::to_string(power));
            SimScenario scenario = make_scenario(plan, req);
            if (options.unsubtracted_dark_floor_db)
                scenario.dark->floor_rel_vacuum = db_to_variance(*options.unsubtracted_dark_floor_db);
            auto raw = simulate_and_analyze(scenario, plan, threads);
            if (subtract) {
                auto sub = subtract_dark(raw, dark);
                floored += sub.floored_count();
                by_power.emplace(power, std::move(sub.spectrum));
            } else {
                by_power.emplace(power, std::move(raw));
            }
        }

        auto lin = check_linearity(by_power, kAnalysisBand, &mask, options.tolerances.linearity_db);
        lin.details["plan"] = plan.name;
        lin.details["dark_subtracted"] = subtract;
        lin.details["floored_bins"] = floored;
        result.reports.push_back(std::move(lin));

        auto white = check_whiteness(by_power.at(kReferenceLoPowerW), kAnalysisBand, &mask,
                                     options.tolerances.whiteness_slope_db_per_decade);
        white.details["plan"] = plan.name;
        white.details["lo_power_w"] = kReferenceLoPowerW;
        result.reports.push_back(std::move(white));
    }

    // Squeezed spectrum at the reference LO power.
    {
        const WindowPlan plan = plan_for(options.fast ? Preset::fig3_fast : Preset::fig3);
        const BinMask mask =
            mains_mask(plan, fs, 50.0, kMainsHarmonicsMasked, kMainsMaskHalfWidthBins);

        ScenarioRequest dark_req;
        dark_req.state = State::dark;
        dark_req.seed = run_seed(options.seed, "fig3-dark");
        const auto dark = simulate_and_analyze(make_scenario(plan, dark_req), plan, threads);

        ScenarioRequest req;
        req.state = State::squeezed;
        req.seed = run_seed(options.seed, "fig3-squeezed");
        const auto raw = simulate_and_analyze(make_scenario(plan, req), plan, threads);
        const auto sub = subtract_dark(raw, dark);

        const double expected = squeezing_db(kGain, kLoss);
        auto sq = measured_squeezing(sub.spectrum, 1.0, kAnalysisBand, &mask, expected,
                                     options.tolerances.squeezing_db);
        const auto raw_sq = measured_squeezing(raw, 1.0, kAnalysisBand, &mask, expected,
                                               options.tolerances.squeezing_db);
        sq.details["plan"] = plan.name;
        sq.details["dark_subtracted"] = true;
        sq.details["without_dark_subtraction_db"] = raw_sq.measured;
        sq.details["floored_bins"] = sub.floored_count();
        result.reports.push_back(std::move(sq));
    }

    // Low-frequency closure at 1 Hz with the calibrated dark and parasitic models.
    {
        const WindowPlan plan = closure_plan();
        ScenarioRequest req;
        req.state = State::squeezed;
        req.sample_rate_hz = kClosureSampleRateHz;
        req.with_mains = false;
        req.seed = run_seed(options.seed, "closure-squeezed");
        const auto raw = simulate_and_analyze(make_scenario(plan, req), plan, threads);

        ScenarioRequest dark_req = req;
        dark_req.state = State::dark;
        dark_req.seed = run_seed(options.seed, "closure-dark");
        const auto dark = simulate_and_analyze(make_scenario(plan, dark_req), plan, threads);
        const auto sub = subtract_dark(raw, dark);

        result.reports.push_back(check_level_at(raw, 1.0, 0, 1.0, kObservedDbAt1Hz,
                                                options.tolerances.low_frequency_db,
                                                "low_frequency_raw"));
        result.reports.push_back(check_level_at(sub.spectrum, 1.0, 0, 1.0, kRecoveredDbAt1Hz,
                                                options.tolerances.low_frequency_db,
                                                "low_frequency_dark_subtracted"));
    }

    return result;
}

} // namespace sqz
