#pragma once

// End-to-end verification: simulate the reference runs, analyze them with
// the figure plans and run every check.

#include <cstdint>
#include <optional>
#include <vector>

#include "sqz/verify.hpp"

namespace sqz {

struct SuiteTolerances {
    double linearity_db = 0.5;
    double whiteness_slope_db_per_decade = 0.2;
    double squeezing_db = 0.5;
    double low_frequency_db = 0.5;

    /// Every tolerance set to `value` (same number in each check's units).
    static SuiteTolerances uniform(double value);
    /// Estimator-limited tolerances scaled by sqrt(10) for the 10x-reduced
    /// averaging of the fast plans.
    SuiteTolerances widened_for_fast() const;
};

struct SuiteOptions {
    bool fast = true;
    std::uint64_t seed = 1;
    SuiteTolerances tolerances;
    /// When set, vacuum runs carry a dark floor at this level (dB rel.
    /// vacuum) and are analyzed without dark subtraction.
    std::optional<double> unsubtracted_dark_floor_db;
    unsigned threads = 0;
};

inline constexpr FrequencyBand kAnalysisBand{10.0, 3200.0};
inline constexpr int kMainsHarmonicsMasked = 10;
inline constexpr int kMainsMaskHalfWidthBins = 2;

/// Samples for the 1 Hz closure runs: a single band around 1 Hz at the
/// squeezed-plan RBW, sampled slowly so thousands of averages stay cheap.
inline constexpr double kClosureSampleRateHz = 16.0;
WindowPlan closure_plan();

struct SuiteResult {
    std::vector<CheckReport> reports;
    bool all_passed() const;
};

SuiteResult run_verification_suite(const SuiteOptions& options);

} // namespace sqz
