#pragma once

// Checks tying simulated spectra back to measured properties of vacuum and
// squeezed light: LO-power linearity, whiteness, squeezing level, and
// calibration of the low-frequency dark/parasitic models.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqz/spectral.hpp"
#include "sqz/synth.hpp"

namespace sqz {

struct FrequencyBand {
    double lo_hz = 0.0;
    double hi_hz = 0.0;
};

/// Per segment, per bin; true excludes the bin from verification statistics.
struct BinMask {
    std::vector<std::vector<bool>> masked;

    std::size_t count() const;
    bool is_masked(std::size_t segment, std::size_t bin) const;
};

struct CheckReport {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    std::string units;
    nlohmann::json details = nlohmann::json::object();
};

nlohmann::json to_json(const CheckReport& report);

/// Masks bins within half_width_bins of n * f0 for n = 1..n_harmonics, on
/// the grid that run_plan produces.
BinMask mains_mask(const WindowPlan& plan, double sample_rate_hz, double fundamental_hz,
                   int n_harmonics, int half_width_bins);

/// Pairwise band-mean offsets against 10 log10(P_a / P_b). Inputs are keyed
/// by LO power in watts and should be dark-subtracted.
CheckReport check_linearity(const std::map<double, StitchedSpectrum>& by_lo_power_w,
                            const FrequencyBand& band, const BinMask* mask = nullptr,
                            double tolerance_db = 0.5);

/// Least-squares slope of dB versus log10(f) over unmasked bins, plus a
/// per-segment level consistency test at `sigma_multiple` standard errors.
CheckReport check_whiteness(const StitchedSpectrum& spectrum, const FrequencyBand& band,
                            const BinMask* mask = nullptr,
                            double slope_tolerance_db_per_decade = 0.2,
                            double sigma_multiple = 3.0);

/// Band-mean noise suppression, 10 log10(vacuum / squeezed), with the band
/// means taken in power.
CheckReport measured_squeezing(const StitchedSpectrum& squeezed, double vacuum_level,
                               const FrequencyBand& band, const BinMask* mask,
                               double expected_db, double tolerance_db = 0.5);
CheckReport measured_squeezing(const StitchedSpectrum& squeezed,
                               const StitchedSpectrum& vacuum_reference,
                               const FrequencyBand& band, const BinMask* mask,
                               double expected_db, double tolerance_db = 0.5);

/// Level in dB relative to `vacuum_level` at the bin nearest f, averaged in
/// power over +/- half_width_bins.
CheckReport check_level_at(const StitchedSpectrum& spectrum, double frequency_hz,
                           std::size_t half_width_bins, double vacuum_level, double expected_db,
                           double tolerance_db, std::string name);

struct DarkCalibration {
    DarkNoiseModel model;
    double dark_psd_at_f = 0.0;
    bool degenerate = false; // no dark noise at f; knee undefined
};

/// Dark PSD at f is the power difference of the observed and dark-subtracted
/// levels; floor comes from the mid-band clearance and the knee from the
/// value at f.
DarkCalibration calibrate_dark(double observed_db_at_f, double recovered_db_at_f,
                               double frequency_hz, double midband_floor_db);

ParasiticModel calibrate_parasitic(double recovered_db_at_f, double intrinsic_db,
                                   double frequency_hz, double alpha, double f_min_hz = 0.05);

} // namespace sqz
