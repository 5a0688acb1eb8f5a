#pragma once

// Averaged-periodogram PSD estimation with analyzer-style resolution
// bandwidths, multi-band plans and dark-noise subtraction.
//
// RBW is the equivalent noise bandwidth of the taper: a Hann window of N
// samples at rate fs has ENBW = 1.5 fs / N. PSDs are one-sided, per Hz.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sqz {

inline constexpr double kHannEnbwFactor = 1.5;
inline constexpr double kDefaultOverlap = 0.5;

struct BandSpec {
    double f_lo_hz = 0.0;
    double f_hi_hz = 0.0;
    double rbw_hz = 1.0;
    std::size_t n_averages = 1;
};

struct WindowPlan {
    std::string name;
    std::vector<BandSpec> bands;

    void validate() const;
    /// Samples needed by the most demanding band.
    std::size_t required_samples(double sample_rate_hz, double overlap = kDefaultOverlap) const;
    double max_frequency_hz() const;
    /// Averages divided by `divisor`, rounded up.
    WindowPlan scaled_averages(double divisor, std::string new_name) const;
};

/// Five-band plan of the vacuum-noise measurement.
WindowPlan fig2_plan();
/// Five-band plan of the squeezed-state measurement.
WindowPlan fig3_plan();

struct SpectrumBin {
    double frequency_hz = 0.0;
    double value = 0.0;
};

struct SpectrumSegment {
    double f_lo_hz = 0.0;
    double f_hi_hz = 0.0;
    double rbw_hz = 0.0;
    std::size_t n_averages = 0;
    std::size_t segment_length = 0;
    double overlap = kDefaultOverlap;
    double bin_spacing_hz = 0.0;
    std::vector<SpectrumBin> bins;

    /// Relative variance of one bin for white Gaussian input, including the
    /// correlation between overlapping segments.
    double relative_variance() const;
    /// Equivalent chi-squared degrees of freedom of one bin.
    double equivalent_dof() const;
};

enum class SpectrumUnit { psd_rel_vacuum, db_rel_vacuum };

struct StitchedSpectrum {
    std::vector<SpectrumSegment> segments;
    std::string provenance;
    SpectrumUnit unit = SpectrumUnit::psd_rel_vacuum;
    double sample_rate_hz = 0.0;

    std::size_t bin_count() const;
};

struct PsdOptions {
    double overlap = kDefaultOverlap;
    unsigned threads = 0;
};

std::size_t segment_length_for_rbw(double rbw_hz, double sample_rate_hz);
/// As above, throwing InsufficientDataError when N exceeds `available`.
std::size_t segment_length_for_rbw(double rbw_hz, double sample_rate_hz, std::size_t available);

std::size_t hop_length(std::size_t segment_length, double overlap);
std::size_t samples_for_averages(std::size_t segment_length, std::size_t n_averages,
                                 double overlap);

/// Mean of n_averages Hann-tapered periodograms over the leading samples,
/// covering 0..fs/2. Partial sums are combined in a fixed pairwise tree, so
/// the result is bit-identical for any thread count.
SpectrumSegment averaged_psd(std::span<const double> samples, double sample_rate_hz,
                             double rbw_hz, std::size_t n_averages,
                             const PsdOptions& options = {});

/// Bins with f_lo <= f <= f_hi.
SpectrumSegment band_select(const SpectrumSegment& segment, double f_lo_hz, double f_hi_hz);

StitchedSpectrum run_plan(std::span<const double> samples, double sample_rate_hz,
                          const WindowPlan& plan, const PsdOptions& options = {});

/// Bin frequencies run_plan would produce, per band.
std::vector<std::vector<double>> plan_bin_frequencies(const WindowPlan& plan,
                                                      double sample_rate_hz);

StitchedSpectrum to_db_rel_vacuum(const StitchedSpectrum& spectrum, double vacuum_level);
StitchedSpectrum to_db_rel_vacuum(const StitchedSpectrum& spectrum,
                                  const StitchedSpectrum& vacuum_reference);

struct DarkSubtraction {
    SpectrumSegment segment;
    std::vector<std::size_t> floored_bins;
    double floor_value = 0.0;
};

/// psd_signal - psd_dark per bin. Non-positive differences are clamped to
/// `floor` (default: smallest positive difference x 1e-3) and reported.
DarkSubtraction subtract_dark(const SpectrumSegment& signal, const SpectrumSegment& dark,
                              std::optional<double> floor = std::nullopt);

struct StitchedDarkSubtraction {
    StitchedSpectrum spectrum;
    std::vector<std::vector<std::size_t>> floored_bins; // per segment
    std::size_t floored_count() const;
};

StitchedDarkSubtraction subtract_dark(const StitchedSpectrum& signal,
                                      const StitchedSpectrum& dark,
                                      std::optional<double> floor = std::nullopt);

namespace estimator {

/// Correlation coefficient between periodogram bins of two Hann segments
/// `shift` samples apart (white Gaussian input).
double segment_correlation(std::size_t segment_length, std::size_t shift);

double relative_variance(std::size_t segment_length, std::size_t n_averages, double overlap);

/// 1 + 2 sum_j rho_j over neighbouring-bin correlations; variance inflation
/// for a mean over many adjacent bins.
double adjacent_bin_factor(std::size_t segment_length);

/// Mean of 10 log10(X) for X ~ chi2(dof)/dof.
double log_bias_db(double dof);

} // namespace estimator

} // namespace sqz
