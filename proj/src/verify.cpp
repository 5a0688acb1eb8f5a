#include "sqz/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sqz/error.hpp"

namespace sqz {

namespace {

constexpr double kDbPerNeper = 10.0 / std::numbers::ln10;

struct Selected {
    std::size_t segment;
    std::size_t bin;
    double frequency_hz;
    double value;
};

std::vector<Selected> select_bins(const StitchedSpectrum& spectrum, const FrequencyBand& band,
                                  const BinMask* mask) {
    std::vector<Selected> out;
    for (std::size_t s = 0; s < spectrum.segments.size(); ++s) {
        const auto& seg = spectrum.segments[s];
        for (std::size_t k = 0; k < seg.bins.size(); ++k) {
            const auto& b = seg.bins[k];
            if (b.frequency_hz < band.lo_hz || b.frequency_hz > band.hi_hz)
                continue;
            if (mask != nullptr && mask->is_masked(s, k))
                continue;
            out.push_back({s, k, b.frequency_hz, b.value});
        }
    }
    return out;
}

void require_psd(const StitchedSpectrum& spectrum) {
    if (spectrum.unit != SpectrumUnit::psd_rel_vacuum)
        throw ConfigError("verification expects PSD (not dB) spectra");
}

void require_same_grid(const StitchedSpectrum& a, const StitchedSpectrum& b) {
    if (a.segments.size() != b.segments.size())
        throw GridMismatchError("spectra were analyzed with different plans");
    for (std::size_t s = 0; s < a.segments.size(); ++s) {
        const auto& sa = a.segments[s];
        const auto& sb = b.segments[s];
        if (sa.bins.size() != sb.bins.size() || sa.rbw_hz != sb.rbw_hz)
            throw GridMismatchError("spectra were analyzed with different plans");
        for (std::size_t k = 0; k < sa.bins.size(); ++k)
            if (std::abs(sa.bins[k].frequency_hz - sb.bins[k].frequency_hz) >
                1e-9 * std::max(1.0, sa.bins[k].frequency_hz))
                throw GridMismatchError("spectra bin frequencies differ");
    }
}

double mean_value(const std::vector<Selected>& bins) {
    double sum = 0.0;
    for (const auto& b : bins)
        sum += b.value;
    return sum / static_cast<double>(bins.size());
}

// Relative standard error of a power-domain mean over `bins`, for a flat
// underlying spectrum. Analytic segments (n_averages == 0) contribute none.
double relative_standard_error(const StitchedSpectrum& spectrum,
                               const std::vector<Selected>& bins) {
    if (bins.empty())
        return 0.0;
    std::vector<std::size_t> per_segment(spectrum.segments.size(), 0);
    for (const auto& b : bins)
        ++per_segment[b.segment];
    double variance = 0.0;
    for (std::size_t s = 0; s < per_segment.size(); ++s) {
        const auto& seg = spectrum.segments[s];
        if (per_segment[s] == 0 || seg.n_averages == 0)
            continue;
        const double adjacent =
            per_segment[s] > 1 ? estimator::adjacent_bin_factor(seg.segment_length) : 1.0;
        variance += static_cast<double>(per_segment[s]) * seg.relative_variance() * adjacent;
    }
    return std::sqrt(variance) / static_cast<double>(bins.size());
}

std::string describe_band(const FrequencyBand& band) {
    std::ostringstream os;
    os << band.lo_hz << "-" << band.hi_hz << " Hz";
    return os.str();
}

} // namespace

std::size_t BinMask::count() const {
    std::size_t n = 0;
    for (const auto& seg : masked)
        n += static_cast<std::size_t>(std::count(seg.begin(), seg.end(), true));
    return n;
}

bool BinMask::is_masked(std::size_t segment, std::size_t bin) const {
    return segment < masked.size() && bin < masked[segment].size() && masked[segment][bin];
}

nlohmann::json to_json(const CheckReport& report) {
    return {
        {"name", report.name},
        {"passed", report.passed},
        {"measured", {{"value", report.measured}, {"units", report.units}}},
        {"expected", {{"value", report.expected}, {"units", report.units}}},
        {"tolerance", {{"value", report.tolerance}, {"units", report.units}}},
        {"details", report.details},
    };
}

BinMask mains_mask(const WindowPlan& plan, double sample_rate_hz, double fundamental_hz,
                   int n_harmonics, int half_width_bins) {
    if (!(fundamental_hz > 0.0))
        throw ConfigError("mains fundamental must be positive");
    const auto grids = plan_bin_frequencies(plan, sample_rate_hz);
    BinMask mask;
    for (const auto& freqs : grids) {
        std::vector<bool> m(freqs.size(), false);
        if (freqs.size() >= 2) {
            const double df = freqs[1] - freqs[0];
            for (int n = 1; n <= n_harmonics; ++n) {
                const double f = n * fundamental_hz;
                const double offset = std::round((f - freqs.front()) / df);
                for (int j = -half_width_bins; j <= half_width_bins; ++j) {
                    const double idx = offset + j;
                    if (idx >= 0.0 && idx < static_cast<double>(freqs.size()))
                        m[static_cast<std::size_t>(idx)] = true;
                }
            }
        }
        mask.masked.push_back(std::move(m));
    }
    return mask;
}

CheckReport check_linearity(const std::map<double, StitchedSpectrum>& by_lo_power_w,
                            const FrequencyBand& band, const BinMask* mask,
                            double tolerance_db) {
    if (by_lo_power_w.size() < 2)
        throw ConfigError("linearity check needs spectra at two or more LO powers");
    const StitchedSpectrum& first = by_lo_power_w.begin()->second;
    for (const auto& [power, spectrum] : by_lo_power_w) {
        require_psd(spectrum);
        require_same_grid(first, spectrum);
    }

    std::vector<std::pair<double, double>> levels; // (power, band-mean PSD)
    for (const auto& [power, spectrum] : by_lo_power_w) {
        const auto bins = select_bins(spectrum, band, mask);
        if (bins.empty())
            throw InsufficientDataError("linearity check: no unmasked bins in " +
                                        describe_band(band));
        levels.emplace_back(power, mean_value(bins));
    }

    CheckReport report;
    report.name = "linearity";
    report.units = "dB";
    report.tolerance = tolerance_db;
    report.passed = true;
    report.details["band_hz"] = {band.lo_hz, band.hi_hz};
    auto& pairs = report.details["pairs"] = nlohmann::json::array();
    double worst = -1.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = i + 1; j < levels.size(); ++j) {
            const double expected = 10.0 * std::log10(levels[j].first / levels[i].first);
            const double measured = 10.0 * std::log10(levels[j].second / levels[i].second);
            const double deviation = std::abs(measured - expected);
            const bool ok = deviation <= tolerance_db;
            report.passed = report.passed && ok;

            // Per-segment breakdown, informational.
            nlohmann::json segments = nlohmann::json::array();
            const auto& lo = by_lo_power_w.at(levels[i].first);
            const auto& hi = by_lo_power_w.at(levels[j].first);
            for (std::size_t s = 0; s < lo.segments.size(); ++s) {
                StitchedSpectrum one_lo;
                StitchedSpectrum one_hi;
                one_lo.segments = {lo.segments[s]};
                one_hi.segments = {hi.segments[s]};
                BinMask seg_mask;
                if (mask != nullptr && s < mask->masked.size())
                    seg_mask.masked = {mask->masked[s]};
                const auto bl = select_bins(one_lo, band, &seg_mask);
                const auto bh = select_bins(one_hi, band, &seg_mask);
                if (bl.empty())
                    continue;
                segments.push_back({{"segment", s},
                                    {"offset_db", 10.0 * std::log10(mean_value(bh) / mean_value(bl))}});
            }
            pairs.push_back({{"lo_power_w", {levels[i].first, levels[j].first}},
                             {"offset_db", measured},
                             {"expected_db", expected},
                             {"passed", ok},
                             {"segments", segments}});
            if (deviation > worst) {
                worst = deviation;
                report.measured = measured;
                report.expected = expected;
            }
        }
    }
    return report;
}

CheckReport check_whiteness(const StitchedSpectrum& spectrum, const FrequencyBand& band,
                            const BinMask* mask, double slope_tolerance_db_per_decade,
                            double sigma_multiple) {
    require_psd(spectrum);
    const auto bins = select_bins(spectrum, band, mask);
    if (bins.size() < 2)
        throw InsufficientDataError("whiteness check: fewer than two unmasked bins in " +
                                    describe_band(band));

    // Log-domain fit, each bin corrected by the mean of log chi-squared for
    // its segment's averaging.
    std::vector<double> bias(spectrum.segments.size(), 0.0);
    for (std::size_t s = 0; s < spectrum.segments.size(); ++s)
        if (spectrum.segments[s].n_averages > 0)
            bias[s] = estimator::log_bias_db(spectrum.segments[s].equivalent_dof());

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& b : bins) {
        if (!(b.value > 0.0))
            throw DomainError("whiteness check: non-positive PSD bin");
        const double x = std::log10(b.frequency_hz);
        const double y = 10.0 * std::log10(b.value) - bias[b.segment];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(bins.size());
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0))
        throw InsufficientDataError("whiteness check: band spans a single frequency");
    const double slope = (n * sxy - sx * sy) / denom;

    // Level consistency: each segment's band mean against the overall mean.
    const double overall = mean_value(bins);
    const double overall_se = relative_standard_error(spectrum, bins);
    bool levels_ok = true;
    nlohmann::json segments = nlohmann::json::array();
    double max_bin_dev_db = 0.0;
    for (std::size_t s = 0; s < spectrum.segments.size(); ++s) {
        std::vector<Selected> in_seg;
        for (const auto& b : bins)
            if (b.segment == s)
                in_seg.push_back(b);
        if (in_seg.empty())
            continue;
        const double level = mean_value(in_seg);
        const double dev_db = 10.0 * std::log10(level / overall);
        const double se = std::hypot(relative_standard_error(spectrum, in_seg), overall_se);
        const double limit_db = std::max(sigma_multiple * kDbPerNeper * se, 1e-9);
        const bool ok = std::abs(dev_db) <= limit_db;
        levels_ok = levels_ok && ok;
        for (const auto& b : in_seg)
            max_bin_dev_db = std::max(max_bin_dev_db, std::abs(10.0 * std::log10(b.value / overall)));
        segments.push_back({{"segment", s},
                            {"level_db_rel_band", dev_db},
                            {"limit_db", limit_db},
                            {"passed", ok}});
    }

    CheckReport report;
    report.name = "whiteness";
    report.units = "dB/decade";
    report.measured = slope;
    report.expected = 0.0;
    report.tolerance = slope_tolerance_db_per_decade;
    report.passed = std::abs(slope) <= slope_tolerance_db_per_decade && levels_ok;
    report.details = {{"band_hz", {band.lo_hz, band.hi_hz}},
                      {"bins_used", bins.size()},
                      {"band_level_db", 10.0 * std::log10(overall)},
                      {"segment_levels_passed", levels_ok},
                      {"segments", segments},
                      {"max_bin_deviation_db", max_bin_dev_db}};
    return report;
}

namespace {

CheckReport squeezing_report(double squeezed_mean, double vacuum_mean, double uncertainty_db,
                             double max_bin_db, std::size_t bins_used, const FrequencyBand& band,
                             double expected_db, double tolerance_db) {
    CheckReport report;
    report.name = "squeezing_level";
    report.units = "dB";
    report.measured = 10.0 * std::log10(vacuum_mean / squeezed_mean);
    report.expected = expected_db;
    report.tolerance = tolerance_db;
    report.passed = std::abs(report.measured - expected_db) <= tolerance_db;
    report.details = {{"band_hz", {band.lo_hz, band.hi_hz}},
                      {"bins_used", bins_used},
                      {"uncertainty_db", uncertainty_db},
                      {"max_bin_suppression_db", max_bin_db}};
    return report;
}

} // namespace

CheckReport measured_squeezing(const StitchedSpectrum& squeezed, double vacuum_level,
                               const FrequencyBand& band, const BinMask* mask,
                               double expected_db, double tolerance_db) {
    require_psd(squeezed);
    if (!(vacuum_level > 0.0))
        throw DomainError("vacuum level must be positive");
    const auto bins = select_bins(squeezed, band, mask);
    if (bins.empty())
        throw InsufficientDataError("squeezing check: no unmasked bins in " + describe_band(band));
    double max_bin_db = -std::numeric_limits<double>::infinity();
    for (const auto& b : bins)
        if (b.value > 0.0)
            max_bin_db = std::max(max_bin_db, 10.0 * std::log10(vacuum_level / b.value));
    const double se = relative_standard_error(squeezed, bins);
    return squeezing_report(mean_value(bins), vacuum_level, kDbPerNeper * se, max_bin_db,
                            bins.size(), band, expected_db, tolerance_db);
}

CheckReport measured_squeezing(const StitchedSpectrum& squeezed,
                               const StitchedSpectrum& vacuum_reference,
                               const FrequencyBand& band, const BinMask* mask,
                               double expected_db, double tolerance_db) {
    require_psd(squeezed);
    require_psd(vacuum_reference);
    require_same_grid(squeezed, vacuum_reference);
    const auto sq = select_bins(squeezed, band, mask);
    const auto vac = select_bins(vacuum_reference, band, mask);
    if (sq.empty())
        throw InsufficientDataError("squeezing check: no unmasked bins in " + describe_band(band));
    double max_bin_db = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sq.size(); ++i)
        if (sq[i].value > 0.0 && vac[i].value > 0.0)
            max_bin_db = std::max(max_bin_db, 10.0 * std::log10(vac[i].value / sq[i].value));
    const double se = std::hypot(relative_standard_error(squeezed, sq),
                                 relative_standard_error(vacuum_reference, vac));
    return squeezing_report(mean_value(sq), mean_value(vac), kDbPerNeper * se, max_bin_db,
                            sq.size(), band, expected_db, tolerance_db);
}

CheckReport check_level_at(const StitchedSpectrum& spectrum, double frequency_hz,
                           std::size_t half_width_bins, double vacuum_level, double expected_db,
                           double tolerance_db, std::string name) {
    require_psd(spectrum);
    for (std::size_t s = 0; s < spectrum.segments.size(); ++s) {
        const auto& seg = spectrum.segments[s];
        if (seg.bins.empty() || frequency_hz < seg.bins.front().frequency_hz ||
            frequency_hz > seg.bins.back().frequency_hz)
            continue;
        std::size_t nearest = 0;
        for (std::size_t k = 1; k < seg.bins.size(); ++k)
            if (std::abs(seg.bins[k].frequency_hz - frequency_hz) <
                std::abs(seg.bins[nearest].frequency_hz - frequency_hz))
                nearest = k;
        const std::size_t lo = nearest >= half_width_bins ? nearest - half_width_bins : 0;
        const std::size_t hi = std::min(seg.bins.size() - 1, nearest + half_width_bins);
        std::vector<Selected> picked;
        for (std::size_t k = lo; k <= hi; ++k)
            picked.push_back({s, k, seg.bins[k].frequency_hz, seg.bins[k].value});

        CheckReport report;
        report.name = std::move(name);
        report.units = "dB";
        report.measured = 10.0 * std::log10(mean_value(picked) / vacuum_level);
        report.expected = expected_db;
        report.tolerance = tolerance_db;
        report.passed = std::abs(report.measured - expected_db) <= tolerance_db;
        double rel_var = seg.relative_variance();
        if (picked.size() > 1)
            rel_var *= estimator::adjacent_bin_factor(seg.segment_length) /
                       static_cast<double>(picked.size());
        report.details = {{"frequency_hz", seg.bins[nearest].frequency_hz},
                          {"bins_used", picked.size()},
                          {"segment", s},
                          {"n_averages", seg.n_averages},
                          {"signal_only_uncertainty_db", kDbPerNeper * std::sqrt(rel_var)}};
        return report;
    }
    std::ostringstream os;
    os << "no segment covers " << frequency_hz << " Hz";
    throw InsufficientDataError(os.str());
}

DarkCalibration calibrate_dark(double observed_db_at_f, double recovered_db_at_f,
                               double frequency_hz, double midband_floor_db) {
    if (!(frequency_hz > 0.0))
        throw CalibrationError("calibration frequency must be positive");
    if (recovered_db_at_f > observed_db_at_f)
        throw CalibrationError(
            "dark-subtracted level cannot exceed the observed level (dark power would be negative)");

    DarkCalibration out;
    out.dark_psd_at_f = db_to_variance(observed_db_at_f) - db_to_variance(recovered_db_at_f);
    if (out.dark_psd_at_f <= 0.0) {
        out.degenerate = true;
        out.dark_psd_at_f = 0.0;
        out.model = {0.0, 0.0};
        return out;
    }
    const double floor = db_to_variance(midband_floor_db);
    if (!(floor > 0.0))
        throw CalibrationError("mid-band dark floor must be finite");
    if (out.dark_psd_at_f < floor)
        throw CalibrationError("dark level at the calibration frequency is below the mid-band floor");
    out.model = {floor, frequency_hz * (out.dark_psd_at_f / floor - 1.0)};
    return out;
}

ParasiticModel calibrate_parasitic(double recovered_db_at_f, double intrinsic_db,
                                   double frequency_hz, double alpha, double f_min_hz) {
    if (!(frequency_hz >= f_min_hz))
        throw CalibrationError("calibration frequency must not lie below the regularization bound");
    if (!(alpha >= 0.0))
        throw CalibrationError("parasitic exponent must be >= 0");
    if (recovered_db_at_f < intrinsic_db)
        throw CalibrationError(
            "recovered level below the intrinsic squeezing level (parasitic power would be negative)");
    const double at_f = db_to_variance(recovered_db_at_f) - db_to_variance(intrinsic_db);
    return {at_f * std::pow(frequency_hz, alpha), alpha, f_min_hz};
}

} // namespace sqz
