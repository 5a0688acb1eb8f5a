#include "sqz/spectral.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "fft.hpp"
#include "sqz/error.hpp"
#include "sqz/parallel.hpp"

namespace sqz {

namespace {

std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(step * static_cast<double>(i));
    return w;
}

void add_into(std::vector<double>& acc, const std::vector<double>& x) {
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += x[i];
}

// Pairwise summation in a fixed binary tree: equal-height partial sums merge
// as soon as they meet, the remainder folds from the top of the stack.
class PairwiseSum {
public:
    void push(std::vector<double> leaf) {
        stack_.emplace_back(0, std::move(leaf));
        while (stack_.size() >= 2 && stack_[stack_.size() - 1].first == stack_[stack_.size() - 2].first) {
            auto top = std::move(stack_.back());
            stack_.pop_back();
            add_into(stack_.back().second, top.second);
            ++stack_.back().first;
        }
    }

    std::vector<double> finish() {
        while (stack_.size() >= 2) {
            auto top = std::move(stack_.back());
            stack_.pop_back();
            add_into(stack_.back().second, top.second);
        }
        return stack_.empty() ? std::vector<double>{} : std::move(stack_.back().second);
    }

private:
    std::vector<std::pair<int, std::vector<double>>> stack_;
};

constexpr std::size_t kChunkLeaves = 8;

bool same_grid(const SpectrumSegment& a, const SpectrumSegment& b) {
    if (a.bins.size() != b.bins.size())
        return false;
    if (std::abs(a.rbw_hz - b.rbw_hz) > 1e-12 * std::max(a.rbw_hz, b.rbw_hz))
        return false;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        const double fa = a.bins[i].frequency_hz;
        const double fb = b.bins[i].frequency_hz;
        if (std::abs(fa - fb) > 1e-9 * std::max({1.0, std::abs(fa), std::abs(fb)}))
            return false;
    }
    return true;
}

} // namespace

void WindowPlan::validate() const {
    if (bands.empty())
        throw ConfigError("window plan '" + name + "' has no bands");
    double previous_hi = 0.0;
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        std::ostringstream where;
        where << "plan '" << name << "' band " << i << ": ";
        if (!(b.rbw_hz > 0.0))
            throw ConfigError(where.str() + "RBW must be positive");
        if (!(b.f_hi_hz > b.f_lo_hz))
            throw ConfigError(where.str() + "upper edge must exceed lower edge");
        if (b.f_lo_hz < b.rbw_hz)
            throw ConfigError(where.str() + "lower edge must be >= RBW");
        if (b.n_averages < 1)
            throw ConfigError(where.str() + "needs at least one average");
        if (b.f_lo_hz < previous_hi)
            throw ConfigError(where.str() + "bands must be ascending and non-overlapping");
        previous_hi = b.f_hi_hz;
    }
}

std::size_t WindowPlan::required_samples(double sample_rate_hz, double overlap) const {
    std::size_t need = 0;
    for (const auto& b : bands) {
        const std::size_t n = segment_length_for_rbw(b.rbw_hz, sample_rate_hz);
        need = std::max(need, samples_for_averages(n, b.n_averages, overlap));
    }
    return need;
}

double WindowPlan::max_frequency_hz() const {
    double hi = 0.0;
    for (const auto& b : bands)
        hi = std::max(hi, b.f_hi_hz);
    return hi;
}

WindowPlan WindowPlan::scaled_averages(double divisor, std::string new_name) const {
    WindowPlan out{std::move(new_name), bands};
    for (auto& b : out.bands)
        b.n_averages = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(static_cast<double>(b.n_averages) / divisor)));
    return out;
}

WindowPlan fig2_plan() {
    return {"fig2",
            {
                {0.8, 3.2, 0.015625, 75},
                {10.0, 50.0, 0.25, 100},
                {50.0, 200.0, 1.0, 100},
                {200.0, 800.0, 2.0, 400},
                {800.0, 3200.0, 4.0, 400},
            }};
}

WindowPlan fig3_plan() {
    return {"fig3",
            {
                {1.0, 10.0, 0.0625, 30},
                {10.0, 50.0, 0.25, 100},
                {50.0, 200.0, 1.0, 100},
                {200.0, 800.0, 2.0, 400},
                {800.0, 3200.0, 4.0, 400},
            }};
}

double SpectrumSegment::relative_variance() const {
    if (n_averages == 0)
        return 0.0; // analytic spectrum
    return estimator::relative_variance(segment_length, n_averages, overlap);
}

double SpectrumSegment::equivalent_dof() const {
    const double v = relative_variance();
    return v > 0.0 ? 2.0 / v : std::numeric_limits<double>::infinity();
}

std::size_t StitchedSpectrum::bin_count() const {
    std::size_t n = 0;
    for (const auto& s : segments)
        n += s.bins.size();
    return n;
}

std::size_t segment_length_for_rbw(double rbw_hz, double sample_rate_hz) {
    if (!(rbw_hz > 0.0))
        throw ConfigError("RBW must be positive");
    if (!(sample_rate_hz > 2.0 * rbw_hz))
        throw ConfigError("sample rate must exceed twice the RBW");
    return static_cast<std::size_t>(std::llround(kHannEnbwFactor * sample_rate_hz / rbw_hz));
}

std::size_t segment_length_for_rbw(double rbw_hz, double sample_rate_hz, std::size_t available) {
    const std::size_t n = segment_length_for_rbw(rbw_hz, sample_rate_hz);
    if (n > available) {
        std::ostringstream os;
        os << "RBW " << rbw_hz << " Hz needs segments of " << n << " samples, only " << available
           << " available";
        throw InsufficientDataError(os.str());
    }
    return n;
}

std::size_t hop_length(std::size_t segment_length, double overlap) {
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw ConfigError("overlap fraction must lie in [0, 1)");
    const auto shared =
        static_cast<std::size_t>(std::llround(overlap * static_cast<double>(segment_length)));
    return std::max<std::size_t>(1, segment_length - shared);
}

std::size_t samples_for_averages(std::size_t segment_length, std::size_t n_averages,
                                 double overlap) {
    if (n_averages == 0)
        return 0;
    return segment_length + (n_averages - 1) * hop_length(segment_length, overlap);
}

SpectrumSegment averaged_psd(std::span<const double> samples, double sample_rate_hz,
                             double rbw_hz, std::size_t n_averages, const PsdOptions& options) {
    if (n_averages < 1)
        throw ConfigError("n_averages must be >= 1");
    const std::size_t n = segment_length_for_rbw(rbw_hz, sample_rate_hz, samples.size());
    const std::size_t hop = hop_length(n, options.overlap);
    const std::size_t need = samples_for_averages(n, n_averages, options.overlap);
    if (need > samples.size()) {
        std::ostringstream os;
        os << n_averages << " averages at RBW " << rbw_hz << " Hz need " << need
           << " samples, only " << samples.size() << " available";
        throw InsufficientDataError(os.str());
    }

    const std::vector<double> window = hann(n);
    double window_power = 0.0;
    for (double w : window)
        window_power += w * w;
    const std::size_t half = n / 2 + 1;
    const double scale = 2.0 / (sample_rate_hz * window_power);

    auto periodogram = [&](std::size_t index) {
        std::vector<double> tapered(n);
        const double* x = samples.data() + index * hop;
        for (std::size_t i = 0; i < n; ++i)
            tapered[i] = x[i] * window[i];
        std::vector<std::complex<double>> spectrum(half);
        detail::forward_real(tapered, spectrum);
        std::vector<double> p(half);
        for (std::size_t k = 0; k < half; ++k)
            p[k] = std::norm(spectrum[k]) * scale;
        p[0] *= 0.5;
        if (n % 2 == 0)
            p[half - 1] *= 0.5;
        return p;
    };

    const std::size_t chunks = (n_averages + kChunkLeaves - 1) / kChunkLeaves;
    std::vector<std::vector<double>> chunk_sums(chunks);
    parallel_for(chunks, options.threads, [&](std::size_t c) {
        PairwiseSum sum;
        const std::size_t end = std::min(n_averages, (c + 1) * kChunkLeaves);
        for (std::size_t i = c * kChunkLeaves; i < end; ++i)
            sum.push(periodogram(i));
        chunk_sums[c] = sum.finish();
    });
    PairwiseSum total;
    for (auto& s : chunk_sums)
        total.push(std::move(s));
    std::vector<double> mean = total.finish();

    SpectrumSegment seg;
    seg.f_lo_hz = 0.0;
    seg.f_hi_hz = sample_rate_hz / 2.0;
    seg.rbw_hz = rbw_hz;
    seg.n_averages = n_averages;
    seg.segment_length = n;
    seg.overlap = options.overlap;
    seg.bin_spacing_hz = sample_rate_hz / static_cast<double>(n);
    seg.bins.resize(half);
    const double inv = 1.0 / static_cast<double>(n_averages);
    for (std::size_t k = 0; k < half; ++k)
        seg.bins[k] = {static_cast<double>(k) * seg.bin_spacing_hz, mean[k] * inv};
    return seg;
}

SpectrumSegment band_select(const SpectrumSegment& segment, double f_lo_hz, double f_hi_hz) {
    SpectrumSegment out = segment;
    out.f_lo_hz = f_lo_hz;
    out.f_hi_hz = f_hi_hz;
    out.bins.clear();
    const double eps = 1e-9 * segment.bin_spacing_hz;
    for (const auto& b : segment.bins)
        if (b.frequency_hz >= f_lo_hz - eps && b.frequency_hz <= f_hi_hz + eps)
            out.bins.push_back(b);
    return out;
}

StitchedSpectrum run_plan(std::span<const double> samples, double sample_rate_hz,
                          const WindowPlan& plan, const PsdOptions& options) {
    plan.validate();
    if (plan.max_frequency_hz() > sample_rate_hz / 2.0)
        throw ConfigError("plan '" + plan.name + "' extends beyond the Nyquist frequency");

    StitchedSpectrum out;
    out.sample_rate_hz = sample_rate_hz;
    for (std::size_t i = 0; i < plan.bands.size(); ++i) {
        const auto& b = plan.bands[i];
        const std::size_t n = segment_length_for_rbw(b.rbw_hz, sample_rate_hz);
        const std::size_t need = samples_for_averages(n, b.n_averages, options.overlap);
        if (need > samples.size()) {
            std::ostringstream os;
            os << "band " << i << " (" << b.f_lo_hz << "-" << b.f_hi_hz << " Hz, RBW " << b.rbw_hz
               << " Hz, " << b.n_averages << " averages) needs " << need << " samples, only "
               << samples.size() << " available";
            throw InsufficientDataError(os.str());
        }
        out.segments.push_back(band_select(
            averaged_psd(samples, sample_rate_hz, b.rbw_hz, b.n_averages, options), b.f_lo_hz,
            b.f_hi_hz));
    }
    return out;
}

std::vector<std::vector<double>> plan_bin_frequencies(const WindowPlan& plan,
                                                      double sample_rate_hz) {
    std::vector<std::vector<double>> out;
    for (const auto& b : plan.bands) {
        const std::size_t n = segment_length_for_rbw(b.rbw_hz, sample_rate_hz);
        const double df = sample_rate_hz / static_cast<double>(n);
        const double eps = 1e-9 * df;
        std::vector<double> freqs;
        for (std::size_t k = 0; k <= n / 2; ++k) {
            const double f = static_cast<double>(k) * df;
            if (f >= b.f_lo_hz - eps && f <= b.f_hi_hz + eps)
                freqs.push_back(f);
        }
        out.push_back(std::move(freqs));
    }
    return out;
}

StitchedSpectrum to_db_rel_vacuum(const StitchedSpectrum& spectrum, double vacuum_level) {
    if (spectrum.unit != SpectrumUnit::psd_rel_vacuum)
        throw ConfigError("spectrum is already in dB");
    if (!(vacuum_level > 0.0))
        throw DomainError("vacuum reference level must be positive");
    StitchedSpectrum out = spectrum;
    out.unit = SpectrumUnit::db_rel_vacuum;
    for (auto& seg : out.segments)
        for (auto& b : seg.bins) {
            if (!(b.value > 0.0))
                throw DomainError("cannot express a non-positive PSD bin in dB");
            b.value = 10.0 * std::log10(b.value / vacuum_level);
        }
    return out;
}

StitchedSpectrum to_db_rel_vacuum(const StitchedSpectrum& spectrum,
                                  const StitchedSpectrum& vacuum_reference) {
    if (spectrum.unit != SpectrumUnit::psd_rel_vacuum ||
        vacuum_reference.unit != SpectrumUnit::psd_rel_vacuum)
        throw ConfigError("spectrum is already in dB");
    if (spectrum.segments.size() != vacuum_reference.segments.size())
        throw GridMismatchError("spectrum and vacuum reference have different segment counts");
    StitchedSpectrum out = spectrum;
    out.unit = SpectrumUnit::db_rel_vacuum;
    for (std::size_t s = 0; s < out.segments.size(); ++s) {
        const auto& ref = vacuum_reference.segments[s];
        if (!same_grid(out.segments[s], ref))
            throw GridMismatchError("spectrum and vacuum reference bins differ");
        for (std::size_t k = 0; k < ref.bins.size(); ++k) {
            auto& b = out.segments[s].bins[k];
            if (!(ref.bins[k].value > 0.0))
                throw DomainError("vacuum reference must be strictly positive");
            if (!(b.value > 0.0))
                throw DomainError("cannot express a non-positive PSD bin in dB");
            b.value = 10.0 * std::log10(b.value / ref.bins[k].value);
        }
    }
    return out;
}

DarkSubtraction subtract_dark(const SpectrumSegment& signal, const SpectrumSegment& dark,
                              std::optional<double> floor) {
    if (!same_grid(signal, dark))
        throw GridMismatchError("signal and dark spectra do not share a bin grid");

    DarkSubtraction out;
    out.segment = signal;
    double smallest_positive = 0.0;
    for (std::size_t k = 0; k < signal.bins.size(); ++k) {
        const double d = signal.bins[k].value - dark.bins[k].value;
        out.segment.bins[k].value = d;
        if (d > 0.0 && (smallest_positive == 0.0 || d < smallest_positive))
            smallest_positive = d;
    }
    out.floor_value = floor.value_or(smallest_positive * 1e-3);
    for (std::size_t k = 0; k < out.segment.bins.size(); ++k) {
        auto& v = out.segment.bins[k].value;
        if (!(v > 0.0)) {
            v = out.floor_value;
            out.floored_bins.push_back(k);
        }
    }
    return out;
}

std::size_t StitchedDarkSubtraction::floored_count() const {
    std::size_t n = 0;
    for (const auto& f : floored_bins)
        n += f.size();
    return n;
}

StitchedDarkSubtraction subtract_dark(const StitchedSpectrum& signal,
                                      const StitchedSpectrum& dark, std::optional<double> floor) {
    if (signal.segments.size() != dark.segments.size())
        throw GridMismatchError("signal and dark spectra have different segment counts");
    StitchedDarkSubtraction out;
    out.spectrum.provenance = signal.provenance;
    out.spectrum.unit = signal.unit;
    out.spectrum.sample_rate_hz = signal.sample_rate_hz;
    for (std::size_t s = 0; s < signal.segments.size(); ++s) {
        auto r = subtract_dark(signal.segments[s], dark.segments[s], floor);
        out.spectrum.segments.push_back(std::move(r.segment));
        out.floored_bins.push_back(std::move(r.floored_bins));
    }
    return out;
}

namespace estimator {

double segment_correlation(std::size_t segment_length, std::size_t shift) {
    if (shift >= segment_length)
        return 0.0;
    const std::vector<double> w = hann(segment_length);
    double cross = 0.0;
    double power = 0.0;
    for (std::size_t i = 0; i < segment_length; ++i) {
        power += w[i] * w[i];
        if (i + shift < segment_length)
            cross += w[i] * w[i + shift];
    }
    const double r = cross / power;
    return r * r;
}

double relative_variance(std::size_t segment_length, std::size_t n_averages, double overlap) {
    if (n_averages == 0)
        throw ConfigError("n_averages must be >= 1");
    const std::size_t hop = hop_length(segment_length, overlap);
    const double n = static_cast<double>(n_averages);
    double sum = 1.0;
    for (std::size_t m = 1; m < n_averages && m * hop < segment_length; ++m)
        sum += 2.0 * (1.0 - static_cast<double>(m) / n) * segment_correlation(segment_length, m * hop);
    return sum / n;
}

double adjacent_bin_factor(std::size_t segment_length) {
    const std::vector<double> w = hann(segment_length);
    double power = 0.0;
    for (double x : w)
        power += x * x;
    double factor = 1.0;
    // The squared Hann window has spectral lines at j = 0, 1, 2 only.
    for (int j = 1; j <= 3; ++j) {
        std::complex<double> acc = 0.0;
        const double step = -2.0 * std::numbers::pi * j / static_cast<double>(segment_length);
        for (std::size_t i = 0; i < segment_length; ++i)
            acc += w[i] * w[i] * std::polar(1.0, step * static_cast<double>(i));
        factor += 2.0 * std::norm(acc) / (power * power);
    }
    return factor;
}

double log_bias_db(double dof) {
    const double k = dof / 2.0;
    return 10.0 / std::numbers::ln10 * (boost::math::digamma(k) - std::log(k));
}

} // namespace estimator

} // namespace sqz
