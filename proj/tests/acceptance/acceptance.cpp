// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../oracles.hpp"
#include "sqz/error.hpp"
#include "sqz/io.hpp"
#include "sqz/noise_models.hpp"
#include "sqz/presets.hpp"
#include "sqz/rng.hpp"
#include "sqz/spectral.hpp"
#include "sqz/suite.hpp"
#include "sqz/synth.hpp"
#include "sqz/verify.hpp"

using namespace sqz;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const CheckReport& find(const SuiteResult& r, const std::string& name) {
    for (const auto& c : r.reports)
        if (c.name == name)
            return c;
    throw Error("missing report " + name);
}

void criterion_1() {
    OpoParams opo;
    opo.gain = 12.0;
    const double db = variance_to_db(squeezed_variance(opo, 0.15));
    const double closed = 10.0 * std::log10(0.15 + 0.85 / 12.0);
    const bool ok = std::abs(db - closed) <= 1e-12 && std::abs(db - (-6.56)) <= 0.01;
    report(1, "squeezing formula golden value", ok,
           fmt("%.5f dB (closed form %.5f), target -6.56 +/- 0.01", db, closed));
}

void criteria_2_3(const SuiteResult& fast) {
    const auto& sq = find(fast, "squeezing_level");
    report(2, "end-to-end squeezing, fig3-fast", std::abs(sq.measured - 6.56) <= 0.3,
           fmt("%.3f dB, target 6.56 +/- 0.3 (without dark subtraction %.3f dB)", sq.measured,
               sq.details.at("without_dark_subtraction_db").get<double>()));

    const auto& lin = find(fast, "linearity");
    bool ok = lin.passed;
    std::ostringstream os;
    for (const auto& p : lin.details.at("pairs")) {
        const auto w = p.at("lo_power_w");
        const double doublings = std::log2(w[1].get<double>() / w[0].get<double>());
        const double per_doubling = p.at("offset_db").get<double>() / doublings;
        ok = ok && std::abs(p.at("offset_db").get<double>() - p.at("expected_db").get<double>()) <= 0.3;
        os << fmt("%g->%g uW %.3f dB/doubling; ", w[0].get<double>() * 1e6,
                  w[1].get<double>() * 1e6, per_doubling);
    }
    report(3, "vacuum linearity, fig2-fast, dark subtracted", ok,
           os.str() + "target 3.01 +/- 0.3 per doubling");
}

void criterion_5(const SuiteResult& fast) {
    const auto& raw = find(fast, "low_frequency_raw");
    const auto& sub = find(fast, "low_frequency_dark_subtracted");
    report(5, "1 Hz closure", std::abs(raw.measured + 1.5) <= 0.5 && std::abs(sub.measured + 3.5) <= 0.5,
           fmt("raw %.3f dB (target -1.5 +/- 0.5), dark-subtracted %.3f dB (target -3.5 +/- 0.5)",
               raw.measured, sub.measured));
}

void criterion_4(const SuiteResult& fast) {
    using namespace presets;
    const WindowPlan plan = plan_for(Preset::fig2);
    const double fs = kDefaultSampleRateHz;
    const BinMask mask = mains_mask(plan, fs, 50.0, kMainsHarmonicsMasked, kMainsMaskHalfWidthBins);

    StitchedSpectrum dark;
    {
        ScenarioRequest req;
        req.state = State::dark;
        req.seed = rng::derive_seed(1, "acceptance-whiteness-dark");
        const auto x = compose_scenario(make_scenario(plan, req));
        dark = run_plan(x, fs, plan);
    }
    StitchedSpectrum vac;
    {
        ScenarioRequest req;
        req.state = State::vacuum;
        req.seed = rng::derive_seed(1, "acceptance-whiteness-vacuum");
        const auto x = compose_scenario(make_scenario(plan, req));
        vac = run_plan(x, fs, plan);
    }
    const auto sub = subtract_dark(vac, dark);
    const auto w = check_whiteness(sub.spectrum, kAnalysisBand, &mask, 0.2);
    const auto& wf = find(fast, "whiteness");
    report(4, "whiteness 10 Hz-3.2 kHz, fig2 full averaging", w.passed,
           fmt("slope %.4f dB/decade, target 0 +/- 0.2; segment levels %s; fig2-fast slope %.4f",
               w.measured, w.details.at("segment_levels_passed").get<bool>() ? "consistent" : "inconsistent",
               wf.measured));
}

void criterion_6() {
    // Relative error is taken on V1*V2 against 1 + l(1-l)(sqrt g - 1/sqrt g)^2.
    // On the excess alone, rounding of the product (~1e-16) dominates once the
    // right side drops below ~1e-6, so that figure is shown but not gated.
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> gain(1.0, 100.0), loss(0.0, 1.0);
    double worst = 0.0, worst_excess = 0.0, smallest_rhs = 1e300;
    bool bounded = true;
    for (int i = 0; i < 10000; ++i) {
        OpoParams opo;
        opo.gain = gain(rng);
        const double l = loss(rng);
        const auto p = quadrature_pair(opo, l);
        const double product = p.v_squeezed * p.v_antisqueezed;
        const double s = std::sqrt(opo.gain) - 1.0 / std::sqrt(opo.gain);
        const double rhs = l * (1.0 - l) * s * s;
        worst = std::max(worst, std::abs(product - (1.0 + rhs)) / product);
        if (rhs > 0.0) {
            worst_excess = std::max(worst_excess, std::abs(product - 1.0 - rhs) / rhs);
            smallest_rhs = std::min(smallest_rhs, rhs);
        }
        bounded = bounded && product >= 1.0;
    }
    report(6, "uncertainty product over 1e4 draws", worst <= 1e-10 && bounded,
           fmt("max relative error %.2e (limit 1e-10), V1*V2 >= 1 %s; on the excess alone %.2e "
               "(smallest excess %.1e)",
               worst, bounded ? "always" : "violated", worst_excess, smallest_rhs));
}

void criterion_7() {
    // Parseval: a vacuum record has variance fs/2 in vacuum-relative units.
    bool parseval_ok;
    std::string parseval_detail;
    {
        SimScenario s;
        s.sample_rate_hz = 8192.0;
        s.analysis_max_hz = 3200.0;
        s.seed = 7;
        const std::size_t n = 4096, n_avg = 100;
        const std::size_t total = samples_for_averages(n, n_avg, 0.5);
        s.duration_s = static_cast<double>(total) / s.sample_rate_hz;
        const auto x = synth_quantum_noise(s, total);
        const auto seg = averaged_psd(x, s.sample_rate_hz, 1.5 * s.sample_rate_hz / n, n_avg);
        double integral = 0.0;
        for (const auto& b : seg.bins)
            integral += b.value * seg.bin_spacing_hz;
        const double sigma2 = s.sample_rate_hz / 2.0;
        double s2 = 0, s4 = 0, cross = 0;
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n);
        for (std::size_t i = 0; i < n; ++i) {
            s2 += w[i] * w[i];
            s4 += std::pow(w[i], 4);
            if (i + n / 2 < n)
                cross += w[i] * w[i] * w[i + n / 2] * w[i + n / 2];
        }
        const double var_one = 2 * sigma2 * sigma2 * s4 / (s2 * s2);
        const double cov = 2 * sigma2 * sigma2 * cross / (s2 * s2);
        const double se = std::sqrt((n_avg * var_one + 2.0 * (n_avg - 1) * cov) / (n_avg * n_avg));
        parseval_ok = std::abs(integral - sigma2) <= 3 * se;
        parseval_detail = fmt("Parseval %.2f SE", (integral - sigma2) / se);
    }

    bool sine_ok = true;
    std::string sine_detail = "sinusoid A^2/2 error";
    {
        const double fs = 16384.0, a = 1.7, f0 = 80.0;
        std::vector<double> x(6 * 98304);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = a * std::cos(2 * std::numbers::pi * f0 * i / fs + 0.4);
        for (double rbw : {0.25, 1.0, 4.0}) {
            const auto seg = averaged_psd(x, fs, rbw, 4);
            double p = 0.0;
            for (const auto& b : seg.bins)
                if (std::abs(b.frequency_hz - f0) <= 6 * seg.bin_spacing_hz)
                    p += b.value * seg.bin_spacing_hz;
            const double err = p / (a * a / 2) - 1.0;
            sine_ok = sine_ok && std::abs(err) <= 0.01;
            sine_detail += fmt(" %gHz:%.1e", rbw, err);
        }
    }

    bool scaling_ok = true;
    std::string scaling_detail = "scatter ratio/sqrt(n ratio)";
    {
        const double fs = 1024.0, rbw = 6.0;
        const std::size_t n = segment_length_for_rbw(rbw, fs);
        std::vector<double> sd;
        const std::size_t counts[] = {10, 40, 160};
        for (std::size_t n_avg : counts) {
            const auto x = test::white_noise(samples_for_averages(n, n_avg, 0.5), 1.0, fs, 300 + n_avg);
            const auto seg = averaged_psd(x, fs, rbw, n_avg);
            std::vector<double> v;
            for (const auto& b : seg.bins)
                if (b.frequency_hz >= 20.0 && b.frequency_hz <= 480.0)
                    v.push_back(b.value);
            sd.push_back(test::stddev(v) / test::mean(v));
        }
        for (int i = 0; i < 2; ++i) {
            const double ratio = (sd[i] / sd[i + 1]) / std::sqrt(double(counts[i + 1]) / counts[i]);
            scaling_ok = scaling_ok && ratio <= 1.3 && ratio >= 1.0 / 1.3;
            scaling_detail += fmt(" %zu->%zu:%.3f", counts[i], counts[i + 1], ratio);
        }
    }
    report(7, "estimator oracles", parseval_ok && sine_ok && scaling_ok,
           parseval_detail + " (limit 3); " + sine_detail + " (limit 1%); " + scaling_detail +
               " (limit x1.3)");
}

void criterion_8() {
    using namespace presets;
    const WindowPlan plan = plan_for(Preset::fig3_fast);
    ScenarioRequest req;
    req.state = State::squeezed;
    req.seed = 424242;
    const SimScenario s = make_scenario(plan, req);
    const auto a = compose_scenario(s, {1});
    const auto b = compose_scenario(s, {4});
    const auto c = compose_scenario(s, {2});
    const bool series_same = a.size() == b.size() && a.size() == c.size() &&
                             std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0 &&
                             std::memcmp(a.data(), c.data(), a.size() * sizeof(double)) == 0;

    const fs::path dir = fs::temp_directory_path() / ("sqz_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto ma = io::describe(s, a.size());
    auto mb = io::describe(s, b.size());
    io::write_time_series(dir / "a", a, ma, true);
    io::write_time_series(dir / "b", b, mb, true);
    const bool files_same = io::file_sha256(dir / "a.f64") == io::file_sha256(dir / "b.f64") &&
                            io::file_sha256(dir / "a.meta") == io::file_sha256(dir / "b.meta");
    fs::remove_all(dir);

    const auto sa = run_plan(a, s.sample_rate_hz, plan, {kDefaultOverlap, 1});
    const auto sb = run_plan(a, s.sample_rate_hz, plan, {kDefaultOverlap, 4});
    bool spectra_same = sa.segments.size() == sb.segments.size();
    for (std::size_t i = 0; spectra_same && i < sa.segments.size(); ++i) {
        const auto& x = sa.segments[i].bins;
        const auto& y = sb.segments[i].bins;
        spectra_same = x.size() == y.size() &&
                       std::memcmp(x.data(), y.data(), x.size() * sizeof(SpectrumBin)) == 0;
    }
    report(8, "determinism across thread counts", series_same && files_same && spectra_same,
           fmt("time series %s, files %s, spectra %s (%zu samples, threads 1/2/4)",
               series_same ? "identical" : "differ", files_same ? "byte-identical" : "differ",
               spectra_same ? "bit-identical" : "differ", a.size()));
}

} // namespace

int main() {
    try {
        criterion_1();
        SuiteOptions options;
        options.fast = true;
        options.seed = 1;
        options.tolerances.linearity_db = 0.3;
        options.tolerances.squeezing_db = 0.3;
        options.tolerances.low_frequency_db = 0.5;
        const SuiteResult fast = run_verification_suite(options);
        criteria_2_3(fast);
        criterion_4(fast);
        criterion_5(fast);
        criterion_6();
        criterion_7();
        criterion_8();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance suite aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
