// sqzsim: simulate, analyze and verify squeezed-light homodyne spectra.
//
// Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 I/O error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "sqz/error.hpp"
#include "sqz/io.hpp"
#include "sqz/noise_models.hpp"
#include "sqz/presets.hpp"
#include "sqz/spectral.hpp"
#include "sqz/suite.hpp"
#include "sqz/synth.hpp"
#include "sqz/verify.hpp"

namespace fs = std::filesystem;
using namespace sqz;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kConfigError = 2, kIoError = 3 };

struct Settings {
    std::string preset = "fast";
    std::string state = "squeezed";
    std::uint64_t seed = 1;
    double lo_power_uw = presets::kReferenceLoPowerW * 1e6;
    double gain = presets::kGain;
    double loss = presets::kLoss;
    double theta_rad = 0.0;
    double visibility = 1.0;
    std::optional<double> duration_s;
    std::optional<double> sample_rate_hz;
    bool mains = true;
    bool parasitic = true;
    std::string out = ".";
    std::string name;
    unsigned threads = 0;
    bool force = false;
    std::string input;
    std::string dark;
    std::optional<double> tolerance_db;
    std::optional<double> inject_dark_db;
};

presets::State state_of(const Settings& s) { return presets::parse_state(s.state); }

SimScenario build_scenario(const Settings& s, const WindowPlan& plan) {
    presets::ScenarioRequest req;
    req.state = state_of(s);
    req.lo_power_w = s.lo_power_uw * 1e-6;
    req.gain = s.gain;
    req.loss = s.loss;
    req.seed = s.seed;
    if (s.sample_rate_hz)
        req.sample_rate_hz = *s.sample_rate_hz;
    req.with_mains = s.mains;
    req.with_parasitic = s.parasitic;
    SimScenario scenario = presets::make_scenario(plan, req);
    scenario.homodyne.theta_rad = s.theta_rad;
    scenario.homodyne.visibility = s.visibility;
    if (s.duration_s)
        scenario.duration_s = *s.duration_s;
    scenario.validate();
    return scenario;
}

std::string default_run_name(const Settings& s) {
    std::ostringstream os;
    os << s.state << '-' << std::llround(s.lo_power_uw) << "uw-s" << s.seed;
    return os.str();
}

int cmd_spectrum(const Settings& s) {
    const auto plan = presets::plan_for(presets::parse_preset(s.preset));
    SimScenario scenario;
    scenario.homodyne.lo_power_w = s.lo_power_uw * 1e-6;
    scenario.homodyne.theta_rad = s.theta_rad;
    scenario.homodyne.visibility = s.visibility;
    if (state_of(s) == presets::State::squeezed) {
        scenario.squeezer = presets::squeezer(s.gain, s.loss);
        scenario.squeezer->opo.validate();
        scenario.squeezer->losses.validate();
    } else if (state_of(s) == presets::State::dark) {
        scenario.homodyne.lo_blocked = true;
    }
    const double level = quantum_psd(scenario);

    std::cout << "# state=" << s.state << " gain=" << s.gain << " loss=" << s.loss
              << " theta_rad=" << s.theta_rad << " lo_power_uw=" << s.lo_power_uw << '\n';
    std::cout << "frequency_hz,psd_rel_vacuum,db_rel_vacuum\n" << std::setprecision(8);
    auto row = [&](double f) {
        std::cout << f << ',' << level << ',';
        if (level > 0.0)
            std::cout << variance_to_db(level);
        else
            std::cout << "-inf";
        std::cout << '\n';
    };
    for (const auto& band : plan.bands) {
        row(band.f_lo_hz);
        row(band.f_hi_hz);
    }
    return kPass;
}

int cmd_simulate(const Settings& s) {
    const auto plan = presets::plan_for(presets::parse_preset(s.preset));
    const SimScenario scenario = build_scenario(s, plan);
    const auto samples = compose_scenario(scenario, {s.threads});

    fs::create_directories(s.out);
    const fs::path base = fs::path(s.out) / (s.name.empty() ? default_run_name(s) : s.name);
    auto meta = io::describe(scenario, samples.size());
    io::write_time_series(base, samples, meta, s.force);

    std::cout << "scenario_digest " << meta.scenario_digest << '\n'
              << "sha256 " << meta.sha256 << '\n'
              << "samples " << io::samples_path(base).string() << '\n'
              << "duration_s " << scenario.duration_s << '\n';
    return kPass;
}

int cmd_analyze(const Settings& s) {
    if (s.input.empty())
        throw ConfigError("analyze needs --input");
    const auto plan = presets::plan_for(presets::parse_preset(s.preset));
    const auto series = io::read_time_series(io::strip_extension(s.input));
    const double fs_hz = series.meta.sample_rate_hz;
    if (2.0 * plan.max_frequency_hz() > fs_hz) {
        std::ostringstream os;
        os << "sample rate " << fs_hz << " Hz of " << s.input << " cannot cover plan '"
           << plan.name << "' up to " << plan.max_frequency_hz() << " Hz";
        throw ConfigError(os.str());
    }
    const PsdOptions psd{kDefaultOverlap, s.threads};
    StitchedSpectrum spectrum = run_plan(series.samples, fs_hz, plan, psd);
    spectrum.provenance = series.meta.scenario_digest;

    std::vector<std::vector<std::size_t>> floored;
    if (!s.dark.empty()) {
        const auto dark = io::read_time_series(io::strip_extension(s.dark));
        if (dark.meta.sample_rate_hz != fs_hz)
            throw ConfigError("dark run sample rate differs from the signal run");
        auto sub = subtract_dark(spectrum, run_plan(dark.samples, fs_hz, plan, psd));
        spectrum = std::move(sub.spectrum);
        floored = std::move(sub.floored_bins);
    }

    fs::create_directories(s.out);
    const std::string name =
        s.name.empty() ? io::strip_extension(s.input).filename().string() : s.name;
    const fs::path csv = fs::path(s.out) / (name + ".csv");
    const fs::path json = fs::path(s.out) / (name + ".json");
    auto meta = io::spectrum_metadata(spectrum, plan, floored);
    meta["input"] = {{"path", s.input}, {"sha256", series.meta.sha256},
                     {"scenario_digest", series.meta.scenario_digest}};
    meta["dark_subtracted"] = !s.dark.empty();
    io::write_text_atomic(csv, io::spectrum_csv(spectrum), s.force);
    io::write_text_atomic(json, meta.dump(2) + "\n", s.force);

    const auto mask = mains_mask(plan, fs_hz, 50.0, kMainsHarmonicsMasked, kMainsMaskHalfWidthBins);
    const auto level = measured_squeezing(spectrum, 1.0, kAnalysisBand, &mask, 0.0, 0.0);
    std::cout << "band_level_db " << std::setprecision(6) << -level.measured << " ("
              << kAnalysisBand.lo_hz << "-" << kAnalysisBand.hi_hz << " Hz, mains masked)\n"
              << "csv " << csv.string() << '\n'
              << "json " << json.string() << '\n';
    return kPass;
}

int cmd_verify(const Settings& s) {
    SuiteOptions options;
    options.fast = presets::is_fast(presets::parse_preset(s.preset));
    options.seed = s.seed;
    options.threads = s.threads;
    options.unsubtracted_dark_floor_db = s.inject_dark_db;
    if (s.tolerance_db)
        options.tolerances = SuiteTolerances::uniform(*s.tolerance_db);
    else if (options.fast)
        options.tolerances = options.tolerances.widened_for_fast();

    const auto result = run_verification_suite(options);
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : result.reports) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": measured "
                  << std::setprecision(5) << r.measured << " " << r.units << ", expected "
                  << r.expected << " +/- " << r.tolerance << '\n';
        reports.push_back(to_json(r));
    }
    nlohmann::json doc = {{"preset", s.preset},
                          {"seed", s.seed},
                          {"all_passed", result.all_passed()},
                          {"reports", reports}};
    fs::create_directories(s.out);
    const fs::path path = fs::path(s.out) / ((s.name.empty() ? "verify_report" : s.name) + ".json");
    io::write_text_atomic(path, doc.dump(2) + "\n", s.force);
    std::cout << "report " << path.string() << '\n';
    return result.all_passed() ? kPass : kCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Squeezed-light homodyne noise simulator"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Plain-text key = value settings file");
    app.allow_config_extras(false);

    Settings s;
    app.add_option("--preset", s.preset, "fig2 | fig3 | fig2-fast | fig3-fast | fast")
        ->capture_default_str();
    app.add_option("--state", s.state, "vacuum | squeezed | dark")->capture_default_str();
    app.add_option("--seed", s.seed)->capture_default_str();
    app.add_option("--lo-power-uw,--lo_power_uw", s.lo_power_uw, "LO power in microwatts")
        ->capture_default_str();
    app.add_option("--gain", s.gain, "OPO parametric gain")->capture_default_str();
    app.add_option("--loss", s.loss, "Total optical loss")->capture_default_str();
    app.add_option("--theta-rad,--theta_rad", s.theta_rad, "LO phase in radians")
        ->capture_default_str();
    app.add_option("--visibility", s.visibility, "Fringe visibility")->capture_default_str();
    app.add_option("--duration-s,--duration_s", s.duration_s, "Override record length");
    app.add_option("--sample-rate-hz,--sample_rate_hz", s.sample_rate_hz);
    app.add_option("--mains", s.mains, "Include mains pickup")->capture_default_str();
    app.add_option("--parasitic", s.parasitic, "Include parasitic interference")
        ->capture_default_str();
    app.add_option("--out,--out_dir", s.out, "Output directory")->capture_default_str();
    app.add_option("--name", s.name, "Output base name");
    app.add_option("--threads", s.threads, "Worker threads, 0 for all cores")
        ->capture_default_str();
    app.add_flag("--force", s.force, "Overwrite existing outputs");
    app.add_option("--input", s.input, "Time series to analyze (base path or .f64)");
    app.add_option("--dark", s.dark, "Dark run to subtract");
    app.add_option("--tolerance-db,--tolerance_db", s.tolerance_db,
                   "Override every verification tolerance");
    app.add_option("--inject-dark-db,--inject_dark_db", s.inject_dark_db,
                   "Leave a dark floor at this level un-subtracted in the vacuum runs");

    auto* spectrum = app.add_subcommand("spectrum", "Closed-form noise levels, no simulation");
    auto* simulate = app.add_subcommand("simulate", "Write a seeded time series");
    auto* analyze = app.add_subcommand("analyze", "Stitched spectrum of a time series");
    auto* verify = app.add_subcommand("verify", "Run the verification checks");
    for (auto* sub : {spectrum, simulate, analyze, verify})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
        if (*spectrum)
            return cmd_spectrum(s);
        if (*simulate)
            return cmd_simulate(s);
        if (*analyze)
            return cmd_analyze(s);
        return cmd_verify(s);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
