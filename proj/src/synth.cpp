#include "sqz/synth.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "coloring.hpp"
#include "sqz/error.hpp"
#include "sqz/rng.hpp"

namespace sqz {

void HomodyneConfig::validate() const {
    if (!(lo_power_w > 0.0))
        throw ConfigError("LO power must be positive");
    if (!(lo_power_ref_w > 0.0))
        throw ConfigError("reference LO power must be positive");
    if (!(visibility > 0.0 && visibility <= 1.0))
        throw ConfigError("fringe visibility must lie in (0, 1]");
    if (!std::isfinite(theta_rad))
        throw ConfigError("LO phase must be finite");
}

void DarkNoiseModel::validate() const {
    if (!(floor_rel_vacuum >= 0.0))
        throw ConfigError("dark-noise floor must be >= 0");
    if (!(knee_hz >= 0.0))
        throw ConfigError("dark-noise knee must be >= 0");
}

double DarkNoiseModel::psd(double f_hz) const { return floor_rel_vacuum * (1.0 + knee_hz / f_hz); }

void MainsModel::validate(double sample_rate_hz) const {
    if (!(fundamental_hz > 0.0))
        throw ConfigError("mains fundamental must be positive");
    std::set<int> seen;
    for (const auto& h : harmonics) {
        if (h.order < 1)
            throw ConfigError("mains harmonic orders must be >= 1");
        if (!seen.insert(h.order).second)
            throw ConfigError("mains harmonic orders must be distinct");
        if (h.order * fundamental_hz >= sample_rate_hz / 2.0) {
            std::ostringstream os;
            os << "mains harmonic " << h.order << " at " << h.order * fundamental_hz
               << " Hz aliases at sample rate " << sample_rate_hz << " Hz";
            throw ConfigError(os.str());
        }
    }
}

void ParasiticModel::validate() const {
    if (!(psd_at_1hz_rel_vacuum >= 0.0))
        throw ConfigError("parasitic PSD at 1 Hz must be >= 0");
    if (!(exponent_alpha >= 0.0))
        throw ConfigError("parasitic exponent must be >= 0");
    if (!(f_min_hz > 0.0))
        throw ConfigError("parasitic regularization frequency must be positive");
}

double ParasiticModel::psd(double f_hz) const {
    return psd_at_1hz_rel_vacuum * std::pow(std::max(f_hz, f_min_hz), -exponent_alpha);
}

void SimScenario::validate() const {
    homodyne.validate();
    if (!(sample_rate_hz > 0.0))
        throw ConfigError("sample rate must be positive");
    if (!(analysis_max_hz > 0.0))
        throw ConfigError("highest analysis frequency must be positive");
    if (sample_rate_hz < 2.0 * analysis_max_hz) {
        std::ostringstream os;
        os << "sample rate " << sample_rate_hz << " Hz is below twice the highest analysis frequency ("
           << analysis_max_hz << " Hz)";
        throw ConfigError(os.str());
    }
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
        throw ConfigError("duration must be positive");
    if (duration_s * sample_rate_hz > static_cast<double>(kMaxSamples))
        throw ConfigError("duration x sample rate exceeds the run budget");
    if (n_samples() == 0)
        throw ConfigError("scenario produces no samples");
    if (squeezer) {
        try {
            squeezer->opo.validate();
            squeezer->losses.validate();
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        squeezer->opo.check_band(analysis_max_hz);
    }
    if (dark)
        dark->validate();
    if (mains)
        mains->validate(sample_rate_hz);
    if (parasitic)
        parasitic->validate();
}

std::size_t SimScenario::n_samples() const {
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
}

std::string SimScenario::canonical_text() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "lo_power_w = " << homodyne.lo_power_w << '\n'
       << "lo_power_ref_w = " << homodyne.lo_power_ref_w << '\n'
       << "theta_rad = " << homodyne.theta_rad << '\n'
       << "visibility = " << homodyne.visibility << '\n'
       << "lo_blocked = " << (homodyne.lo_blocked ? "true" : "false") << '\n';
    if (squeezer) {
        os << "opo_gain = " << squeezer->opo.gain << '\n'
           << "opo_linewidth_hz = " << squeezer->opo.cavity_linewidth_hz << '\n';
        for (const auto& e : squeezer->losses.entries())
            os << "loss_efficiency." << e.name << " = " << e.efficiency << '\n';
    }
    if (dark)
        os << "dark_floor_rel_vacuum = " << dark->floor_rel_vacuum << '\n'
           << "dark_knee_hz = " << dark->knee_hz << '\n';
    if (mains) {
        os << "mains_fundamental_hz = " << mains->fundamental_hz << '\n';
        for (const auto& h : mains->harmonics)
            os << "mains_harmonic." << h.order << " = " << h.amplitude << ' ' << h.phase_rad << '\n';
    }
    if (parasitic)
        os << "parasitic_psd_at_1hz = " << parasitic->psd_at_1hz_rel_vacuum << '\n'
           << "parasitic_alpha = " << parasitic->exponent_alpha << '\n'
           << "parasitic_f_min_hz = " << parasitic->f_min_hz << '\n';
    os << "sample_rate_hz = " << sample_rate_hz << '\n'
       << "analysis_max_hz = " << analysis_max_hz << '\n'
       << "duration_s = " << duration_s << '\n'
       << "seed = " << seed << '\n';
    return os.str();
}

std::string SimScenario::digest() const {
    const std::string text = canonical_text();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
        os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

double detected_quadrature_variance(const SimScenario& scenario) {
    if (!scenario.squeezer)
        return 1.0;
    const auto& sq = *scenario.squeezer;
    const double transmission =
        (1.0 - total_loss(sq.losses)) * visibility_efficiency(scenario.homodyne.visibility);
    const QuadraturePair pair = quadrature_pair(sq.opo, 1.0 - transmission);
    return quadrature_variance(pair, scenario.homodyne.theta_rad);
}

double quantum_psd(const SimScenario& scenario) {
    return scenario.homodyne.lo_scale() * detected_quadrature_variance(scenario);
}

std::vector<double> synth_quantum_noise(const SimScenario& scenario, std::size_t n_samples,
                                        const SynthOptions& options) {
    scenario.validate();
    const double variance = quantum_psd(scenario) * scenario.sample_rate_hz / 2.0;
    return detail::white_gaussian(variance, n_samples,
                                  rng::derive_seed(scenario.seed, component::quantum),
                                  options.threads);
}

std::vector<double> synth_dark(const DarkNoiseModel& model, double sample_rate_hz,
                               std::size_t n_samples, std::uint64_t seed,
                               const SynthOptions& options) {
    model.validate();
    if (model.floor_rel_vacuum == 0.0)
        return std::vector<double>(n_samples, 0.0);
    return detail::colored_gaussian([&](double f) { return model.psd(f); }, sample_rate_hz,
                                    n_samples, seed, options.threads);
}

std::vector<double> synth_mains(const MainsModel& model, double sample_rate_hz,
                                std::size_t n_samples) {
    model.validate(sample_rate_hz);
    std::vector<double> out(n_samples, 0.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (const auto& h : model.harmonics) {
        // Cycles per sample, reduced to [0, 1) each step to keep the phase exact
        // over long records.
        const double cycles_per_sample = h.order * model.fundamental_hz / sample_rate_hz;
        for (std::size_t i = 0; i < n_samples; ++i) {
            const double cycles = std::fmod(cycles_per_sample * static_cast<double>(i), 1.0);
            out[i] += h.amplitude * std::cos(two_pi * cycles + h.phase_rad);
        }
    }
    return out;
}

std::vector<double> synth_parasitic(const ParasiticModel& model, double sample_rate_hz,
                                    std::size_t n_samples, std::uint64_t seed, double lo_scale,
                                    const SynthOptions& options) {
    model.validate();
    if (model.psd_at_1hz_rel_vacuum == 0.0)
        return std::vector<double>(n_samples, 0.0);
    return detail::colored_gaussian([&](double f) { return lo_scale * model.psd(f); },
                                    sample_rate_hz, n_samples, seed, options.threads);
}

std::vector<double> compose_scenario(const SimScenario& scenario, const SynthOptions& options) {
    scenario.validate();
    const std::size_t n = scenario.n_samples();
    const double fs = scenario.sample_rate_hz;

    std::vector<double> out = synth_quantum_noise(scenario, n, options);
    auto accumulate = [&out](const std::vector<double>& part) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += part[i];
    };
    if (scenario.dark)
        accumulate(synth_dark(*scenario.dark, fs, n,
                              rng::derive_seed(scenario.seed, component::dark), options));
    if (scenario.mains)
        accumulate(synth_mains(*scenario.mains, fs, n));
    if (scenario.parasitic && !scenario.homodyne.lo_blocked)
        accumulate(synth_parasitic(*scenario.parasitic, fs, n,
                                   rng::derive_seed(scenario.seed, component::parasitic),
                                   scenario.homodyne.lo_scale(), options));
    return out;
}

} // namespace sqz
