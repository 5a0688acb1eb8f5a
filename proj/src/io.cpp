#include "sqz/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "sqz/error.hpp"

namespace fs = std::filesystem;

namespace sqz::io {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw Error("SHA-256 initialization failed");
    }

    void update(const void* data, std::size_t len) {
        if (EVP_DigestUpdate(ctx_.get(), data, len) != 1)
            throw Error("SHA-256 update failed");
    }

    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1)
            throw Error("SHA-256 finalization failed");
        std::ostringstream os;
        for (unsigned int i = 0; i < len; ++i)
            os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
        return os.str();
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

fs::path temp_path_for(const fs::path& target) {
    fs::path tmp = target;
    tmp += ".tmp-" + std::to_string(::getpid());
    return tmp;
}

void refuse_overwrite(const fs::path& path, bool force) {
    if (!force && fs::exists(path))
        throw IoError(path.string() + " already exists (pass --force to overwrite)");
}

void commit(const fs::path& tmp, const fs::path& target) {
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " to " + target.string());
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::map<std::string, std::string>& kv, const std::string& key,
               const fs::path& source) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw IoError(source.string() + ": missing key '" + key + "'");
    std::istringstream is(it->second);
    T value{};
    is >> value;
    if (!is || !is.eof())
        throw IoError(source.string() + ": malformed value for '" + key + "'");
    return value;
}

} // namespace

void encode_le(std::span<const double> samples, std::vector<unsigned char>& out) {
    out.resize(samples.size() * sizeof(double));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(samples[i]);
        for (int b = 0; b < 8; ++b)
            out[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
}

std::vector<double> decode_le(std::span<const unsigned char> bytes) {
    if (bytes.size() % 8 != 0)
        throw IoError("sample stream length is not a multiple of 8 bytes");
    std::vector<double> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        out[i] = std::bit_cast<double>(bits);
    }
    return out;
}

std::string sha256_hex(std::span<const unsigned char> bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string file_sha256(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    Sha256 h;
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

TimeSeriesMeta describe(const SimScenario& scenario, std::size_t n_samples) {
    TimeSeriesMeta meta;
    meta.sample_rate_hz = scenario.sample_rate_hz;
    meta.n_samples = n_samples;
    meta.duration_s = static_cast<double>(n_samples) / scenario.sample_rate_hz;
    meta.seed = scenario.seed;
    meta.scenario_digest = scenario.digest();
    std::istringstream lines(scenario.canonical_text());
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find('=');
        if (eq != std::string::npos)
            meta.scenario[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return meta;
}

fs::path samples_path(const fs::path& base) {
    fs::path p = base;
    p += ".f64";
    return p;
}

fs::path meta_path(const fs::path& base) {
    fs::path p = base;
    p += ".meta";
    return p;
}

fs::path strip_extension(const fs::path& path) {
    const auto ext = path.extension();
    if (ext == ".f64" || ext == ".meta") {
        fs::path p = path;
        return p.replace_extension();
    }
    return path;
}

void write_text_atomic(const fs::path& path, const std::string& text, bool force) {
    refuse_overwrite(path, force);
    const fs::path tmp = temp_path_for(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + tmp.string());
        out << text;
        if (!out.flush())
            throw IoError("write failed for " + tmp.string());
    }
    commit(tmp, path);
}

void write_time_series(const fs::path& base, std::span<const double> samples,
                       TimeSeriesMeta& meta, bool force) {
    const fs::path data = samples_path(base);
    const fs::path sidecar = meta_path(base);
    refuse_overwrite(data, force);
    refuse_overwrite(sidecar, force);

    const fs::path tmp = temp_path_for(data);
    Sha256 hash;
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + tmp.string());
        constexpr std::size_t chunk = 1 << 16;
        std::vector<unsigned char> bytes;
        for (std::size_t i = 0; i < samples.size(); i += chunk) {
            encode_le(samples.subspan(i, std::min(chunk, samples.size() - i)), bytes);
            hash.update(bytes.data(), bytes.size());
            out.write(reinterpret_cast<const char*>(bytes.data()),
                      static_cast<std::streamsize>(bytes.size()));
        }
        if (!out.flush())
            throw IoError("write failed for " + tmp.string());
    }
    meta.sha256 = hash.hex();
    meta.n_samples = samples.size();

    std::ostringstream os;
    os << std::setprecision(17);
    os << "format = " << kTimeSeriesFormat << '\n'
       << "sample_rate_hz = " << meta.sample_rate_hz << '\n'
       << "duration_s = " << meta.duration_s << '\n'
       << "n_samples = " << meta.n_samples << '\n'
       << "seed = " << meta.seed << '\n'
       << "scenario_digest = " << meta.scenario_digest << '\n'
       << "sha256 = " << meta.sha256 << '\n';
    for (const auto& [k, v] : meta.scenario)
        os << "scenario." << k << " = " << v << '\n';

    commit(tmp, data);
    write_text_atomic(sidecar, os.str(), true);
}

TimeSeries read_time_series(const fs::path& base_in) {
    const fs::path base = strip_extension(base_in);
    const fs::path sidecar = meta_path(base);
    std::ifstream meta_in(sidecar);
    if (!meta_in)
        throw IoError("cannot open " + sidecar.string());
    std::map<std::string, std::string> kv;
    for (std::string line; std::getline(meta_in, line);) {
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError(sidecar.string() + ": malformed line '" + line + "'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    if (kv["format"] != kTimeSeriesFormat)
        throw IoError(sidecar.string() + ": unsupported format '" + kv["format"] + "'");

    TimeSeries ts;
    ts.meta.sample_rate_hz = parse_number<double>(kv, "sample_rate_hz", sidecar);
    ts.meta.duration_s = parse_number<double>(kv, "duration_s", sidecar);
    ts.meta.n_samples = parse_number<std::uint64_t>(kv, "n_samples", sidecar);
    ts.meta.seed = parse_number<std::uint64_t>(kv, "seed", sidecar);
    ts.meta.scenario_digest = kv["scenario_digest"];
    ts.meta.sha256 = kv["sha256"];
    for (const auto& [k, v] : kv)
        if (k.rfind("scenario.", 0) == 0)
            ts.meta.scenario[k.substr(9)] = v;

    const fs::path data = samples_path(base);
    std::ifstream in(data, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + data.string());
    std::vector<unsigned char> bytes(static_cast<std::size_t>(fs::file_size(data)));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in)
        throw IoError("short read on " + data.string());
    if (!ts.meta.sha256.empty() && sha256_hex(bytes) != ts.meta.sha256)
        throw IoError(data.string() + ": checksum does not match its metadata");
    ts.samples = decode_le(bytes);
    if (ts.samples.size() != ts.meta.n_samples)
        throw IoError(data.string() + ": sample count does not match its metadata");
    return ts;
}

std::string spectrum_csv(const StitchedSpectrum& spectrum, double vacuum_level) {
    if (spectrum.unit != SpectrumUnit::psd_rel_vacuum)
        throw ConfigError("CSV export expects a PSD spectrum");
    std::ostringstream os;
    os << "frequency_hz,psd_rel_vacuum,db_rel_vacuum,segment_index,rbw_hz,n_averages\n";
    os << std::setprecision(10);
    for (std::size_t s = 0; s < spectrum.segments.size(); ++s) {
        const auto& seg = spectrum.segments[s];
        for (const auto& b : seg.bins) {
            os << b.frequency_hz << ',' << b.value << ',';
            if (b.value > 0.0)
                os << 10.0 * std::log10(b.value / vacuum_level);
            else
                os << "-inf";
            os << ',' << s << ',' << seg.rbw_hz << ',' << seg.n_averages << '\n';
        }
    }
    return os.str();
}

nlohmann::json spectrum_metadata(const StitchedSpectrum& spectrum, const WindowPlan& plan,
                                 const std::vector<std::vector<std::size_t>>& floored_bins) {
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : plan.bands)
        bands.push_back({{"f_lo_hz", b.f_lo_hz},
                         {"f_hi_hz", b.f_hi_hz},
                         {"rbw_hz", b.rbw_hz},
                         {"n_averages", b.n_averages}});
    nlohmann::json segments = nlohmann::json::array();
    for (std::size_t s = 0; s < spectrum.segments.size(); ++s) {
        const auto& seg = spectrum.segments[s];
        nlohmann::json floored = nlohmann::json::array();
        if (s < floored_bins.size())
            for (auto k : floored_bins[s])
                floored.push_back(seg.bins[k].frequency_hz);
        segments.push_back({{"segment_index", s},
                            {"segment_length", seg.segment_length},
                            {"bin_spacing_hz", seg.bin_spacing_hz},
                            {"overlap", seg.overlap},
                            {"bins", seg.bins.size()},
                            {"floored_frequencies_hz", floored}});
    }
    return {{"plan", {{"name", plan.name}, {"bands", bands}}},
            {"scenario_digest", spectrum.provenance},
            {"sample_rate_hz", spectrum.sample_rate_hz},
            {"taper", "hann"},
            {"averaging", "power"},
            {"segments", segments}};
}

} // namespace sqz::io
