#include "sqz/noise_models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sqz/error.hpp"

namespace sqz {

namespace {

void check_gain_loss(double gain, double loss) {
    if (!(gain >= 1.0) || !std::isfinite(gain)) {
        std::ostringstream os;
        os << "parametric gain must be >= 1 (got " << gain << ")";
        throw DomainError(os.str());
    }
    if (!(loss >= 0.0 && loss < 1.0)) {
        std::ostringstream os;
        os << "total loss must lie in [0, 1) (got " << loss << ")";
        throw DomainError(os.str());
    }
}

} // namespace

void OpoParams::validate() const {
    if (!(gain >= 1.0) || !std::isfinite(gain))
        throw DomainError("OPO gain must be >= 1");
    if (!(cavity_linewidth_hz > 0.0))
        throw DomainError("OPO cavity linewidth must be positive");
}

void OpoParams::check_band(double f_hi_hz) const {
    if (f_hi_hz > max_flat_frequency_hz()) {
        std::ostringstream os;
        os << "analysis band edge " << f_hi_hz << " Hz exceeds 1e-3 x cavity linewidth ("
           << max_flat_frequency_hz() << " Hz); the squeezing model is frequency-flat only there";
        throw ConfigError(os.str());
    }
}

LossBudget::LossBudget(std::vector<LossEntry> entries) : entries_(std::move(entries)) {
    validate();
}

LossBudget LossBudget::from_total_loss(double loss) {
    if (!(loss >= 0.0 && loss < 1.0))
        throw InvalidBudgetError("total loss must lie in [0, 1)");
    LossBudget b;
    b.add("total", 1.0 - loss);
    return b;
}

LossBudget& LossBudget::add(std::string name, double efficiency) {
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        std::ostringstream os;
        os << "efficiency '" << name << "' = " << efficiency << " is outside (0, 1]";
        throw InvalidBudgetError(os.str());
    }
    entries_.push_back({std::move(name), efficiency});
    return *this;
}

LossBudget& LossBudget::add_visibility(double visibility) {
    return add("visibility^2", visibility_efficiency(visibility));
}

void LossBudget::validate() const {
    for (const auto& e : entries_) {
        if (!(e.efficiency > 0.0 && e.efficiency <= 1.0)) {
            std::ostringstream os;
            os << "efficiency '" << e.name << "' = " << e.efficiency << " is outside (0, 1]";
            throw InvalidBudgetError(os.str());
        }
    }
}

double total_loss(const LossBudget& budget) {
    budget.validate();
    double product = 1.0;
    for (const auto& e : budget.entries())
        product *= e.efficiency;
    return 1.0 - product;
}

double visibility_efficiency(double visibility) {
    if (!(visibility > 0.0 && visibility <= 1.0))
        throw InvalidBudgetError("fringe visibility must lie in (0, 1]");
    return visibility * visibility;
}

double squeezed_variance(const OpoParams& opo, double loss) {
    check_gain_loss(opo.gain, loss);
    return loss + (1.0 - loss) / opo.gain;
}

double antisqueezed_variance(const OpoParams& opo, double loss) {
    // l = 1 is allowed here: the antisqueezed quadrature is then pure vacuum.
    if (loss == 1.0) {
        check_gain_loss(opo.gain, 0.0);
        return 1.0;
    }
    check_gain_loss(opo.gain, loss);
    return loss + (1.0 - loss) * opo.gain;
}

QuadraturePair quadrature_pair(const OpoParams& opo, double loss) {
    return {squeezed_variance(opo, loss), antisqueezed_variance(opo, loss)};
}

double quadrature_variance(const QuadraturePair& pair, double theta_rad) {
    const double c = std::cos(theta_rad);
    const double s = std::sin(theta_rad);
    return pair.v_squeezed * c * c + pair.v_antisqueezed * s * s;
}

double variance_to_db(double variance) {
    if (!(variance > 0.0)) {
        std::ostringstream os;
        os << "variance must be positive to convert to dB (got " << variance << ")";
        throw DomainError(os.str());
    }
    return 10.0 * std::log10(variance);
}

double db_to_variance(double db) { return std::pow(10.0, db / 10.0); }

double squeezing_db(double gain, double loss) {
    OpoParams opo;
    opo.gain = gain;
    return -variance_to_db(squeezed_variance(opo, loss));
}

ValueInterval squeezing_interval(const ValueInterval& gain, const ValueInterval& loss) {
    if (!(gain.lo <= gain.nominal && gain.nominal <= gain.hi))
        throw DomainError("gain bounds must satisfy lo <= nominal <= hi");
    if (!(loss.lo <= loss.nominal && loss.nominal <= loss.hi))
        throw DomainError("loss bounds must satisfy lo <= nominal <= hi");

    const double corners[] = {
        squeezing_db(gain.lo, loss.lo),
        squeezing_db(gain.lo, loss.hi),
        squeezing_db(gain.hi, loss.lo),
        squeezing_db(gain.hi, loss.hi),
    };
    const auto [mn, mx] = std::minmax_element(std::begin(corners), std::end(corners));
    return {*mn, squeezing_db(gain.nominal, loss.nominal), *mx};
}

} // namespace sqz
