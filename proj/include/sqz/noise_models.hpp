#pragma once

// Closed-form quadrature variances of a sub-threshold OPO seen through a
// lossy detection chain. All variances are relative to vacuum (= 1).

#include <optional>
#include <string>
#include <vector>

namespace sqz {

struct OpoParams {
    double gain = 1.0;                   // classical parametric (de)amplification
    double cavity_linewidth_hz = 27e6;
    std::optional<double> pump_power_mw; // annotation only

    void validate() const;

    /// Highest analysis frequency for which the frequency-flat model holds.
    double max_flat_frequency_hz() const { return 1e-3 * cavity_linewidth_hz; }

    /// Throws ConfigError when a band edge leaves the flat regime.
    void check_band(double f_hi_hz) const;
};

struct LossEntry {
    std::string name;
    double efficiency = 1.0;
};

/// Ordered chain of named efficiencies. Total loss is 1 - prod(eta).
class LossBudget {
public:
    LossBudget() = default;
    explicit LossBudget(std::vector<LossEntry> entries);

    static LossBudget from_total_loss(double loss);

    LossBudget& add(std::string name, double efficiency);
    /// Mode-matching efficiency enters as visibility squared.
    LossBudget& add_visibility(double visibility);

    const std::vector<LossEntry>& entries() const { return entries_; }
    void validate() const;

private:
    std::vector<LossEntry> entries_;
};

struct QuadraturePair {
    double v_squeezed = 1.0;
    double v_antisqueezed = 1.0;
};

/// Lower/nominal/upper triple. Used for dB results and for parameter bounds.
struct ValueInterval {
    double lo = 0.0;
    double nominal = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
};

double total_loss(const LossBudget& budget);

double visibility_efficiency(double visibility);

double squeezed_variance(const OpoParams& opo, double loss);
double antisqueezed_variance(const OpoParams& opo, double loss);
QuadraturePair quadrature_pair(const OpoParams& opo, double loss);

/// V(theta) = V1 cos^2(theta) + V2 sin^2(theta); theta = 0 is the squeezed quadrature.
double quadrature_variance(const QuadraturePair& pair, double theta_rad);

double variance_to_db(double variance);
double db_to_variance(double db);

/// Noise suppression below vacuum in dB, -10 log10(l + (1 - l)/g).
double squeezing_db(double gain, double loss);

/// Squeezing (positive dB) over a rectangle of gain and loss bounds, from
/// the four corners. The formula is monotone in both arguments.
ValueInterval squeezing_interval(const ValueInterval& gain, const ValueInterval& loss);

} // namespace sqz
