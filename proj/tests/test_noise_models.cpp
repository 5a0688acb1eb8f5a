#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sqz/error.hpp"
#include "sqz/noise_models.hpp"

using namespace sqz;

namespace {

OpoParams opo(double gain) {
    OpoParams p;
    p.gain = gain;
    return p;
}

} // namespace

// =============================================================================
// Loss budget
// =============================================================================

TEST(LossBudget, EmptyChainIsLossless) { EXPECT_DOUBLE_EQ(total_loss(LossBudget{}), 0.0); }

TEST(LossBudget, SingleEntry) {
    LossBudget b;
    b.add("all", 0.85);
    EXPECT_NEAR(total_loss(b), 0.15, 1e-15);
}

TEST(LossBudget, VisibilityAndQuantumEfficiency) {
    LossBudget b;
    b.add_visibility(0.983).add("photodiode", 0.93);
    EXPECT_NEAR(total_loss(b), 0.10135123, 1e-10);
    EXPECT_EQ(b.entries().front().name, "visibility^2");
}

TEST(LossBudget, RejectsEfficienciesOutsideUnitInterval) {
    LossBudget b;
    EXPECT_THROW(b.add("x", 0.0), InvalidBudgetError);
    EXPECT_THROW(b.add("x", 1.01), InvalidBudgetError);
    EXPECT_THROW(b.add("x", -0.2), InvalidBudgetError);
    EXPECT_THROW(LossBudget({{"bad", 1.5}}), InvalidBudgetError);
}

TEST(LossBudget, PermutationInvariant) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> eta(0.5, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<LossEntry> entries;
        for (int i = 0; i < 6; ++i)
            entries.push_back({"e" + std::to_string(i), eta(rng)});
        const double reference = total_loss(LossBudget(entries));
        std::shuffle(entries.begin(), entries.end(), rng);
        EXPECT_NEAR(total_loss(LossBudget(entries)), reference, 1e-14);
    }
}

// Mode-matching efficiency: for two equal-power fields, the fringe visibility
// equals the mode overlap |<u1|u2>|, and homodyne detection efficiency is the
// squared overlap. Build mismatched Gaussian beams, measure the visibility
// from a simulated fringe, and compare its square with the direct overlap.
TEST(LossBudget, VisibilitySquaredMatchesModeOverlap) {
    const int n = 4001;
    const double x_max = 8.0;
    const double dx = 2 * x_max / (n - 1);
    auto beam = [&](double waist, double center) {
        std::vector<double> u(n);
        double norm = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = -x_max + i * dx;
            u[i] = std::exp(-(x - center) * (x - center) / (waist * waist));
            norm += u[i] * u[i] * dx;
        }
        for (auto& v : u)
            v /= std::sqrt(norm);
        return u;
    };
    const auto u1 = beam(1.0, 0.0);
    const auto u2 = beam(1.3, 0.25);

    double overlap = 0.0;
    for (int i = 0; i < n; ++i)
        overlap += u1[i] * u2[i] * dx;

    double i_max = -1e300, i_min = 1e300;
    for (int step = 0; step < 720; ++step) {
        const double phi = 2 * std::numbers::pi * step / 720.0;
        double power = 0.0;
        for (int i = 0; i < n; ++i) {
            const double re = u1[i] + u2[i] * std::cos(phi);
            const double im = u2[i] * std::sin(phi);
            power += (re * re + im * im) * dx;
        }
        i_max = std::max(i_max, power);
        i_min = std::min(i_min, power);
    }
    const double visibility = (i_max - i_min) / (i_max + i_min);
    EXPECT_NEAR(visibility_efficiency(visibility), overlap * overlap, 1e-9);
}

// =============================================================================
// Quadrature variances
// =============================================================================

TEST(SqueezedVariance, ReferenceOperatingPoint) {
    EXPECT_NEAR(squeezed_variance(opo(12), 0.15), 0.2208333333, 1e-9);
    EXPECT_NEAR(variance_to_db(squeezed_variance(opo(12), 0.15)), -6.5594, 1e-4);
}

TEST(SqueezedVariance, UnitGainIsVacuum) { EXPECT_DOUBLE_EQ(squeezed_variance(opo(1), 0.0), 1.0); }

TEST(SqueezedVariance, HighGain) {
    EXPECT_NEAR(squeezed_variance(opo(40), 0.15), 0.17125, 1e-12);
    EXPECT_NEAR(variance_to_db(0.17125), -7.6637, 1e-4);
}

TEST(SqueezedVariance, DomainErrors) {
    EXPECT_THROW(squeezed_variance(opo(0.9), 0.1), DomainError);
    EXPECT_THROW(squeezed_variance(opo(12), 1.0), DomainError);
    EXPECT_THROW(squeezed_variance(opo(12), -0.01), DomainError);
}

TEST(AntisqueezedVariance, Examples) {
    EXPECT_NEAR(antisqueezed_variance(opo(12), 0.15), 10.35, 1e-12);
    EXPECT_NEAR(variance_to_db(10.35), 10.1494, 1e-4);
    EXPECT_DOUBLE_EQ(antisqueezed_variance(opo(1), 0.5), 1.0);
    EXPECT_DOUBLE_EQ(antisqueezed_variance(opo(12), 1.0), 1.0);
    EXPECT_THROW(antisqueezed_variance(opo(0.5), 0.1), DomainError);
}

TEST(QuadratureVariance, Rotation) {
    const QuadraturePair pair{0.2208333333333333, 10.35};
    EXPECT_DOUBLE_EQ(quadrature_variance(pair, 0.0), pair.v_squeezed);
    EXPECT_NEAR(quadrature_variance(pair, std::numbers::pi / 2), pair.v_antisqueezed, 1e-12);
    EXPECT_NEAR(quadrature_variance(pair, std::numbers::pi / 4), 5.2854166667, 1e-9);
    // theta wraps with period pi
    EXPECT_NEAR(quadrature_variance(pair, std::numbers::pi), pair.v_squeezed, 1e-12);
    EXPECT_NEAR(quadrature_variance(pair, -std::numbers::pi / 2), pair.v_antisqueezed, 1e-12);
}

TEST(QuadratureVariance, MinimumAtSqueezedQuadrature) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> g(1.01, 100.0), l(0.0, 0.99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto pair = quadrature_pair(opo(g(rng)), l(rng));
        ASSERT_LT(pair.v_squeezed, pair.v_antisqueezed);
        double best_theta = 0.0, best = 1e300;
        for (int k = 0; k < 3600; ++k) {
            const double theta = std::numbers::pi * k / 3600.0;
            const double v = quadrature_variance(pair, theta);
            if (v < best) {
                best = v;
                best_theta = theta;
            }
        }
        EXPECT_NEAR(std::remainder(best_theta, std::numbers::pi), 0.0, 1e-12);
    }
}

// =============================================================================
// dB conversion
// =============================================================================

TEST(VarianceToDb, Examples) {
    EXPECT_DOUBLE_EQ(variance_to_db(1.0), 0.0);
    EXPECT_NEAR(variance_to_db(0.22083), -6.5594, 1e-3);
    EXPECT_NEAR(variance_to_db(10.35), 10.1494, 1e-4);
    EXPECT_THROW(variance_to_db(0.0), DomainError);
    EXPECT_THROW(variance_to_db(-1.0), DomainError);
}

TEST(VarianceToDb, RoundTrip) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> db(-60.0, 60.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = db(rng);
        const double back = variance_to_db(db_to_variance(x));
        EXPECT_LE(std::abs(back - x), 1e-12 * std::max(1.0, std::abs(x)));
    }
}

// =============================================================================
// Properties
// =============================================================================

TEST(Properties, UncertaintyProductClosedForm) {
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> g(1.0, 100.0), l(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const double gain = g(rng), loss = l(rng);
        const auto p = quadrature_pair(opo(gain), loss);
        const double excess = p.v_squeezed * p.v_antisqueezed - 1.0;
        const double root = std::sqrt(gain) - 1.0 / std::sqrt(gain);
        const double closed = loss * (1.0 - loss) * root * root;
        EXPECT_GE(p.v_squeezed * p.v_antisqueezed, 1.0 - 1e-15);
        EXPECT_LE(std::abs(excess - closed), 1e-10 * std::max(closed, 1e-300) + 1e-14);
    }
    // Equality cases
    EXPECT_NEAR(squeezed_variance(opo(30), 0.0) * antisqueezed_variance(opo(30), 0.0), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(squeezed_variance(opo(1), 0.4) * antisqueezed_variance(opo(1), 0.4), 1.0);
}

TEST(Properties, Monotonicity) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> g(1.0, 100.0), l(0.0, 0.98), d(1e-3, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double gain = g(rng), loss = l(rng), step = d(rng);
        EXPECT_LT(squeezed_variance(opo(gain + step), loss), squeezed_variance(opo(gain), loss));
        if (gain > 1.0)
            EXPECT_GT(squeezed_variance(opo(gain), std::min(loss + 0.01 * step, 0.999)),
                      squeezed_variance(opo(gain), loss));
    }
}

// =============================================================================
// Interval propagation
// =============================================================================

namespace {

// Brute-force extremes over a dense grid of the rectangle.
std::pair<double, double> grid_extremes(ValueInterval g, ValueInterval l) {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j <= 200; ++j) {
            const double gain = g.lo + (g.hi - g.lo) * i / 200.0;
            const double loss = l.lo + (l.hi - l.lo) * j / 200.0;
            const double s = -10 * std::log10(loss + (1 - loss) / gain);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    return {lo, hi};
}

} // namespace

TEST(SqueezingInterval, ReferenceBounds) {
    const ValueInterval g{11.5, 12.0, 12.5}, l{0.11, 0.15, 0.19};
    const auto r = squeezing_interval(g, l);
    EXPECT_TRUE(r.contains(6.56));
    EXPECT_NEAR(r.nominal, 6.5594, 1e-4);
    EXPECT_NEAR(r.lo, 5.8430, 1e-4);
    EXPECT_NEAR(r.hi, 7.4184, 1e-4);
    const auto [blo, bhi] = grid_extremes(g, l);
    EXPECT_NEAR(r.lo, blo, 1e-12);
    EXPECT_NEAR(r.hi, bhi, 1e-12);
}

TEST(SqueezingInterval, Degenerate) {
    const auto r = squeezing_interval({1, 1, 1}, {0, 0, 0});
    EXPECT_DOUBLE_EQ(r.lo, 0.0);
    EXPECT_DOUBLE_EQ(r.nominal, 0.0);
    EXPECT_DOUBLE_EQ(r.hi, 0.0);
}

TEST(SqueezingInterval, HighGainBounds) {
    const ValueInterval g{36, 40, 44}, l{0.11, 0.15, 0.19};
    const auto r = squeezing_interval(g, l);
    EXPECT_TRUE(r.contains(7.66));
    EXPECT_NEAR(r.lo, 6.7264, 1e-4);
    EXPECT_NEAR(r.hi, 8.8530, 1e-4);
    const auto [blo, bhi] = grid_extremes(g, l);
    EXPECT_NEAR(r.lo, blo, 1e-12);
    EXPECT_NEAR(r.hi, bhi, 1e-12);
}

TEST(SqueezingInterval, PropagatesDomainErrors) {
    EXPECT_THROW(squeezing_interval({0.5, 1, 2}, {0, 0.1, 0.2}), DomainError);
    EXPECT_THROW(squeezing_interval({1, 2, 3}, {0.5, 0.9, 1.0}), DomainError);
    EXPECT_THROW(squeezing_interval({3, 2, 1}, {0, 0, 0}), DomainError);
}

TEST(OpoParams, FlatRegimeBandCheck) {
    OpoParams p;
    p.gain = 12;
    EXPECT_NO_THROW(p.check_band(3200.0));
    EXPECT_NO_THROW(p.check_band(27e3));
    EXPECT_THROW(p.check_band(30e3), ConfigError);
    p.cavity_linewidth_hz = 0.0;
    EXPECT_THROW(p.validate(), DomainError);
}
