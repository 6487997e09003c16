#pragma once

#include <span>
#include <vector>

namespace hydrofeat {

enum class DecompositionMethod { classical_additive, stl };

/// Additive split input = seasonal + trend + remainder.
///
/// For the classical method the 2x4 moving-average trend is undefined at the
/// series edges; those slots hold NaN in `trend` and `remainder`.
struct Decomposition {
    DecompositionMethod method = DecompositionMethod::stl;
    std::vector<double> seasonal;
    std::vector<double> trend;
    std::vector<double> remainder;
    /// Classical only: one zero-sum index per season, cyclically repeated in `seasonal`.
    std::vector<double> seasonal_indices;

    /// input - seasonal over the full length.
    std::vector<double> deseasonalized(std::span<const double> input) const;
};

Decomposition classical_decompose(std::span<const double> series, int period = 4);

/// Locally weighted polynomial regression evaluated at every x.
///
/// Each fit uses the floor(span * n) nearest neighbours of the evaluation
/// point with tricube weights scaled by the distance to the farthest of them.
/// Throws FitError when fewer than degree + 1 neighbours carry weight.
std::vector<double> loess_smooth(std::span<const double> x, std::span<const double> y,
                                 double span, int degree);

struct StlParams {
    int period = 4;
    /// 0 selects the periodic seasonal (cycle-subseries means); otherwise odd >= 3.
    int seasonal_window = 0;
    int seasonal_degree = 0;
    /// Odd >= 3, or 0 for the conventional minimum next_odd(1.5 * period / (1 - 1.5 / ns)).
    int trend_window = 15;
    int trend_degree = 1;
    /// Odd >= 3, or 0 for next_odd(period).
    int lowpass_window = 0;
    int lowpass_degree = 1;
    int inner_iterations = 2;
};

/// Trend window used when StlParams::trend_window is 0.
int conventional_trend_window(int period, int seasonal_window);

/// Inner-loop STL without robustness iterations. remainder = input - seasonal - trend.
Decomposition stl_decompose(std::span<const double> series, const StlParams& params = {});

} // namespace hydrofeat
