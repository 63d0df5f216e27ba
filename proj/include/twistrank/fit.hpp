#pragma once

#include <vector>

#include "twistrank/arith.hpp"

namespace twistrank {

struct FitPoint {
    u64 X = 0;
    double count = 0.0;
};

struct FitReport {
    double c_hat = 0.0;            // least-squares c in count = c X^{1/2} log X
    std::vector<double> ratios;    // count / (X^{1/2} log X) per point
    double max_rel_deviation = 0;  // max |ratio / c_hat - 1| over the upper half of the grid
    bool deviation_flag = false;   // max_rel_deviation > threshold
};

/// Throws InsufficientData below three points; X must exceed 1.
FitReport fit_growth(const std::vector<FitPoint>& points, double threshold = 0.25);

}  // namespace twistrank
