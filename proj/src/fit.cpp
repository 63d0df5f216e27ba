#include "twistrank/fit.hpp"

#include <algorithm>
#include <cmath>

#include "twistrank/error.hpp"

namespace twistrank {

FitReport fit_growth(const std::vector<FitPoint>& points, double threshold) {
    if (points.size() < 3) throw Error(ErrorCode::InsufficientData, "fit needs at least three grid points");
    long double sgg = 0, sgc = 0;
    std::vector<double> g(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].X < 2) throw Error(ErrorCode::InvalidArgument, "grid points must exceed 1");
        const double x = static_cast<double>(points[i].X);
        g[i] = std::sqrt(x) * std::log(x);
        sgg += static_cast<long double>(g[i]) * g[i];
        sgc += static_cast<long double>(g[i]) * points[i].count;
    }
    FitReport r;
    r.c_hat = static_cast<double>(sgc / sgg);
    for (std::size_t i = 0; i < points.size(); ++i) r.ratios.push_back(points[i].count / g[i]);
    const std::size_t start = points.size() / 2;
    for (std::size_t i = start; i < points.size(); ++i) {
        const double dev = r.c_hat != 0.0 ? std::fabs(r.ratios[i] / r.c_hat - 1.0) : INFINITY;
        r.max_rel_deviation = std::max(r.max_rel_deviation, dev);
    }
    r.deviation_flag = r.max_rel_deviation > threshold;
    return r;
}

}  // namespace twistrank
