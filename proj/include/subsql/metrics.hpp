#pragma once

// Figures of merit for the band where the quantum reference exceeds the
// thermal floor: peak margin, band edges, bandwidth exponent, dip count.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "noise.hpp"

namespace subsql {

struct SubSqlMetrics {
    double r_max = 0.0;    // peak of ratio = reference / thermal
    double f_max_hz = 0.0; // grid frequency of that peak
    double f_l_hz = 0.0;   // lower unity crossing (or grid edge)
    double f_h_hz = 0.0;   // upper unity crossing (or grid edge)
    double bwe = 0.0;      // log10(f_h / f_l)
    int dip_count = 0;     // sub-unity runs strictly between the edges
};

inline std::vector<double> ratio_sql_over_tn(const NoiseSpectrum& sql,
                                             const NoiseSpectrum& tn) {
    if (!sql.grid.same_as(tn.grid))
        throw arg_error("ratio: spectra live on different grids");
    if (sql.asd.size() != tn.asd.size() || sql.asd.size() != sql.grid.size())
        throw arg_error("ratio: spectrum size mismatch");
    std::vector<double> r(sql.asd.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = sql.asd[i] / tn.asd[i];
    return r;
}

namespace detail {

// Frequency where the ratio crosses unity between adjacent samples, found by
// linear interpolation in log-log coordinates.
inline double unity_crossing(double f0, double r0, double f1, double r1) {
    const double lr0 = std::log(r0);
    const double lr1 = std::log(r1);
    const double t = (0.0 - lr0) / (lr1 - lr0);
    return std::exp(std::log(f0) + t * (std::log(f1) - std::log(f0)));
}

} // namespace detail

// Scans the ratio curve for the contiguous region above unity. Returns
// nothing when the ratio never exceeds 1. When the curve is still above
// unity at a grid edge the band is truncated at that edge, which keeps
// f_l <= f_max <= f_h.
inline std::optional<SubSqlMetrics> compute_metrics(const std::vector<double>& frequencies,
                                                    const std::vector<double>& ratio) {
    const std::size_t n = frequencies.size();
    if (n < 2) throw arg_error("metrics: need at least 2 points");
    if (ratio.size() != n) throw arg_error("metrics: ratio size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(frequencies[i] > 0.0) || (i > 0 && !(frequencies[i] > frequencies[i - 1])))
            throw arg_error("metrics: frequencies must be positive and increasing");
        if (!std::isfinite(ratio[i]) || !(ratio[i] > 0.0))
            throw arg_error("metrics: ratio values must be finite and > 0");
    }

    std::vector<bool> above(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        above[i] = ratio[i] > 1.0;
        any = any || above[i];
    }
    if (!any) return std::nullopt;

    SubSqlMetrics m;
    const std::size_t i_max = static_cast<std::size_t>(
        std::max_element(ratio.begin(), ratio.end()) - ratio.begin());
    m.r_max = ratio[i_max];
    m.f_max_hz = frequencies[i_max];

    std::size_t i_first = 0;
    while (!above[i_first]) ++i_first;
    std::size_t i_last = n - 1;
    while (!above[i_last]) --i_last;

    m.f_l_hz = (i_first == 0)
                   ? frequencies.front()
                   : detail::unity_crossing(frequencies[i_first - 1], ratio[i_first - 1],
                                            frequencies[i_first], ratio[i_first]);
    m.f_h_hz = (i_last == n - 1)
                   ? frequencies.back()
                   : detail::unity_crossing(frequencies[i_last], ratio[i_last],
                                            frequencies[i_last + 1], ratio[i_last + 1]);
    m.bwe = std::log10(m.f_h_hz / m.f_l_hz);

    bool in_dip = false;
    for (std::size_t i = i_first + 1; i < i_last; ++i) {
        if (!above[i]) {
            if (!in_dip) ++m.dip_count;
            in_dip = true;
        } else {
            in_dip = false;
        }
    }
    return m;
}

inline std::optional<SubSqlMetrics> compute_metrics(const NoiseSpectrum& tn,
                                                    const NoiseSpectrum& sql) {
    return compute_metrics(tn.grid.frequencies, ratio_sql_over_tn(sql, tn));
}

} // namespace subsql
