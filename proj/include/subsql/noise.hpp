#pragma once

// Thermal displacement noise per mode, quadrature totals over a log grid,
// and the quantum-limited reference curve they are compared against.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "errors.hpp"

namespace subsql {

// Log-spaced frequency grid, fixed points-per-decade. Points follow
// f_i = f_min * 10^(i/ppd); the last point lands on f_max when the span is a
// whole number of steps.
struct FrequencyGrid {
    double f_min_hz = 0.0;
    double f_max_hz = 0.0;
    int points_per_decade = 0;
    std::vector<double> frequencies;

    static FrequencyGrid log_spaced(double f_min_hz = 10.0, double f_max_hz = 1e7,
                                    int points_per_decade = 200) {
        if (!(f_min_hz > 0.0) || !(f_max_hz > f_min_hz))
            throw arg_error("frequency grid: need 0 < f_min < f_max");
        if (points_per_decade < 1)
            throw arg_error("frequency grid: points_per_decade must be >= 1");
        FrequencyGrid g;
        g.f_min_hz = f_min_hz;
        g.f_max_hz = f_max_hz;
        g.points_per_decade = points_per_decade;
        const double decades = std::log10(f_max_hz / f_min_hz);
        const int n_steps = static_cast<int>(std::ceil(points_per_decade * decades - 1e-9));
        g.frequencies.reserve(static_cast<std::size_t>(n_steps) + 1);
        for (int i = 0; i <= n_steps; ++i)
            g.frequencies.push_back(f_min_hz *
                                    std::pow(10.0, static_cast<double>(i) / points_per_decade));
        return g;
    }

    // Wraps an externally supplied ascending frequency list (CSV re-ingest).
    static FrequencyGrid from_frequencies(std::vector<double> f) {
        if (f.size() < 2) throw arg_error("frequency grid: need at least 2 points");
        for (std::size_t i = 0; i < f.size(); ++i) {
            if (!(f[i] > 0.0)) throw arg_error("frequency grid: frequencies must be > 0");
            if (i > 0 && !(f[i] > f[i - 1]))
                throw arg_error("frequency grid: frequencies must be strictly increasing");
        }
        FrequencyGrid g;
        g.f_min_hz = f.front();
        g.f_max_hz = f.back();
        g.points_per_decade = 0;  // unknown spacing
        g.frequencies = std::move(f);
        return g;
    }

    bool same_as(const FrequencyGrid& o) const { return frequencies == o.frequencies; }
    std::size_t size() const { return frequencies.size(); }
};

struct NoiseSpectrum {
    FrequencyGrid grid;
    std::vector<double> asd;  // m/sqrt(Hz), one entry per grid point
};

enum class Damping { structural, viscous };

inline Damping parse_damping(const std::string& s) {
    if (s == "structural") return Damping::structural;
    if (s == "viscous") return Damping::viscous;
    throw config_error("damping must be 'structural' or 'viscous', got '" + s + "'");
}

inline const char* to_string(Damping d) {
    return d == Damping::structural ? "structural" : "viscous";
}

// Single-mode thermal displacement ASD in m/sqrt(Hz) at angular frequency
// omega. Structural damping spreads the loss as an imaginary stiffness
// (phi = 1/Q); viscous damping is the velocity-proportional classic. Both
// give x(omega_m) = sqrt(4 k_B T Q / (m omega_m^3)) on resonance.
inline double thermal_asd_point(double omega, double omega_m, double q, double m_eff_kg,
                                double temperature_K,
                                Damping damping = Damping::structural) {
    if (!(omega > 0.0)) throw arg_error("thermal asd: omega must be > 0");
    if (!(omega_m > 0.0)) throw arg_error("thermal asd: omega_m must be > 0");
    if (!(q > 0.0)) throw arg_error("thermal asd: Q must be > 0");
    if (!(m_eff_kg > 0.0)) throw arg_error("thermal asd: m_eff must be > 0");
    if (!(temperature_K > 0.0)) throw arg_error("thermal asd: temperature must be > 0");
    const double kbt4 = 4.0 * PhysicalConstants::k_B * temperature_K;
    const double w2 = omega * omega;
    const double wm2 = omega_m * omega_m;
    const double det = (wm2 - w2) * (wm2 - w2);
    double psd;
    if (damping == Damping::structural) {
        psd = kbt4 * wm2 / (q * m_eff_kg * omega * (det + wm2 * wm2 / (q * q)));
    } else {
        psd = kbt4 * omega_m / (q * m_eff_kg * (det + wm2 * w2 / (q * q)));
    }
    return std::sqrt(psd);
}

namespace detail {

inline NoiseSpectrum mode_spectrum(const FrequencyGrid& grid, double omega_m_rad_s,
                                   double m_eff_kg, double q, double temperature_K,
                                   Damping damping) {
    if (grid.frequencies.empty()) throw arg_error("thermal asd: empty grid");
    NoiseSpectrum s;
    s.grid = grid;
    s.asd.reserve(grid.size());
    for (double f : grid.frequencies)
        s.asd.push_back(thermal_asd_point(2.0 * std::numbers::pi * f, omega_m_rad_s, q,
                                          m_eff_kg, temperature_K, damping));
    return s;
}

} // namespace detail

// Structurally damped single-mode spectrum over the grid.
inline NoiseSpectrum thermal_asd_mode(const FrequencyGrid& grid, double omega_m_rad_s,
                                      double m_eff_kg, double q, double temperature_K) {
    return detail::mode_spectrum(grid, omega_m_rad_s, m_eff_kg, q, temperature_K,
                                 Damping::structural);
}

// Viscously damped single-mode spectrum over the grid.
inline NoiseSpectrum viscous_asd_mode(const FrequencyGrid& grid, double omega_m_rad_s,
                                      double m_eff_kg, double q, double temperature_K) {
    return detail::mode_spectrum(grid, omega_m_rad_s, m_eff_kg, q, temperature_K,
                                 Damping::viscous);
}

// Incoherent (quadrature) total of per-mode spectra sharing one grid.
inline NoiseSpectrum total_thermal_asd(const std::vector<NoiseSpectrum>& components) {
    if (components.empty()) throw arg_error("total_thermal_asd: no components");
    NoiseSpectrum total;
    total.grid = components.front().grid;
    total.asd.assign(total.grid.size(), 0.0);
    for (const NoiseSpectrum& c : components) {
        if (!c.grid.same_as(total.grid))
            throw arg_error("total_thermal_asd: component grids differ");
        if (c.asd.size() != total.asd.size())
            throw arg_error("total_thermal_asd: component length mismatch");
        for (std::size_t i = 0; i < c.asd.size(); ++i) total.asd[i] += c.asd[i] * c.asd[i];
    }
    for (double& v : total.asd) v = std::sqrt(v);
    return total;
}

struct NoiseMode {
    double frequency_hz = 0.0;
    double q = 0.0;
    double m_eff_kg = 0.0;
};

// Convenience overload used by the pipeline: per-mode parameters in, summed
// spectrum out.
inline NoiseSpectrum total_thermal_asd(const FrequencyGrid& grid,
                                       const std::vector<NoiseMode>& modes,
                                       double temperature_K,
                                       Damping damping = Damping::structural) {
    if (modes.empty()) throw arg_error("total_thermal_asd: no modes");
    std::vector<NoiseSpectrum> parts;
    parts.reserve(modes.size());
    for (const NoiseMode& m : modes)
        parts.push_back(detail::mode_spectrum(grid, 2.0 * std::numbers::pi * m.frequency_hz,
                                              m.m_eff_kg, m.q, temperature_K, damping));
    return total_thermal_asd(parts);
}

// Free-mass quantum reference x(omega) = sqrt(hbar / (2 m)) / omega, so that
// omega * x(omega) is constant over the grid.
inline double sql_asd_point(double frequency_hz, double mass_kg) {
    if (!(frequency_hz > 0.0)) throw arg_error("sql_asd: frequency must be > 0");
    if (!(mass_kg > 0.0)) throw arg_error("sql_asd: mass must be > 0");
    const double omega = 2.0 * std::numbers::pi * frequency_hz;
    return std::sqrt(PhysicalConstants::hbar / (2.0 * mass_kg)) / omega;
}

inline NoiseSpectrum sql_asd(double mass_kg, const FrequencyGrid& grid) {
    if (grid.frequencies.empty()) throw arg_error("sql_asd: empty grid");
    NoiseSpectrum s;
    s.grid = grid;
    s.asd.reserve(grid.size());
    for (double f : grid.frequencies) s.asd.push_back(sql_asd_point(f, mass_kg));
    return s;
}

} // namespace subsql
