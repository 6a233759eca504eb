#pragma once

// Run configuration (JSON), the point pipeline composing stack -> geometry
// -> modes -> spectra -> metrics, and the parallel sweep/design drivers.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "designer.hpp"
#include "errors.hpp"
#include "metrics.hpp"
#include "modal.hpp"
#include "noise.hpp"
#include "tmm.hpp"

namespace subsql {

namespace cfg {

// Unknown keys are config errors at every nesting level so that a typo in a
// sweep name can never silently fall back to a default.
inline void require_keys(const nlohmann::json& j,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& ctx) {
    if (!j.is_object()) throw config_error(ctx + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw config_error(ctx + ": unknown key '" + key + "'");
    }
}

inline double num_or(const nlohmann::json& j, const char* key, double fallback,
                     const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) throw config_error(ctx + "." + key + " must be a number");
    return v.get<double>();
}

inline int int_or(const nlohmann::json& j, const char* key, int fallback,
                  const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw config_error(ctx + "." + key + " must be an integer");
    return v.get<int>();
}

inline std::string str_or(const nlohmann::json& j, const char* key, std::string fallback,
                          const std::string& ctx) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_string()) throw config_error(ctx + "." + key + " must be a string");
    return v.get<std::string>();
}

} // namespace cfg

struct StackSpec {
    int n_pairs = 22;
    double t_gaas_nm = 76.6;
    double t_algaas_nm = 89.5;
    double t_etch_nm = 29.6;
    double support_gaas_nm = 35.8;
    double support_algaas_nm = 34.7;

    static StackSpec from_json(const nlohmann::json& j) {
        cfg::require_keys(
            j, {"n_pairs", "t_gaas_nm", "t_algaas_nm", "t_etch_nm", "support_pair_nm"},
            "stack");
        StackSpec s;
        s.n_pairs = cfg::int_or(j, "n_pairs", s.n_pairs, "stack");
        s.t_gaas_nm = cfg::num_or(j, "t_gaas_nm", s.t_gaas_nm, "stack");
        s.t_algaas_nm = cfg::num_or(j, "t_algaas_nm", s.t_algaas_nm, "stack");
        s.t_etch_nm = cfg::num_or(j, "t_etch_nm", s.t_etch_nm, "stack");
        if (j.contains("support_pair_nm")) {
            const auto& p = j.at("support_pair_nm");
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw config_error("stack.support_pair_nm must be [t_gaas, t_algaas]");
            s.support_gaas_nm = p[0].get<double>();
            s.support_algaas_nm = p[1].get<double>();
        }
        return s;
    }

    Stack build(const MaterialRegistry& mats) const {
        return make_mirror_stack(mats, support_gaas_nm, support_algaas_nm, n_pairs, t_gaas_nm,
                                 t_algaas_nm, t_etch_nm);
    }
};

struct GeometrySpec {
    double l_um = 55.0;
    double w_um = 8.0;
    double r_um = 32.0;
    double y_um = 3.75;

    static GeometrySpec from_json(const nlohmann::json& j) {
        cfg::require_keys(j, {"l_um", "w_um", "r_um", "y_um"}, "geometry");
        GeometrySpec g;
        g.l_um = cfg::num_or(j, "l_um", g.l_um, "geometry");
        g.w_um = cfg::num_or(j, "w_um", g.w_um, "geometry");
        g.r_um = cfg::num_or(j, "r_um", g.r_um, "geometry");
        g.y_um = cfg::num_or(j, "y_um", g.y_um, "geometry");
        return g;
    }
};

struct GridSpec {
    double f_min_hz = 10.0;
    double f_max_hz = 1e7;
    int points_per_decade = 200;

    static GridSpec from_json(const nlohmann::json& j) {
        cfg::require_keys(j, {"f_min_hz", "f_max_hz", "points_per_decade"}, "grid");
        GridSpec g;
        g.f_min_hz = cfg::num_or(j, "f_min_hz", g.f_min_hz, "grid");
        g.f_max_hz = cfg::num_or(j, "f_max_hz", g.f_max_hz, "grid");
        g.points_per_decade = cfg::int_or(j, "points_per_decade", g.points_per_decade, "grid");
        return g;
    }

    FrequencyGrid build() const {
        try {
            return FrequencyGrid::log_spaced(f_min_hz, f_max_hz, points_per_decade);
        } catch (const arg_error& e) {
            throw config_error(std::string("grid: ") + e.what());
        }
    }
};

struct DesignSpec {
    double target_ppm = 250.0;
    double min_pair_nm = 50.0;
    double lambda0_nm = 1078.0;
    std::array<std::array<double, 2>, 2> bounds_nm{{{10.0, 120.0}, {10.0, 120.0}}};
    int population_size = 5;
    int max_generations = 200;

    static DesignSpec from_json(const nlohmann::json& j) {
        cfg::require_keys(j,
                          {"target_ppm", "min_pair_nm", "lambda0_nm", "bounds_nm",
                           "population_size", "max_generations"},
                          "design");
        DesignSpec d;
        d.target_ppm = cfg::num_or(j, "target_ppm", d.target_ppm, "design");
        d.min_pair_nm = cfg::num_or(j, "min_pair_nm", d.min_pair_nm, "design");
        d.lambda0_nm = cfg::num_or(j, "lambda0_nm", d.lambda0_nm, "design");
        d.population_size = cfg::int_or(j, "population_size", d.population_size, "design");
        d.max_generations = cfg::int_or(j, "max_generations", d.max_generations, "design");
        if (j.contains("bounds_nm")) {
            const auto& b = j.at("bounds_nm");
            const bool shaped = b.is_array() && b.size() == 2 &&
                                b[0].is_array() && b[0].size() == 2 &&
                                b[1].is_array() && b[1].size() == 2;
            if (!shaped)
                throw config_error("design.bounds_nm must be [[min,max],[min,max]]");
            for (int g = 0; g < 2; ++g)
                for (int k = 0; k < 2; ++k) {
                    if (!b[g][k].is_number())
                        throw config_error("design.bounds_nm entries must be numbers");
                    d.bounds_nm[g][k] = b[g][k].get<double>();
                }
        }
        return d;
    }
};

enum class SweepParameter { length_um, width_um, radius_um, spot_um, support_pair_nm };

inline const char* to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::length_um: return "length_um";
        case SweepParameter::width_um: return "width_um";
        case SweepParameter::radius_um: return "radius_um";
        case SweepParameter::spot_um: return "spot_um";
        default: return "support_pair_nm";
    }
}

inline SweepParameter parse_sweep_parameter(const std::string& s) {
    if (s == "length_um") return SweepParameter::length_um;
    if (s == "width_um") return SweepParameter::width_um;
    if (s == "radius_um") return SweepParameter::radius_um;
    if (s == "spot_um") return SweepParameter::spot_um;
    if (s == "support_pair_nm") return SweepParameter::support_pair_nm;
    throw config_error("sweep.parameter: unknown parameter '" + s + "'");
}

inline std::vector<double> default_sweep_values(SweepParameter p) {
    switch (p) {
        case SweepParameter::length_um: return {25.0, 40.0, 55.0, 70.0, 85.0, 100.0};
        case SweepParameter::width_um: return {6.0, 8.0, 10.0, 12.0};
        case SweepParameter::radius_um: return {12.0, 22.0, 32.0, 42.0};
        case SweepParameter::spot_um: return {2.75, 3.75, 4.75, 5.75};
        case SweepParameter::support_pair_nm: return {70.5, 82.1, 102.8};
    }
    throw arg_error("default_sweep_values: bad parameter");
}

struct SweepSpec {
    SweepParameter parameter = SweepParameter::length_um;
    std::vector<double> values;

    static SweepSpec from_json(const nlohmann::json& j) {
        cfg::require_keys(j, {"parameter", "values"}, "sweep");
        if (!j.contains("parameter"))
            throw config_error("sweep: 'parameter' is required");
        SweepSpec s;
        s.parameter = parse_sweep_parameter(cfg::str_or(j, "parameter", "", "sweep"));
        if (j.contains("values")) {
            const auto& v = j.at("values");
            if (!v.is_array() || v.empty())
                throw config_error("sweep.values must be a non-empty array");
            for (const auto& e : v) {
                if (!e.is_number()) throw config_error("sweep.values entries must be numbers");
                s.values.push_back(e.get<double>());
            }
            for (std::size_t i = 0; i < s.values.size(); ++i) {
                if (!(s.values[i] > 0.0))
                    throw config_error("sweep.values must be positive");
                if (i > 0 && !(s.values[i] > s.values[i - 1]))
                    throw config_error("sweep.values must be strictly ascending");
            }
        } else {
            s.values = default_sweep_values(s.parameter);
        }
        return s;
    }
};

enum class SqlMass { fundamental, pad };

struct RunConfig {
    MaterialRegistry materials = MaterialRegistry::defaults();
    StackSpec stack;
    GeometrySpec geometry;
    double temperature_k = 10.0;
    double q_default = 1e4;
    std::map<std::string, double> q_overrides;
    GridSpec grid;
    Damping damping = Damping::structural;
    SqlMass sql_mass = SqlMass::fundamental;
    int n_elements = 100;
    std::uint64_t seed = 1;
    DesignSpec design;
    std::optional<SweepSpec> sweep;
    std::string noise_csv;

    static RunConfig from_json(const nlohmann::json& j) {
        cfg::require_keys(j,
                          {"material_set", "materials", "stack", "geometry", "temperature_k",
                           "q_default", "q_overrides", "grid", "damping", "sql_mass",
                           "n_elements", "seed", "design", "sweep", "noise_csv"},
                          "config");
        RunConfig c;

        const std::string set = cfg::str_or(j, "material_set", "quarter_wave", "config");
        if (set == "quarter_wave")
            c.materials = MaterialRegistry::defaults();
        else if (set == "calibrated")
            c.materials = MaterialRegistry::calibrated_effective();
        else
            throw config_error("material_set must be 'quarter_wave' or 'calibrated'");

        if (j.contains("materials")) {
            const auto& arr = j.at("materials");
            if (!arr.is_array()) throw config_error("materials must be an array");
            for (const auto& e : arr) {
                try {
                    c.materials.put(MaterialRegistry::material_from_json(e));
                } catch (const arg_error& ex) {
                    throw config_error(std::string("materials: ") + ex.what());
                }
            }
        }

        if (j.contains("stack")) c.stack = StackSpec::from_json(j.at("stack"));
        if (j.contains("geometry")) c.geometry = GeometrySpec::from_json(j.at("geometry"));
        c.temperature_k = cfg::num_or(j, "temperature_k", c.temperature_k, "config");
        c.q_default = cfg::num_or(j, "q_default", c.q_default, "config");
        if (j.contains("q_overrides")) {
            const auto& q = j.at("q_overrides");
            cfg::require_keys(q, {"fundamental", "pitch", "higher"}, "q_overrides");
            for (const auto& [key, value] : q.items()) {
                if (!value.is_number())
                    throw config_error("q_overrides." + key + " must be a number");
                c.q_overrides[key] = value.get<double>();
            }
        }
        if (j.contains("grid")) c.grid = GridSpec::from_json(j.at("grid"));
        c.damping = parse_damping(cfg::str_or(j, "damping", "structural", "config"));
        const std::string sm = cfg::str_or(j, "sql_mass", "fundamental", "config");
        if (sm == "fundamental")
            c.sql_mass = SqlMass::fundamental;
        else if (sm == "pad")
            c.sql_mass = SqlMass::pad;
        else
            throw config_error("sql_mass must be 'fundamental' or 'pad'");
        c.n_elements = cfg::int_or(j, "n_elements", c.n_elements, "config");
        if (j.contains("seed")) {
            const auto& s = j.at("seed");
            if (!s.is_number_unsigned())
                throw config_error("seed must be a non-negative integer");
            c.seed = s.get<std::uint64_t>();
        }
        if (j.contains("design")) c.design = DesignSpec::from_json(j.at("design"));
        if (j.contains("sweep")) c.sweep = SweepSpec::from_json(j.at("sweep"));
        c.noise_csv = cfg::str_or(j, "noise_csv", "", "config");
        return c;
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream is(path, std::ios::binary);
        if (!is) throw io_error("cannot open config '" + path + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(is);
        } catch (const nlohmann::json::exception& e) {
            throw config_error("config '" + path + "': " + e.what());
        }
        return from_json(j);
    }

    Stack build_stack() const { return stack.build(materials); }

    DesignPoint point() const {
        DesignPoint dp;
        dp.stack = build_stack();
        dp.geometry =
            geometry_from_stack(dp.stack, geometry.r_um, geometry.l_um, geometry.w_um,
                                geometry.y_um);
        dp.temperature_K = temperature_k;
        dp.q_default = q_default;
        dp.q_overrides = q_overrides;
        dp.validate();
        return dp;
    }
};

struct PointResult {
    std::vector<Mode> modes;            // full solved spectrum, ascending
    std::vector<ModeReadout> readouts;  // parallel to modes
    std::vector<std::size_t> retained;  // indices feeding the noise sum
    NoiseSpectrum thermal;
    NoiseSpectrum sql;
    std::vector<double> ratio;          // sql / thermal per grid point
    std::optional<SubSqlMetrics> metrics;
    double sql_mass_kg = 0.0;
};

inline double q_for_label(const RunConfig& cfg, ModeLabel label) {
    const auto it = cfg.q_overrides.find(to_string(label));
    return it != cfg.q_overrides.end() ? it->second : cfg.q_default;
}

// Full deterministic pipeline at one configuration: modal solve, readout
// projection, retained-mode noise total, quantum reference, band metrics.
inline PointResult run_point(const RunConfig& cfg) {
    const DesignPoint dp = cfg.point();
    const BeamModel bm = beam_from_point(dp, cfg.n_elements);

    PointResult out;
    out.modes = solve_modes(bm, 2 * bm.n_elements);
    out.readouts = readout_coupling(out.modes, bm.end_body.center_offset_m,
                                    dp.geometry.y_um * 1e-6);

    const FrequencyGrid grid = cfg.grid.build();
    std::vector<NoiseMode> noise_modes;
    for (std::size_t i = 0; i < out.modes.size(); ++i) {
        if (!out.readouts[i].coupled) continue;
        if (!(out.modes[i].frequency_hz < grid.f_max_hz)) continue;
        out.retained.push_back(i);
        noise_modes.push_back({out.modes[i].frequency_hz,
                               q_for_label(cfg, out.modes[i].label),
                               out.readouts[i].m_eff_kg});
    }
    if (noise_modes.empty())
        throw numeric_error("no coupled modes fall inside the frequency grid");

    out.thermal = total_thermal_asd(grid, noise_modes, dp.temperature_K, cfg.damping);

    if (cfg.sql_mass == SqlMass::fundamental) {
        if (!out.readouts.front().coupled)
            throw numeric_error("fundamental mode is decoupled at this spot position");
        out.sql_mass_kg = out.readouts.front().m_eff_kg;
    } else {
        out.sql_mass_kg = pad_mass(dp.stack, dp.geometry.r_um);
    }
    out.sql = sql_asd(out.sql_mass_kg, grid);
    out.ratio = ratio_sql_over_tn(out.sql, out.thermal);
    out.metrics = compute_metrics(grid.frequencies, out.ratio);
    return out;
}

struct SweepRow {
    double value = 0.0;
    double f1_hz = std::numeric_limits<double>::quiet_NaN();
    double f_pitch_hz = std::numeric_limits<double>::quiet_NaN();
    double f_high_hz = std::numeric_limits<double>::quiet_NaN();
    double r_max = std::numeric_limits<double>::quiet_NaN();
    double f_max_hz = std::numeric_limits<double>::quiet_NaN();
    double f_l_hz = std::numeric_limits<double>::quiet_NaN();
    double f_h_hz = std::numeric_limits<double>::quiet_NaN();
    double bwe = std::numeric_limits<double>::quiet_NaN();
    int dip_count = 0;
};

struct SweepResult {
    SweepParameter parameter = SweepParameter::length_um;
    std::vector<SweepRow> rows;  // input value order
};

inline RunConfig apply_sweep_value(RunConfig cfg, SweepParameter p, double value) {
    switch (p) {
        case SweepParameter::length_um: cfg.geometry.l_um = value; break;
        case SweepParameter::width_um: cfg.geometry.w_um = value; break;
        case SweepParameter::radius_um: cfg.geometry.r_um = value; break;
        case SweepParameter::spot_um: cfg.geometry.y_um = value; break;
        case SweepParameter::support_pair_nm: {
            const double total = cfg.stack.support_gaas_nm + cfg.stack.support_algaas_nm;
            if (!(total > 0.0))
                throw config_error("sweep: support pair total must be > 0 to rescale");
            const double scale = value / total;
            cfg.stack.support_gaas_nm *= scale;
            cfg.stack.support_algaas_nm *= scale;
            break;
        }
    }
    return cfg;
}

namespace detail {

// Index-sharded fan-out; results land in caller-owned slots so gather order
// is by index regardless of worker scheduling.
template <class Worker>
std::vector<std::exception_ptr> run_indexed(std::size_t n, int threads, Worker work) {
    std::vector<std::exception_ptr> errs(n);
    if (n == 0) return errs;
    const int t = std::clamp<int>(threads, 1, static_cast<int>(n));
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                work(i);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    if (t == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(t));
        for (int k = 0; k < t; ++k) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    return errs;
}

// Re-throws the first (lowest-index) failure with a context prefix, keeping
// the original error category so exit codes survive the wrapping.
[[noreturn]] inline void rethrow_with_context(std::exception_ptr ep, const std::string& prefix) {
    try {
        std::rethrow_exception(ep);
    } catch (const eval_error& e) {
        throw eval_error(prefix + e.what(), e.point);
    } catch (const stack_error& e) {
        throw stack_error(prefix + e.what());
    } catch (const arg_error& e) {
        throw arg_error(prefix + e.what());
    } catch (const config_error& e) {
        throw config_error(prefix + e.what());
    } catch (const numeric_error& e) {
        throw numeric_error(prefix + e.what());
    } catch (const io_error& e) {
        throw io_error(prefix + e.what());
    } catch (const std::exception& e) {
        throw error(prefix + e.what());
    }
}

} // namespace detail

// One run_point per sweep value; rows come back in input order under any
// thread count. The first failing value aborts the sweep, identified in the
// error message.
inline SweepResult run_sweep(const RunConfig& cfg, int threads = 1) {
    if (!cfg.sweep) throw config_error("sweep: config has no 'sweep' section");
    const SweepSpec& spec = *cfg.sweep;

    SweepResult result;
    result.parameter = spec.parameter;
    result.rows.resize(spec.values.size());

    auto errs = detail::run_indexed(spec.values.size(), threads, [&](std::size_t i) {
        const double value = spec.values[i];
        const RunConfig point_cfg = apply_sweep_value(cfg, spec.parameter, value);
        const PointResult pr = run_point(point_cfg);

        SweepRow row;
        row.value = value;
        row.f1_hz = pr.modes.front().frequency_hz;
        for (const Mode& m : pr.modes)
            if (m.label == ModeLabel::pitch) {
                row.f_pitch_hz = m.frequency_hz;
                break;
            }
        row.f_high_hz = pr.modes[pr.retained.back()].frequency_hz;
        if (pr.metrics) {
            row.r_max = pr.metrics->r_max;
            row.f_max_hz = pr.metrics->f_max_hz;
            row.f_l_hz = pr.metrics->f_l_hz;
            row.f_h_hz = pr.metrics->f_h_hz;
            row.bwe = pr.metrics->bwe;
            row.dip_count = pr.metrics->dip_count;
        }
        result.rows[i] = row;
    });

    for (std::size_t i = 0; i < errs.size(); ++i)
        if (errs[i]) {
            std::ostringstream ctx;
            ctx << "sweep " << to_string(spec.parameter) << "=" << spec.values[i] << ": ";
            detail::rethrow_with_context(errs[i], ctx.str());
        }
    return result;
}

struct DesignRun {
    std::uint64_t seed = 0;
    DesignResult result;
};

// Independent designer runs from consecutive seeds, in parallel; output
// order is seed order.
inline std::vector<DesignRun> run_design(const RunConfig& cfg, int n_seeds, int threads = 1) {
    if (n_seeds < 1) throw arg_error("design: seeds must be >= 1");
    const Stack templ = cfg.build_stack();
    const DesignSpec& d = cfg.design;

    std::vector<DesignRun> runs(static_cast<std::size_t>(n_seeds));
    auto errs = detail::run_indexed(runs.size(), threads, [&](std::size_t i) {
        GaConfig g;
        g.seed = cfg.seed + i;
        g.population_size = d.population_size;
        g.max_generations = d.max_generations;
        g.gene_bounds = {d.bounds_nm[0], d.bounds_nm[1]};
        runs[i].seed = g.seed;
        runs[i].result =
            design_support_pair(templ, d.target_ppm, d.min_pair_nm, d.lambda0_nm, g);
    });

    for (std::size_t i = 0; i < errs.size(); ++i)
        if (errs[i]) {
            std::ostringstream ctx;
            ctx << "design seed " << (cfg.seed + i) << ": ";
            detail::rethrow_with_context(errs[i], ctx.str());
        }
    return runs;
}

// --threads flag wins, then SUBSQL_THREADS, then hardware concurrency.
inline int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("SUBSQL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw config_error("SUBSQL_THREADS must be a positive integer");
        return static_cast<int>(std::min<long>(v, 1024));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

} // namespace subsql
