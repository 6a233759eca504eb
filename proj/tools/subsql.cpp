// Command-line front end: design | modes | noise | metrics | sweep.
// Exit codes: 0 success, 2 bad arguments or configuration, 3 numerical
// failure, 4 I/O failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <subsql/subsql.hpp>

namespace {

template <class Writer>
void to_out(const std::string& out_path, Writer writer) {
    if (out_path.empty()) {
        writer(std::cout);
    } else {
        std::ofstream os = subsql::open_output(out_path);
        writer(os);
    }
}

} // namespace

int main(int argc, char** argv) {
    using namespace subsql;

    CLI::App app{"mirror-stack, cantilever-mode and noise-budget design tool"};
    app.require_subcommand(1);

    std::string config_path, out_path, svg_path, in_path, damping_str;
    std::uint64_t seed = 0;
    int threads = 0;
    int n_seeds = 10;
    int n_modes = 8;

    auto add_common = [&](CLI::App* sc, bool config_required) {
        auto* opt = sc->add_option("--config", config_path, "JSON run configuration");
        if (config_required) opt->required();
        sc->add_option("--out", out_path, "output CSV path (default: stdout)");
        sc->add_option("--seed", seed, "seed override for stochastic stages");
        sc->add_option("--threads", threads,
                       "worker threads (default: SUBSQL_THREADS, then hardware)");
        sc->add_option("--damping", damping_str, "damping model: structural|viscous");
    };

    CLI::App* sc_design = app.add_subcommand("design", "optimize the support-pair thicknesses");
    add_common(sc_design, true);
    sc_design->add_option("--seeds", n_seeds, "number of independent optimizer seeds")
        ->check(CLI::PositiveNumber);

    CLI::App* sc_modes = app.add_subcommand("modes", "solve cantilever modes and readout");
    add_common(sc_modes, true);
    sc_modes->add_option("--n-modes", n_modes, "modes to list")->check(CLI::PositiveNumber);

    CLI::App* sc_noise = app.add_subcommand("noise", "thermal and quantum-limit spectra");
    add_common(sc_noise, true);
    sc_noise->add_option("--svg", svg_path, "also write a log-log plot to this path");

    CLI::App* sc_metrics = app.add_subcommand("metrics", "band metrics from a noise CSV");
    add_common(sc_metrics, false);
    sc_metrics->add_option("--in", in_path, "noise CSV to analyze (overrides config)");

    CLI::App* sc_sweep = app.add_subcommand("sweep", "run the configured parameter sweep");
    add_common(sc_sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();

    try {
        RunConfig cfg;
        if (sub->count("--config") > 0) cfg = RunConfig::from_file(config_path);
        if (sub->count("--seed") > 0) cfg.seed = seed;
        if (sub->count("--damping") > 0) cfg.damping = parse_damping(damping_str);

        if (sub == sc_design) {
            const auto runs = run_design(cfg, n_seeds, resolve_threads(threads));
            to_out(out_path, [&](std::ostream& os) { write_design_csv(os, runs); });
        } else if (sub == sc_modes) {
            const PointResult pr = run_point(cfg);
            if (static_cast<std::size_t>(n_modes) > pr.modes.size())
                throw arg_error("--n-modes exceeds the " + std::to_string(pr.modes.size()) +
                                " modes this mesh resolves");
            const std::vector<Mode> modes(pr.modes.begin(), pr.modes.begin() + n_modes);
            const std::vector<ModeReadout> readouts(pr.readouts.begin(),
                                                    pr.readouts.begin() + n_modes);
            to_out(out_path, [&](std::ostream& os) { write_modes_csv(os, modes, readouts); });
        } else if (sub == sc_noise) {
            const PointResult pr = run_point(cfg);
            to_out(out_path, [&](std::ostream& os) { write_noise_csv(os, pr.thermal, pr.sql); });
            if (!svg_path.empty()) {
                std::ofstream os = open_output(svg_path);
                write_noise_svg(os, pr.thermal, pr.sql, pr.metrics);
            }
        } else if (sub == sc_metrics) {
            const std::string src = !in_path.empty() ? in_path : cfg.noise_csv;
            if (src.empty())
                throw config_error("metrics: provide --in <csv> or config key 'noise_csv'");
            std::vector<double> frequencies, ratio;
            read_noise_csv_file(src, frequencies, ratio);
            const auto m = compute_metrics(frequencies, ratio);
            if (!m) std::cerr << "note: ratio never exceeds 1; writing header only\n";
            to_out(out_path, [&](std::ostream& os) { write_metrics_csv(os, m); });
        } else if (sub == sc_sweep) {
            const SweepResult res = run_sweep(cfg, resolve_threads(threads));
            to_out(out_path, [&](std::ostream& os) { write_sweep_csv(os, res); });
        }
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const arg_error& e) {
        std::cerr << "argument error: " << e.what() << '\n';
        return 2;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 4;
    } catch (const numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
