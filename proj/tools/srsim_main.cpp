#include "srsim/cloud.hpp"
#include "srsim/ensemble.hpp"
#include "srsim/randomwalk.hpp"
#include "srsim/rng.hpp"
#include "srsim/run_config.hpp"
#include "srsim/table_io.hpp"
#include "srsim/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <thread>

namespace {

using namespace srsim;

constexpr int exit_ok = 0;
constexpr int exit_config_error = 2;
constexpr int exit_numerical_error = 3;
constexpr int exit_partial = 4;

std::string window_label(double t1, double t2) {
    return "w=" + TableWriter::num(t1) + ":" + TableWriter::num(t2);
}

std::string snapshot_label(double t) { return "t=" + TableWriter::num(t); }

std::vector<std::string> run_metadata(const RunConfig& cfg) {
    return {
        "srsim " + cfg.subcommand,
        std::string("version: ") + version,
        "config: " + serialize_config(cfg),
        "master_seed: " + std::to_string(cfg.master_seed),
    };
}

std::vector<std::string> run_metadata(const RunConfig& cfg, const EnsembleResult& res) {
    auto meta = run_metadata(cfg);
    meta.push_back("n_configs: " + std::to_string(res.n_configs) +
                   " n_rejected: " + std::to_string(res.n_rejected));
    return meta;
}

void write_run_log(const std::filesystem::path& out_dir, const RunConfig& cfg,
                   const EnsembleResult& res) {
    std::ofstream log(out_dir / "run_log.txt");
    log << "srsim " << cfg.subcommand << " version " << version << "\n";
    log << "config " << serialize_config(cfg) << "\n";
    log << "wall_seconds " << res.wall_seconds << "\n";
    log << "n_configs " << res.n_configs << " n_rejected " << res.n_rejected << "\n";
    for (auto seed : res.rejected_seeds)
        log << "rejected_seed " << seed << "\n";
}

/// Collect snapshot times and window endpoints into one sorted time grid.
std::vector<double> gather_times(const std::vector<double>& snapshots,
                                 const std::vector<std::pair<double, double>>& windows) {
    std::set<double> times(snapshots.begin(), snapshots.end());
    for (const auto& w : windows) {
        times.insert(w.first);
        times.insert(w.second);
    }
    return {times.begin(), times.end()};
}

int finish(const RunConfig& cfg, const EnsembleResult& res,
           const std::filesystem::path& out_dir) {
    write_run_log(out_dir, cfg, res);
    if (res.rejection_flagged) {
        std::cerr << "srsim: warning: " << res.n_rejected << "/" << res.n_configs
                  << " configurations rejected (>= 5%)\n";
        return exit_partial;
    }
    return exit_ok;
}

int cmd_angular_scan(const RunConfig& cfg, const std::filesystem::path& out_dir,
                     int workers) {
    EnsembleSpec spec =
        cfg.to_ensemble_spec(cfg.thetas, gather_times(cfg.snapshot_times, cfg.windows));
    const EnsembleResult res = run_ensemble(spec, workers);
    const auto meta = run_metadata(cfg, res);

    if (!cfg.snapshot_times.empty()) {
        TableWriter table((out_dir / "intensity_vs_theta.csv").string(), meta,
                          {"theta_rad", "channel", "t_or_window", "value", "stderr"});
        for (std::size_t a = 0; a < spec.thetas.size(); ++a)
            for (std::size_t p = 0; p < spec.polarizations.size(); ++p) {
                const auto series = res.series(a, p);
                for (double t : cfg.snapshot_times) {
                    const auto it =
                        std::find(series.times.begin(), series.times.end(), t);
                    const std::size_t k =
                        static_cast<std::size_t>(it - series.times.begin());
                    table.row({TableWriter::num(spec.thetas[a]),
                               polarization_name(spec.polarizations[p]),
                               snapshot_label(t), TableWriter::num(series.mean_intensity[k]),
                               TableWriter::num(series.stderr_intensity[k])});
                }
            }
    }

    if (!cfg.windows.empty()) {
        TableWriter table((out_dir / "gamma_vs_theta.csv").string(), meta,
                          {"theta_rad", "channel", "t_or_window", "value", "stderr"});
        for (std::size_t a = 0; a < spec.thetas.size(); ++a)
            for (std::size_t p = 0; p < spec.polarizations.size(); ++p)
                for (const auto& w : cfg.windows) {
                    const auto rate = res.window_rate(a, p, w.first, w.second);
                    table.row({TableWriter::num(spec.thetas[a]),
                               polarization_name(spec.polarizations[p]),
                               window_label(w.first, w.second),
                               TableWriter::num(rate.gamma),
                               TableWriter::num(rate.gamma_stderr)});
                }
    }
    return finish(cfg, res, out_dir);
}

int cmd_time_scan(const RunConfig& cfg, const std::filesystem::path& out_dir,
                  int workers) {
    const std::vector<double> times =
        make_time_grid(cfg.time_grid.t_min, cfg.time_grid.t_split, cfg.time_grid.t_max,
                       cfg.time_grid.n_geometric, cfg.time_grid.n_linear);
    EnsembleSpec spec = cfg.to_ensemble_spec(cfg.directions, times);
    const EnsembleResult res = run_ensemble(spec, workers);

    TableWriter table((out_dir / "gamma_vs_time.csv").string(), run_metadata(cfg, res),
                      {"t", "theta_rad", "channel", "gamma", "stderr_flag"});
    for (std::size_t a = 0; a < spec.thetas.size(); ++a)
        for (std::size_t p = 0; p < spec.polarizations.size(); ++p)
            for (std::size_t k = 0; k + 1 < times.size(); ++k) {
                const auto rate = res.window_rate(a, p, times[k], times[k + 1]);
                const double t_mid = 0.5 * (times[k] + times[k + 1]);
                table.row({TableWriter::num(t_mid), TableWriter::num(spec.thetas[a]),
                           polarization_name(spec.polarizations[p]),
                           TableWriter::num(rate.gamma), rate.reliable ? "0" : "1"});
            }
    return finish(cfg, res, out_dir);
}

int cmd_spectral_scan(const RunConfig& cfg, const std::filesystem::path& out_dir,
                      int workers) {
    if (cfg.windows.size() != 1)
        throw ConfigError("config: spectral-scan requires exactly one window");
    if (cfg.directions.size() != 1)
        throw ConfigError("config: spectral-scan requires exactly one direction");
    const auto window = cfg.windows.front();

    std::optional<TableWriter> table;
    bool any_flagged = false;
    EnsembleResult last;
    for (double detuning : cfg.detunings) {
        RunConfig point = cfg;
        point.pulse.detuning = detuning;
        EnsembleSpec spec =
            point.to_ensemble_spec(cfg.directions, {window.first, window.second});
        // same master seed for every detuning: common configurations give a
        // smooth curve in the detuning
        last = run_ensemble(spec, workers);
        if (!table)
            table.emplace((out_dir / "gamma_vs_detuning.csv").string(),
                          run_metadata(cfg, last),
                          std::vector<std::string>{"detuning_gamma", "gamma",
                                                   "stderr_flag"});
        const auto rate = last.window_rate(0, 0, window.first, window.second);
        table->row({TableWriter::num(detuning), TableWriter::num(rate.gamma),
                    rate.reliable ? "0" : "1"});
        any_flagged = any_flagged || last.rejection_flagged;
    }
    write_run_log(out_dir, cfg, last);
    return any_flagged ? exit_partial : exit_ok;
}

/// Pull (theta, gamma) rows for the total channel out of a gamma_vs_theta
/// table, along with the geometry recorded in its header.
struct LoadedRateCurve {
    CloudGeometry geometry;
    std::vector<double> thetas;
    std::vector<double> gammas;
    std::string window;
};

LoadedRateCurve load_rate_curve(const std::string& path) {
    const TableData data = read_table(path);
    LoadedRateCurve curve;
    bool have_geometry = false;
    for (const auto& meta : data.metadata) {
        if (meta.rfind("config: ", 0) == 0) {
            const auto doc = nlohmann::json::parse(meta.substr(8));
            const auto& g = doc.at("geometry");
            curve.geometry.peak_density = g.at("n0").get<double>();
            curve.geometry.transverse_radius = g.at("R").get<double>();
            curve.geometry.longitudinal_radius = g.at("L").get<double>();
            have_geometry = true;
        }
    }
    if (!have_geometry)
        throw ConfigError("overlay: ensemble result file lacks a config header: " + path);

    int theta_col = -1, channel_col = -1, label_col = -1, value_col = -1;
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
        if (data.columns[c] == "theta_rad") theta_col = static_cast<int>(c);
        if (data.columns[c] == "channel") channel_col = static_cast<int>(c);
        if (data.columns[c] == "t_or_window") label_col = static_cast<int>(c);
        if (data.columns[c] == "value") value_col = static_cast<int>(c);
    }
    if (theta_col < 0 || channel_col < 0 || label_col < 0 || value_col < 0)
        throw ConfigError("overlay: unexpected columns in " + path);

    for (const auto& row : data.rows) {
        if (row[static_cast<std::size_t>(channel_col)] != "total")
            continue;
        const std::string& label = row[static_cast<std::size_t>(label_col)];
        if (label.rfind("w=", 0) != 0)
            continue;
        if (curve.window.empty())
            curve.window = label;
        if (label != curve.window)
            continue; // first window only
        curve.thetas.push_back(std::stod(row[static_cast<std::size_t>(theta_col)]));
        curve.gammas.push_back(std::stod(row[static_cast<std::size_t>(value_col)]));
    }
    if (curve.thetas.empty())
        throw ConfigError("overlay: no total-channel rate rows found in " + path);
    return curve;
}

int cmd_randomwalk(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    RandomWalkModel model{cfg.geometry};
    const auto meta = run_metadata(cfg);

    bool all_in_zone = true;
    for (double theta : cfg.thetas)
        all_in_zone = all_in_zone && in_coherent_zone(model, theta, cfg.guard_factor);
    if (all_in_zone)
        throw ConfigError(
            "randomwalk: every requested angle lies inside the coherent "
            "forward/backward zones");

    {
        TableWriter table((out_dir / "randomwalk_gamma.csv").string(), meta,
                          {"theta_rad", "channel", "t_or_window", "value", "stderr"});
        for (double theta : cfg.thetas)
            table.row({TableWriter::num(theta), "total", "analytic-t0",
                       TableWriter::num(decay_rate_analytic(model, theta)), "0"});
    }

    if (!cfg.ensemble_result.empty()) {
        const LoadedRateCurve curve = load_rate_curve(cfg.ensemble_result);
        const CloudGeometry& a = curve.geometry;
        const CloudGeometry& b = cfg.geometry;
        if (a.peak_density != b.peak_density ||
            a.transverse_radius != b.transverse_radius ||
            a.longitudinal_radius != b.longitudinal_radius)
            throw ConfigError("overlay: ensemble result geometry differs from config");

        double max_dev = 0.0;
        bool any_sideward = false;
        auto meta2 = meta;
        meta2.push_back("ensemble_window: " + curve.window);
        TableWriter table((out_dir / "overlay.csv").string(), meta2,
                          {"theta_rad", "gamma_microscopic", "gamma_analytic",
                           "rel_deviation", "in_coherent_zone"});
        for (std::size_t k = 0; k < curve.thetas.size(); ++k) {
            const double gamma_analytic = decay_rate_analytic(model, curve.thetas[k]);
            const double dev = (curve.gammas[k] - gamma_analytic) / gamma_analytic;
            const bool zone = in_coherent_zone(model, curve.thetas[k], cfg.guard_factor);
            if (!zone) {
                any_sideward = true;
                max_dev = std::max(max_dev, std::abs(dev));
            }
            table.row({TableWriter::num(curve.thetas[k]), TableWriter::num(curve.gammas[k]),
                       TableWriter::num(gamma_analytic), TableWriter::num(dev),
                       zone ? "1" : "0"});
        }
        if (!any_sideward)
            throw ConfigError("overlay: no angles outside the coherent zones");
        std::ofstream summary(out_dir / "overlay_summary.txt");
        summary << "max_sideward_rel_deviation " << TableWriter::num(max_dev) << "\n";
    }
    return exit_ok;
}

int cmd_sample_cloud(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    const long long n = cfg.n_atoms >= 0 ? cfg.n_atoms : expected_atom_number(cfg.geometry);
    if (n == 0)
        std::cerr << "srsim: warning: geometry resolves to zero atoms\n";
    const AtomConfiguration config =
        sample_cloud(cfg.geometry, static_cast<int>(n), cfg.master_seed);
    save_cloud(config, (out_dir / "cloud.txt").string());
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-, angle- and polarization-resolved fluorescence of dilute "
                 "Gaussian atomic clouds (coupled-dipole model)"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::uint64_t seed_override = 0;

    app.add_option("--config", config_path, "path to the JSON run configuration")
        ->required();
    app.add_option("--out", out_dir, "output directory (created if absent)");
    app.add_option("--workers", workers, "worker thread count hint");
    auto* seed_opt =
        app.add_option("--seed", seed_override, "override the master seed");

    app.add_subcommand("angular-scan",
                       "intensity and decay-rate tables versus scattering angle");
    app.add_subcommand("time-scan", "decay-rate tables versus time, fixed directions");
    app.add_subcommand("spectral-scan", "decay rate versus carrier detuning");
    app.add_subcommand("randomwalk",
                       "analytic single-scattering rates and microscopic overlay");
    app.add_subcommand("sample-cloud", "export one sampled atomic configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config_error;
    }

    try {
        const std::string subcommand = app.get_subcommands().front()->get_name();
        RunConfig cfg = load_run_config(config_path, subcommand);
        if (seed_opt->count() > 0)
            cfg.master_seed = seed_override;

        std::filesystem::path out(out_dir);
        std::filesystem::create_directories(out);

        if (subcommand == "angular-scan")
            return cmd_angular_scan(cfg, out, workers);
        if (subcommand == "time-scan")
            return cmd_time_scan(cfg, out, workers);
        if (subcommand == "spectral-scan")
            return cmd_spectral_scan(cfg, out, workers);
        if (subcommand == "randomwalk")
            return cmd_randomwalk(cfg, out);
        return cmd_sample_cloud(cfg, out);
    } catch (const ConfigError& e) {
        std::cerr << "srsim: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::invalid_argument& e) {
        std::cerr << "srsim: " << e.what() << "\n";
        return exit_config_error;
    } catch (const std::exception& e) {
        std::cerr << "srsim: " << e.what() << "\n";
        return exit_numerical_error;
    }
}
