#include "srsim/run_config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace srsim {

using nlohmann::json;

namespace {

constexpr double pi = 3.14159265358979323846;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + context);
}

double require_number(const json& obj, const std::string& key, const std::string& ctx) {
    if (!obj.contains(key))
        throw ConfigError("config: missing key '" + key + "' in " + ctx);
    if (!obj[key].is_number())
        throw ConfigError("config: key '" + key + "' in " + ctx + " must be a number");
    return obj[key].get<double>();
}

double optional_number(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_number())
        throw ConfigError("config: key '" + key + "' must be a number");
    return obj[key].get<double>();
}

std::vector<double> number_list(const json& arr, const std::string& ctx) {
    if (!arr.is_array() || arr.empty())
        throw ConfigError("config: " + ctx + " must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& v : arr) {
        if (!v.is_number())
            throw ConfigError("config: " + ctx + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

CloudGeometry parse_geometry(const json& obj) {
    if (!obj.is_object())
        throw ConfigError("config: 'geometry' must be an object");
    check_keys(obj, {"n0", "R", "L", "exclusion_radius"}, "'geometry'");
    CloudGeometry g;
    g.peak_density = require_number(obj, "n0", "'geometry'");
    g.transverse_radius = require_number(obj, "R", "'geometry'");
    g.longitudinal_radius = require_number(obj, "L", "'geometry'");
    if (obj.contains("exclusion_radius"))
        g.exclusion_radius = obj["exclusion_radius"].get<double>();
    try {
        g.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return g;
}

Drive parse_drive(const json& obj, std::string& pol_name) {
    check_keys(obj, {"type", "direction", "polarization"}, "'drive'");
    Drive d = Drive::default_coherent();
    if (!obj.contains("type"))
        throw ConfigError("config: 'drive' requires 'type'");
    const std::string type = obj["type"].get<std::string>();
    if (type == "incoherent") {
        d = Drive::incoherent();
        if (obj.contains("direction") || obj.contains("polarization"))
            throw ConfigError("config: incoherent drive takes no direction/polarization");
        pol_name = "";
        return d;
    }
    if (type != "coherent")
        throw ConfigError("config: drive type must be 'coherent' or 'incoherent'");
    if (obj.contains("direction")) {
        const auto dir = number_list(obj["direction"], "'drive.direction'");
        if (dir.size() != 3)
            throw ConfigError("config: 'drive.direction' must have 3 components");
        Eigen::Vector3d v(dir[0], dir[1], dir[2]);
        if (v.norm() == 0.0)
            throw ConfigError("config: 'drive.direction' must be nonzero");
        d.direction = v.normalized();
    }
    pol_name = obj.contains("polarization") ? obj["polarization"].get<std::string>()
                                            : "left-circular";
    const double theta = std::acos(std::clamp(d.direction.z(), -1.0, 1.0));
    const double phi = std::atan2(d.direction.y(), d.direction.x());
    const Eigen::Vector3d e_theta(std::cos(theta) * std::cos(phi),
                                  std::cos(theta) * std::sin(phi), -std::sin(theta));
    const Eigen::Vector3d e_phi(-std::sin(phi), std::cos(phi), 0.0);
    if (pol_name == "left-circular")
        d.polarization = circular_polarization(theta, phi, +1);
    else if (pol_name == "right-circular")
        d.polarization = circular_polarization(theta, phi, -1);
    else if (pol_name == "linear-x")
        d.polarization = e_theta.cast<std::complex<double>>();
    else if (pol_name == "linear-y")
        d.polarization = e_phi.cast<std::complex<double>>();
    else
        throw ConfigError("config: unknown drive polarization '" + pol_name + "'");
    return d;
}

std::vector<double> parse_theta(const json& obj, double transverse_radius) {
    check_keys(obj, {"values", "n", "densify_poles"}, "'theta'");
    if (obj.contains("values")) {
        if (obj.contains("n") || obj.contains("densify_poles"))
            throw ConfigError("config: 'theta' takes either 'values' or 'n', not both");
        auto values = number_list(obj["values"], "'theta.values'");
        for (double v : values)
            if (v < 0.0 || v > pi + 1e-12)
                throw ConfigError("config: theta values must lie in [0, pi]");
        return values;
    }
    if (!obj.contains("n"))
        throw ConfigError("config: 'theta' requires 'values' or 'n'");
    const int n = obj["n"].get<int>();
    const bool densify = obj.contains("densify_poles") ? obj["densify_poles"].get<bool>()
                                                       : true;
    return make_theta_grid(n, transverse_radius, densify);
}

std::vector<std::pair<double, double>> parse_windows(const json& arr) {
    if (!arr.is_array() || arr.empty())
        throw ConfigError("config: 'windows' must be a non-empty array of [t1, t2] pairs");
    std::vector<std::pair<double, double>> out;
    for (const auto& w : arr) {
        const auto pair = number_list(w, "'windows' entry");
        if (pair.size() != 2 || !(pair[1] > pair[0]) || pair[0] < 0.0)
            throw ConfigError("config: each window must be [t1, t2] with 0 <= t1 < t2");
        out.emplace_back(pair[0], pair[1]);
    }
    return out;
}

} // namespace

std::vector<double> make_theta_grid(int n_points, double transverse_radius,
                                    bool densify_poles) {
    if (n_points < 2)
        throw ConfigError("config: theta grid needs at least 2 points");
    std::vector<double> grid;
    if (!densify_poles) {
        for (int k = 0; k < n_points; ++k)
            grid.push_back(pi * k / (n_points - 1));
        return grid;
    }
    const double lobe = std::min(0.3, 6.0 / transverse_radius);
    const int n_pole = std::max(3, n_points / 4);
    const int n_mid = std::max(3, n_points - 2 * n_pole);
    for (int k = 0; k < n_pole; ++k)
        grid.push_back(lobe * k / n_pole);
    for (int k = 0; k <= n_mid; ++k)
        grid.push_back(lobe + (pi - 2.0 * lobe) * k / n_mid);
    for (int k = 1; k <= n_pole; ++k)
        grid.push_back(pi - lobe + lobe * k / n_pole);
    return grid;
}

std::string polarization_name(Polarization pol) {
    switch (pol) {
    case Polarization::helicity_preserving:
        return "HparH";
    case Polarization::helicity_nonpreserving:
        return "HperpH";
    default:
        return "total";
    }
}

Polarization polarization_from_name(const std::string& name) {
    if (name == "HparH")
        return Polarization::helicity_preserving;
    if (name == "HperpH")
        return Polarization::helicity_nonpreserving;
    if (name == "total")
        return Polarization::total;
    throw ConfigError("config: unknown channel '" + name +
                      "' (expected HparH, HperpH or total)");
}

RunConfig parse_run_config(const std::string& json_text, const std::string& subcommand) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    if (!doc.is_object())
        throw ConfigError("config: top level must be an object");

    static const std::set<std::string> known_commands = {
        "angular-scan", "time-scan", "spectral-scan", "randomwalk", "sample-cloud"};
    if (!known_commands.count(subcommand))
        throw ConfigError("config: unknown subcommand '" + subcommand + "'");

    std::set<std::string> allowed = {"geometry", "n_atoms", "master_seed"};
    if (subcommand != "sample-cloud") {
        allowed.insert({"n_configs", "pulse", "drive", "channels", "phi",
                        "keep_per_config"});
    }
    if (subcommand == "angular-scan")
        allowed.insert({"theta", "snapshot_times", "windows"});
    if (subcommand == "time-scan")
        allowed.insert({"directions", "time_grid"});
    if (subcommand == "spectral-scan")
        allowed.insert({"detunings", "windows", "directions"});
    if (subcommand == "randomwalk") {
        allowed = {"geometry", "theta", "ensemble_result", "guard_factor", "windows"};
    }
    check_keys(doc, allowed, "top level");

    RunConfig cfg;
    cfg.subcommand = subcommand;
    if (!doc.contains("geometry"))
        throw ConfigError("config: missing 'geometry'");
    cfg.geometry = parse_geometry(doc["geometry"]);

    if (doc.contains("n_atoms")) {
        cfg.n_atoms = doc["n_atoms"].get<long long>();
        if (cfg.n_atoms < 0)
            throw ConfigError("config: 'n_atoms' must be >= 0");
    }
    if (doc.contains("master_seed"))
        cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
    if (doc.contains("n_configs")) {
        cfg.n_configs = doc["n_configs"].get<int>();
        if (cfg.n_configs < 1)
            throw ConfigError("config: 'n_configs' must be >= 1");
    }
    if (doc.contains("phi"))
        cfg.phi = doc["phi"].get<double>();
    if (doc.contains("keep_per_config"))
        cfg.keep_per_config = doc["keep_per_config"].get<bool>();

    const bool needs_pulse = subcommand == "angular-scan" || subcommand == "time-scan" ||
                             subcommand == "spectral-scan";
    if (needs_pulse) {
        if (!doc.contains("pulse"))
            throw ConfigError("config: missing 'pulse'");
        check_keys(doc["pulse"], {"duration", "detuning"}, "'pulse'");
        cfg.pulse.duration = require_number(doc["pulse"], "duration", "'pulse'");
        cfg.pulse.detuning = optional_number(doc["pulse"], "detuning", 0.0);
        try {
            cfg.pulse.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (doc.contains("drive"))
            cfg.drive = parse_drive(doc["drive"], cfg.drive_polarization_name);
        else if (subcommand == "spectral-scan") {
            cfg.drive = Drive::incoherent(); // matches the incoherent-excitation protocol
            cfg.drive_polarization_name = "";
        }
        if (doc.contains("channels")) {
            cfg.channels.clear();
            for (const auto& name : doc["channels"])
                cfg.channels.push_back(polarization_from_name(name.get<std::string>()));
            if (cfg.channels.empty())
                throw ConfigError("config: 'channels' must not be empty");
        }
    }

    if (subcommand == "angular-scan") {
        if (!doc.contains("theta"))
            throw ConfigError("config: angular-scan requires 'theta'");
        cfg.thetas = parse_theta(doc["theta"], cfg.geometry.transverse_radius);
        if (doc.contains("snapshot_times"))
            cfg.snapshot_times = number_list(doc["snapshot_times"], "'snapshot_times'");
        if (doc.contains("windows"))
            cfg.windows = parse_windows(doc["windows"]);
        if (cfg.snapshot_times.empty() && cfg.windows.empty())
            throw ConfigError(
                "config: angular-scan requires 'snapshot_times' and/or 'windows'");
    } else if (subcommand == "time-scan") {
        if (!doc.contains("directions"))
            throw ConfigError("config: time-scan requires 'directions'");
        cfg.directions = number_list(doc["directions"], "'directions'");
        if (doc.contains("time_grid")) {
            const json& tg = doc["time_grid"];
            check_keys(tg, {"t_min", "t_split", "t_max", "n_geometric", "n_linear"},
                       "'time_grid'");
            cfg.time_grid.t_min = optional_number(tg, "t_min", cfg.time_grid.t_min);
            cfg.time_grid.t_split = optional_number(tg, "t_split", cfg.time_grid.t_split);
            cfg.time_grid.t_max = optional_number(tg, "t_max", cfg.time_grid.t_max);
            if (tg.contains("n_geometric"))
                cfg.time_grid.n_geometric = tg["n_geometric"].get<int>();
            if (tg.contains("n_linear"))
                cfg.time_grid.n_linear = tg["n_linear"].get<int>();
        }
    } else if (subcommand == "spectral-scan") {
        if (!doc.contains("detunings"))
            throw ConfigError("config: spectral-scan requires 'detunings'");
        const json& det = doc["detunings"];
        check_keys(det, {"values", "min", "max", "n"}, "'detunings'");
        if (det.contains("values")) {
            cfg.detunings = number_list(det["values"], "'detunings.values'");
        } else {
            const double lo = require_number(det, "min", "'detunings'");
            const double hi = require_number(det, "max", "'detunings'");
            const int n = det.contains("n") ? det["n"].get<int>() : 9;
            if (n < 2 || !(hi > lo))
                throw ConfigError("config: detunings range needs n >= 2 and max > min");
            for (int k = 0; k < n; ++k)
                cfg.detunings.push_back(lo + (hi - lo) * k / (n - 1));
        }
        if (!doc.contains("windows"))
            throw ConfigError("config: spectral-scan requires 'windows'");
        cfg.windows = parse_windows(doc["windows"]);
        if (doc.contains("directions"))
            cfg.directions = number_list(doc["directions"], "'directions'");
        else
            cfg.directions = {pi / 2.0};
    } else if (subcommand == "randomwalk") {
        if (!doc.contains("theta"))
            throw ConfigError("config: randomwalk requires 'theta'");
        cfg.thetas = parse_theta(doc["theta"], cfg.geometry.transverse_radius);
        if (doc.contains("ensemble_result"))
            cfg.ensemble_result = doc["ensemble_result"].get<std::string>();
        if (doc.contains("guard_factor")) {
            cfg.guard_factor = doc["guard_factor"].get<double>();
            if (!(cfg.guard_factor >= 0.0))
                throw ConfigError("config: 'guard_factor' must be >= 0");
        }
        if (doc.contains("windows"))
            cfg.windows = parse_windows(doc["windows"]);
    }

    return cfg;
}

RunConfig load_run_config(const std::string& path, const std::string& subcommand) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), subcommand);
}

EnsembleSpec RunConfig::to_ensemble_spec(const std::vector<double>& run_thetas,
                                         const std::vector<double>& times) const {
    EnsembleSpec spec;
    spec.geometry = geometry;
    spec.n_atoms = n_atoms;
    spec.n_configs = n_configs;
    spec.master_seed = master_seed;
    spec.pulse = pulse;
    spec.drive = drive;
    spec.thetas = run_thetas;
    spec.phi = phi;
    spec.polarizations = channels;
    spec.times = times;
    spec.keep_per_config = keep_per_config;
    return spec;
}

std::string serialize_config(const RunConfig& cfg) {
    json doc;
    json geom;
    geom["n0"] = cfg.geometry.peak_density;
    geom["R"] = cfg.geometry.transverse_radius;
    geom["L"] = cfg.geometry.longitudinal_radius;
    if (cfg.geometry.exclusion_radius)
        geom["exclusion_radius"] = *cfg.geometry.exclusion_radius;
    doc["geometry"] = geom;
    if (cfg.n_atoms >= 0)
        doc["n_atoms"] = cfg.n_atoms;
    doc["master_seed"] = cfg.master_seed;

    const bool has_pulse = cfg.subcommand == "angular-scan" ||
                           cfg.subcommand == "time-scan" ||
                           cfg.subcommand == "spectral-scan";
    if (has_pulse) {
        doc["n_configs"] = cfg.n_configs;
        doc["pulse"] = {{"duration", cfg.pulse.duration}, {"detuning", cfg.pulse.detuning}};
        json drive;
        if (cfg.drive.type == Drive::Type::incoherent) {
            drive["type"] = "incoherent";
        } else {
            drive["type"] = "coherent";
            drive["direction"] = {cfg.drive.direction.x(), cfg.drive.direction.y(),
                                  cfg.drive.direction.z()};
            drive["polarization"] = cfg.drive_polarization_name;
        }
        doc["drive"] = drive;
        json channels = json::array();
        for (auto pol : cfg.channels)
            channels.push_back(polarization_name(pol));
        doc["channels"] = channels;
        doc["phi"] = cfg.phi;
        if (cfg.keep_per_config)
            doc["keep_per_config"] = true;
    }

    if (cfg.subcommand == "angular-scan" || cfg.subcommand == "randomwalk")
        doc["theta"] = {{"values", cfg.thetas}};
    if (!cfg.snapshot_times.empty())
        doc["snapshot_times"] = cfg.snapshot_times;
    if (!cfg.windows.empty()) {
        json windows = json::array();
        for (const auto& w : cfg.windows)
            windows.push_back({w.first, w.second});
        doc["windows"] = windows;
    }
    if (cfg.subcommand == "time-scan" || cfg.subcommand == "spectral-scan")
        if (!cfg.directions.empty())
            doc["directions"] = cfg.directions;
    if (cfg.subcommand == "time-scan") {
        doc["time_grid"] = {{"t_min", cfg.time_grid.t_min},
                            {"t_split", cfg.time_grid.t_split},
                            {"t_max", cfg.time_grid.t_max},
                            {"n_geometric", cfg.time_grid.n_geometric},
                            {"n_linear", cfg.time_grid.n_linear}};
    }
    if (cfg.subcommand == "spectral-scan")
        doc["detunings"] = {{"values", cfg.detunings}};
    if (cfg.subcommand == "randomwalk") {
        if (!cfg.ensemble_result.empty())
            doc["ensemble_result"] = cfg.ensemble_result;
        doc["guard_factor"] = cfg.guard_factor;
    }
    return doc.dump();
}

}
