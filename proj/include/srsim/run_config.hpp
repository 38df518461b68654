#pragma once

#include "srsim/cloud.hpp"
#include "srsim/ensemble.hpp"
#include "srsim/excitation.hpp"
#include "srsim/fluorescence.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace srsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TimeGridConfig {
    double t_min = 1e-3;
    double t_split = 0.1;
    double t_max = 5.0;
    int n_geometric = 24;
    int n_linear = 24;
};

/// Parsed and validated run description. One JSON document per run; unknown
/// keys are rejected, defaults are resolved at parse time so the serialized
/// form is canonical (parse -> serialize -> parse is the identity).
struct RunConfig {
    std::string subcommand;

    CloudGeometry geometry;
    long long n_atoms = -1; ///< -1: use expected_atom_number
    int n_configs = 1;
    std::uint64_t master_seed = 1;

    Pulse pulse;
    Drive drive;
    std::string drive_polarization_name = "left-circular";

    std::vector<Polarization> channels{Polarization::total};
    std::vector<double> thetas;
    double phi = 0.0;

    std::vector<double> snapshot_times;
    std::vector<std::pair<double, double>> windows;

    std::vector<double> directions; ///< time-scan polar angles
    TimeGridConfig time_grid;

    std::vector<double> detunings; ///< spectral-scan carrier offsets

    std::string ensemble_result; ///< randomwalk overlay input (optional)
    double guard_factor = 3.0;

    bool keep_per_config = false;

    EnsembleSpec to_ensemble_spec(const std::vector<double>& thetas,
                                  const std::vector<double>& times) const;
};

/// Parse a JSON document for the given subcommand. Throws ConfigError on
/// syntax errors, unknown keys, missing required keys, or invalid values.
RunConfig parse_run_config(const std::string& json_text, const std::string& subcommand);

RunConfig load_run_config(const std::string& path, const std::string& subcommand);

/// Canonical single-line JSON of the resolved configuration.
std::string serialize_config(const RunConfig& config);

/// Default angular grid for scans: densified near theta = 0 and pi where the
/// diffraction lobe and backscattering features live. lobe scale ~ 1/R.
std::vector<double> make_theta_grid(int n_points, double transverse_radius,
                                    bool densify_poles);

std::string polarization_name(Polarization pol);
Polarization polarization_from_name(const std::string& name);

}
