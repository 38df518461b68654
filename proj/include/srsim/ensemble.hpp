#pragma once

#include "srsim/cloud.hpp"
#include "srsim/excitation.hpp"
#include "srsim/fluorescence.hpp"
#include "srsim/randomwalk.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace srsim {

/// Hybrid time grid: 0, then geometric points from t_min to t_split, then
/// linear points up to t_max. Dense near t = 0 where superradiance lives.
std::vector<double> make_time_grid(double t_min, double t_split, double t_max,
                                   int n_geometric, int n_linear);

/// Full run descriptor. Observables are the outer product
/// thetas x polarizations x times at a common azimuth.
struct EnsembleSpec {
    CloudGeometry geometry;
    long long n_atoms = -1; ///< -1 = expected_atom_number(geometry)
    int n_configs = 1;
    std::uint64_t master_seed = 1;
    Pulse pulse;
    Drive drive;
    std::vector<double> thetas;
    double phi = 0.0;
    std::vector<Polarization> polarizations;
    std::vector<double> times;
    bool keep_per_config = false;

    long long resolved_n_atoms() const;
    void validate() const;
};

struct EnsembleResult {
    EnsembleSpec spec;

    /// mean[obs_index(theta, pol, time)], same layout for stderr.
    std::vector<double> mean;
    std::vector<double> stderr_;
    /// covariance of mean intensities between time pairs, per (theta, pol):
    /// cov[(theta, pol)][t_a * n_times + t_b]
    std::vector<std::vector<double>> covariance;

    std::vector<std::uint64_t> rejected_seeds;
    int n_configs = 0;
    int n_rejected = 0;
    bool rejection_flagged = false; ///< n_rejected/n_configs >= 5%

    std::string code_version;
    double wall_seconds = 0.0;

    /// populated only when spec.keep_per_config:
    /// per_config[config][obs_index]
    std::optional<std::vector<std::vector<double>>> per_config;

    std::size_t obs_index(std::size_t theta_idx, std::size_t pol_idx,
                          std::size_t time_idx) const;
    FluorescenceSeries series(std::size_t theta_idx, std::size_t pol_idx) const;

    /// Windowed decay rate from mean intensities at two grid times, with the
    /// delta-method standard error from the endpoint covariance.
    struct WindowRate {
        double gamma = 0.0;
        double gamma_stderr = 0.0;
        bool reliable = true;
    };
    WindowRate window_rate(std::size_t theta_idx, std::size_t pol_idx, double t1,
                           double t2) const;
};

/// Run the full pipeline: per-configuration seeds derived from the master
/// seed, sample -> build -> decompose -> time series, accumulated in strict
/// configuration-index order so the result is bit-identical for any worker
/// count. Rejected (numerically defective) configurations are logged by seed.
/// Throws std::runtime_error if every configuration is rejected.
EnsembleResult run_ensemble(const EnsembleSpec& spec, int workers = 1);

/// Angular decay-rate curve from an ensemble result over a (t1, t2) window.
DecayRateCurve angular_rate_curve(const EnsembleResult& result, std::size_t pol_idx,
                                  double t1, double t2);

/// Side-by-side comparison with the analytic single-scattering rate.
struct OverlayRow {
    double theta = 0.0;
    double gamma_microscopic = 0.0;
    double gamma_analytic = 0.0;
    double relative_deviation = 0.0;
    bool in_coherent_zone = false;
};

struct OverlayTable {
    std::vector<OverlayRow> rows;
    double max_sideward_deviation = 0.0; ///< over rows outside coherent zones
    double window_t1 = 0.0, window_t2 = 0.0;
};

/// Throws std::invalid_argument on geometry mismatch or when every angle of
/// the result lies inside the coherent zones.
OverlayTable compare_to_randomwalk(const EnsembleResult& result,
                                   const RandomWalkModel& model, double t1, double t2,
                                   std::size_t pol_idx = 0, double guard_factor = 3.0);

}
