#pragma once

#include "srsim/cloud.hpp"
#include "srsim/excitation.hpp"

#include <Eigen/Dense>

#include <string>

namespace srsim {

/// Single-scattering random-walk description of the Gaussian cloud. The
/// resonant cross-section is 6 pi (reduced wavelengths squared) for the
/// J=0 -> J=1 transition; b0z is the maximal resonant thickness along z.
struct RandomWalkModel {
    CloudGeometry geometry;

    static constexpr double sigma0 = 6.0 * 3.14159265358979323846;

    /// b0z = sqrt(2 pi) * sigma0 * n0 * L
    double b0z() const;
};

/// Resonant optical depth accumulated along the half-line
/// {point + s * direction, s >= 0}: 6 pi * integral of n. Closed form via the
/// Gaussian line integral (shifted 1-D Gaussian, error-function expression).
double optical_depth_ray(const RandomWalkModel& model, const Eigen::Vector3d& point,
                         const Eigen::Vector3d& direction);

/// Density-weighted mean of [depth from the source at z = -infinity to the
/// scattering point] + [depth from the point to the detector at angle theta]:
///   b0z/4 * (1 + sqrt(2) R / sqrt(R^2 + L^2 + (R^2 - L^2) cos 2 theta)).
double mean_total_depth(const RandomWalkModel& model, double theta);

/// Early-time sideward decay rate, gamma * (1 + mean_total_depth / 2).
/// Not claimed valid inside the coherent forward/backward zones.
double decay_rate_analytic(const RandomWalkModel& model, double theta);

/// Early-time forward decay rate, gamma * (1 + b0z / 8).
double decay_rate_forward(const RandomWalkModel& model);

/// Width guard for the coherent zones around theta = 0 and pi: the main
/// diffraction lobe half-width is ~ 1/R in these units; the guard warns
/// within `factor` lobe widths of either pole.
bool in_coherent_zone(const RandomWalkModel& model, double theta, double factor = 3.0);

struct SingleScatterOptions {
    int hermite_order = 40;      ///< Gauss-Hermite nodes per axis
    int max_series_terms = 160;  ///< residue-series cap
    double series_tolerance = 1e-14;
};

/// Time-resolved single-scattering intensity at angle theta: cloud integral
/// of the squared residue amplitude of the attenuated in/out propagation
/// around the atomic pole. Arbitrary units; the t -> 0 log-slope reproduces
/// decay_rate_analytic. Valid after the pulse end (t > 0) and for moderate
/// optical depth: a warning string is emitted outside
/// b0 * tau0/tau_L <~ 1 (short pulses) or b0 * tau0 * detuning <~ 1 (long
/// detuned pulses).
double single_scatter_intensity(const RandomWalkModel& model, const Pulse& pulse,
                                double theta, double t,
                                const SingleScatterOptions& options = {},
                                std::string* warning = nullptr);

}
