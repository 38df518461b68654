#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace srsim {

/// Axially symmetric Gaussian cloud,
///   n(r) = n0 exp(-z^2 / 2L^2 - (x^2 + y^2) / 2R^2).
/// All lengths are in units of the reduced wavelength.
struct CloudGeometry {
    double peak_density = 0.0;        ///< n0, atoms per cubic reduced wavelength
    double transverse_radius = 0.0;   ///< R
    double longitudinal_radius = 0.0; ///< L
    /// Optional minimum pair separation enforced by rejection sampling.
    std::optional<double> exclusion_radius;

    /// Throws std::invalid_argument on nonpositive sizes/density or an
    /// exclusion radius too large for rejection sampling to terminate
    /// (hard cap: exclusion_radius^3 * n0 <= 0.1).
    void validate() const;
};

/// One sampled set of atom positions together with the seed that produced it.
struct AtomConfiguration {
    Eigen::Matrix3Xd positions; ///< column j = position of atom j (reduced wavelengths)
    std::uint64_t seed = 0;

    int n_atoms() const { return static_cast<int>(positions.cols()); }
};

/// Mean atom number of the cloud: round(n0 (2*pi)^{3/2} R^2 L).
long long expected_atom_number(const CloudGeometry& geometry);

/// Draw n_atoms i.i.d. positions with x,y ~ N(0, R^2), z ~ N(0, L^2).
/// Deterministic in (geometry, n_atoms, seed). When an exclusion radius is
/// set, draws violating the minimum pair distance are redrawn; a rejection
/// cap turns a hopeless geometry into a std::runtime_error.
AtomConfiguration sample_cloud(const CloudGeometry& geometry, int n_atoms,
                               std::uint64_t seed);

/// Plain-text export, one atom per row "x y z", full double precision, so a
/// configuration can be replayed across solver versions.
void save_cloud(const AtomConfiguration& config, const std::string& path);
AtomConfiguration load_cloud(const std::string& path);

}
