#pragma once

#include "srsim/cloud.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace srsim {

/// Temporally rectangular pulse occupying t in [-duration, 0], so every
/// reported time t >= 0 is after the pulse end. duration is in units of the
/// free-atom lifetime, detuning = carrier frequency minus atomic resonance
/// in units of gamma.
struct Pulse {
    double duration = 0.1;
    double detuning = 0.0;

    void validate() const;
};

/// Fourier amplitude of the rectangular pulse at (complex) frequency offset
/// omega from resonance:
///   E(omega) = (1 - exp(-i (omega - detuning) * duration)) / (i (omega - detuning))
/// with the removable singularity at omega = detuning evaluated as duration.
/// Entire in omega; amplitude normalization is unity.
std::complex<double> pulse_spectrum(const Pulse& pulse, std::complex<double> omega);

/// Drive vector on the 3N Cartesian excited-state basis.
struct ExcitationVector {
    enum class Kind { coherent, incoherent_member };

    Eigen::VectorXcd amplitudes;
    Kind kind = Kind::coherent;
    int member_atom = -1; ///< incoherent members only
    int member_axis = -1; ///< incoherent members only (0=x, 1=y, 2=z)
};

/// Helicity basis vector (e_theta + handedness * i e_phi)/sqrt(2) for the
/// propagation direction with polar angle theta, azimuth phi.
/// handedness +1 reproduces (x + i y)/sqrt(2) for propagation along +z,
/// the convention used for the default circular drive.
Eigen::Vector3cd circular_polarization(double theta, double phi, int handedness);

/// Plane-wave drive: amplitude(j, mu) = u_mu exp(i k_dir . r_j).
/// k_dir must be unit length and the polarization transverse and normalized.
ExcitationVector coherent_excitation(const AtomConfiguration& config,
                                     const Eigen::Vector3d& k_dir,
                                     const Eigen::Vector3cd& polarization);

/// Independent per-atom excitation: 3N basis members, one per (atom,
/// Cartesian orientation), each a single unit component. Downstream code sums
/// intensities (never amplitudes) over members; this is the phase-averaged
/// limit of random per-atom phases and isotropic drive orientations.
std::vector<ExcitationVector> incoherent_excitation_set(const AtomConfiguration& config);

/// Drive descriptor used by the ensemble pipeline.
struct Drive {
    enum class Type { coherent, incoherent };
    Type type = Type::coherent;
    Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
    Eigen::Vector3cd polarization = circular_polarization(0.0, 0.0, +1);

    static Drive default_coherent();
    static Drive incoherent();
};

}
