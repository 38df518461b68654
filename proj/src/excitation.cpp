#include "srsim/excitation.hpp"

#include <cmath>
#include <stdexcept>

namespace srsim {

using complexd = std::complex<double>;

void Pulse::validate() const {
    if (!(duration > 0.0))
        throw std::invalid_argument("pulse: duration must be > 0");
    if (!std::isfinite(detuning))
        throw std::invalid_argument("pulse: detuning must be finite");
}

complexd pulse_spectrum(const Pulse& pulse, complexd omega) {
    const complexd i_unit(0.0, 1.0);
    const complexd x = (omega - pulse.detuning) * pulse.duration;
    if (std::abs(x) < 1e-4) {
        // series of (1 - e^{-ix})/(ix) = sum_m (-ix)^m / (m+1)!
        const complexd mix = -i_unit * x;
        return pulse.duration *
               (1.0 + mix * (1.0 / 2.0 + mix * (1.0 / 6.0 + mix * (1.0 / 24.0))));
    }
    // exp argument has nonpositive real part whenever Im(omega) <= 0; clamp
    // the deep-underflow case so long pulses cannot produce NaN from 0 * inf
    const complexd arg = -i_unit * x;
    const complexd decay = (arg.real() < -700.0) ? complexd(0.0) : std::exp(arg);
    return (1.0 - decay) / (i_unit * (omega - pulse.detuning));
}

Eigen::Vector3cd circular_polarization(double theta, double phi, int handedness) {
    if (handedness != 1 && handedness != -1)
        throw std::invalid_argument("circular_polarization: handedness must be +1 or -1");
    const Eigen::Vector3d e_theta(std::cos(theta) * std::cos(phi),
                                  std::cos(theta) * std::sin(phi), -std::sin(theta));
    const Eigen::Vector3d e_phi(-std::sin(phi), std::cos(phi), 0.0);
    const complexd i_unit(0.0, 1.0);
    return (e_theta.cast<complexd>() +
            static_cast<double>(handedness) * i_unit * e_phi.cast<complexd>()) /
           std::sqrt(2.0);
}

ExcitationVector coherent_excitation(const AtomConfiguration& config,
                                     const Eigen::Vector3d& k_dir,
                                     const Eigen::Vector3cd& polarization) {
    if (std::abs(k_dir.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("coherent_excitation: k_dir must be a unit vector");
    if (std::abs(polarization.squaredNorm() - 1.0) > 1e-12)
        throw std::invalid_argument("coherent_excitation: polarization must be normalized");
    if (std::abs(polarization.dot(k_dir.cast<complexd>())) > 1e-12)
        throw std::invalid_argument(
            "coherent_excitation: polarization must be transverse to k_dir");

    const int n = config.n_atoms();
    ExcitationVector ex;
    ex.kind = ExcitationVector::Kind::coherent;
    ex.amplitudes.resize(3 * n);
    const complexd i_unit(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        const complexd phase = std::exp(i_unit * k_dir.dot(config.positions.col(j)));
        for (int mu = 0; mu < 3; ++mu)
            ex.amplitudes(3 * j + mu) = polarization(mu) * phase;
    }
    return ex;
}

std::vector<ExcitationVector> incoherent_excitation_set(const AtomConfiguration& config) {
    const int n = config.n_atoms();
    if (n < 1)
        throw std::invalid_argument("incoherent_excitation_set: need at least one atom");
    std::vector<ExcitationVector> members;
    members.reserve(static_cast<std::size_t>(3 * n));
    for (int j = 0; j < n; ++j)
        for (int mu = 0; mu < 3; ++mu) {
            ExcitationVector ex;
            ex.kind = ExcitationVector::Kind::incoherent_member;
            ex.member_atom = j;
            ex.member_axis = mu;
            ex.amplitudes = Eigen::VectorXcd::Zero(3 * n);
            ex.amplitudes(3 * j + mu) = 1.0;
            members.push_back(std::move(ex));
        }
    return members;
}

Drive Drive::default_coherent() { return Drive{}; }

Drive Drive::incoherent() {
    Drive d;
    d.type = Type::incoherent;
    return d;
}

}
