#include "srsim/fluorescence.hpp"

#include <cmath>
#include <stdexcept>

namespace srsim {

using complexd = std::complex<double>;

namespace {
const complexd i_unit(0.0, 1.0);

/// exp(-i lambda t) with underflow clamped to zero for strongly decaying
/// modes at late times.
complexd decay_phase(complexd lambda, double t) {
    const complexd arg = -i_unit * lambda * t;
    return (arg.real() < -700.0) ? complexd(0.0) : std::exp(arg);
}
} // namespace

void DetectionChannel::validate() const {
    if (!(theta >= 0.0 && theta <= 3.14159265358979323846 + 1e-12))
        throw std::invalid_argument("detection channel: theta must lie in [0, pi]");
    if (!std::isfinite(phi))
        throw std::invalid_argument("detection channel: phi must be finite");
}

Eigen::Vector3cd channel_polarization(double theta, double phi, Polarization pol) {
    switch (pol) {
    case Polarization::helicity_preserving:
        return circular_polarization(theta, phi, +1);
    case Polarization::helicity_nonpreserving:
        return circular_polarization(theta, phi, -1);
    default:
        throw std::invalid_argument(
            "channel_polarization: 'total' has no analyzer vector; sum the two "
            "helicity channels");
    }
}

Eigen::RowVectorXcd detection_vector(const AtomConfiguration& config,
                                     const DetectionChannel& channel) {
    channel.validate();
    const Eigen::Vector3cd analyzer =
        channel_polarization(channel.theta, channel.phi, channel.polarization);
    const Eigen::Vector3d k_out(std::sin(channel.theta) * std::cos(channel.phi),
                                std::sin(channel.theta) * std::sin(channel.phi),
                                std::cos(channel.theta));

    const int n = config.n_atoms();
    Eigen::RowVectorXcd d(3 * n);
    for (int j = 0; j < n; ++j) {
        const complexd phase = std::exp(-i_unit * k_out.dot(config.positions.col(j)));
        for (int mu = 0; mu < 3; ++mu)
            d(3 * j + mu) = std::conj(analyzer(mu)) * phase;
    }
    return d;
}

Eigen::VectorXcd mode_coefficients(const SpectralDecomposition& decomp,
                                   const ExcitationVector& drive,
                                   const Eigen::RowVectorXcd& detection) {
    const Eigen::RowVectorXcd dv = detection * decomp.modes;
    const Eigen::VectorXcd vl = decomp.modes.transpose() * drive.amplitudes;
    return dv.transpose().cwiseProduct(vl);
}

Eigen::VectorXcd amplitude_timeseries(const Eigen::VectorXcd& coefficients,
                                      const Eigen::VectorXcd& eigenvalues,
                                      const Pulse& pulse,
                                      const std::vector<double>& times) {
    pulse.validate();
    if (coefficients.size() != eigenvalues.size())
        throw std::invalid_argument("amplitude_timeseries: size mismatch");
    for (double t : times)
        if (t < 0.0)
            throw std::domain_error(
                "amplitude_timeseries: negative time (during-pulse dynamics out of scope)");

    const Eigen::Index n_modes = eigenvalues.size();
    Eigen::VectorXcd weighted(n_modes);
    for (Eigen::Index n = 0; n < n_modes; ++n)
        weighted(n) = coefficients(n) * pulse_spectrum(pulse, eigenvalues(n));

    Eigen::VectorXcd amplitude(static_cast<Eigen::Index>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
        complexd sum(0.0);
        for (Eigen::Index n = 0; n < n_modes; ++n)
            sum += weighted(n) * decay_phase(eigenvalues(n), times[k]);
        amplitude(static_cast<Eigen::Index>(k)) = -i_unit * sum;
    }
    return amplitude;
}

namespace {

std::vector<double> definite_channel_intensity(const AtomConfiguration& config,
                                               const SpectralDecomposition& decomp,
                                               const Pulse& pulse, const Drive& drive,
                                               const DetectionChannel& channel,
                                               const std::vector<double>& times) {
    const Eigen::RowVectorXcd d = detection_vector(config, channel);
    const Eigen::RowVectorXcd dv = d * decomp.modes;
    const Eigen::Index n_modes = decomp.eigenvalues.size();

    Eigen::VectorXcd spectrum(n_modes);
    for (Eigen::Index n = 0; n < n_modes; ++n)
        spectrum(n) = pulse_spectrum(pulse, decomp.eigenvalues(n));

    std::vector<double> intensity(times.size(), 0.0);
    if (drive.type == Drive::Type::coherent) {
        const ExcitationVector ex =
            coherent_excitation(config, drive.direction, drive.polarization);
        const Eigen::VectorXcd vl = decomp.modes.transpose() * ex.amplitudes;
        for (std::size_t k = 0; k < times.size(); ++k) {
            complexd sum(0.0);
            for (Eigen::Index n = 0; n < n_modes; ++n)
                sum += dv(n) * vl(n) * spectrum(n) * decay_phase(decomp.eigenvalues(n), times[k]);
            intensity[k] = std::norm(sum);
        }
    } else {
        // Incoherent sum over all (atom, orientation) members. Member m has
        // coefficients c_n = dv_n V_{m n}, so the vector of member amplitudes
        // at time t is V * w(t) with w_n = dv_n E(lambda_n) exp(-i lambda_n t);
        // the summed intensity is its squared norm.
        Eigen::VectorXcd w(n_modes);
        for (std::size_t k = 0; k < times.size(); ++k) {
            for (Eigen::Index n = 0; n < n_modes; ++n)
                w(n) = dv(n) * spectrum(n) * decay_phase(decomp.eigenvalues(n), times[k]);
            intensity[k] = (decomp.modes * w).squaredNorm();
        }
    }
    return intensity;
}

} // namespace

std::vector<double> intensity_timeseries(const AtomConfiguration& config,
                                         const SpectralDecomposition& decomp,
                                         const Pulse& pulse, const Drive& drive,
                                         const DetectionChannel& channel,
                                         const std::vector<double>& times) {
    pulse.validate();
    channel.validate();
    for (double t : times)
        if (t < 0.0)
            throw std::domain_error("intensity_timeseries: negative time");

    if (channel.polarization == Polarization::total) {
        DetectionChannel par = channel;
        par.polarization = Polarization::helicity_preserving;
        DetectionChannel perp = channel;
        perp.polarization = Polarization::helicity_nonpreserving;
        std::vector<double> a =
            definite_channel_intensity(config, decomp, pulse, drive, par, times);
        const std::vector<double> b =
            definite_channel_intensity(config, decomp, pulse, drive, perp, times);
        for (std::size_t k = 0; k < a.size(); ++k)
            a[k] += b[k];
        return a;
    }
    return definite_channel_intensity(config, decomp, pulse, drive, channel, times);
}

double decay_rate_from_means(double intensity_t1, double intensity_t2, double t1,
                             double t2) {
    if (!(t2 > t1) || t1 < 0.0)
        throw std::domain_error("decay_rate: window must satisfy t2 > t1 >= 0");
    if (!(intensity_t1 > 0.0) || !(intensity_t2 > 0.0))
        throw std::domain_error("decay_rate: nonpositive intensity at a window endpoint");
    return std::log(intensity_t1 / intensity_t2) / (t2 - t1);
}

DecayRate decay_rate(const FluorescenceSeries& series, double t1, double t2) {
    auto locate = [&](double t) -> std::size_t {
        for (std::size_t k = 0; k < series.times.size(); ++k)
            if (std::abs(series.times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t)))
                return k;
        throw std::domain_error("decay_rate: window endpoint not on the time grid");
    };
    const std::size_t k1 = locate(t1);
    const std::size_t k2 = locate(t2);

    DecayRate rate;
    rate.gamma = decay_rate_from_means(series.mean_intensity[k1],
                                       series.mean_intensity[k2], t1, t2);
    const double rel1 = series.stderr_intensity[k1] / series.mean_intensity[k1];
    const double rel2 = series.stderr_intensity[k2] / series.mean_intensity[k2];
    rate.reliable = (rel1 <= 0.5 && rel2 <= 0.5);
    return rate;
}

}
