#include "srsim/randomwalk.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace srsim {

namespace {
constexpr double pi = 3.14159265358979323846;
using complexd = std::complex<double>;

/// Physicists' Gauss-Hermite rule (weight e^{-x^2}) via the Golub-Welsch
/// symmetric tridiagonal eigenproblem.
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

HermiteRule hermite_rule(int order) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double off = std::sqrt(0.5 * k);
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    HermiteRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double total = std::sqrt(pi);
    for (int k = 0; k < order; ++k) {
        rule.nodes[k] = solver.eigenvalues()(k);
        const double v0 = solver.eigenvectors()(0, k);
        rule.weights[k] = total * v0 * v0;
    }
    return rule;
}

/// Attenuated single-scattering amplitude for total accumulated depth b at
/// time t after the pulse end. Time-domain convolution of the rectangular
/// pulse with the propagation kernel -i e^{-s/2} J0(sqrt(b s)); numerically
/// stable for every pulse length and detuning.
complexd scatter_amplitude(double b, double t, const Pulse& pulse) {
    const complexd i_unit(0.0, 1.0);
    const complexd rate = complexd(-0.5, pulse.detuning); // exponent coefficient
    // e^{-s/2} truncates the memory integral
    const double span = std::min(pulse.duration, 80.0);
    if (span <= 0.0)
        return complexd(0.0);

    // 12-point Gauss-Legendre panels; integrand is analytic and the phase
    // sqrt(b s) advances slowly, so ~unit panels converge spectrally
    static const double gl_x[6] = {0.1252334085114689, 0.3678314989981802,
                                   0.5873179542866175, 0.7699026741943047,
                                   0.9041172563704749, 0.9815606342467192};
    static const double gl_w[6] = {0.2491470458134028, 0.2334925365383548,
                                   0.2031674267230659, 0.1600783285433462,
                                   0.1069393259953184, 0.0471753363865118};

    const int n_panels = std::max(8, static_cast<int>(std::ceil(span)));
    const double h = span / n_panels;
    complexd sum(0.0);
    for (int p = 0; p < n_panels; ++p) {
        const double a = t + p * h;
        const double mid = a + 0.5 * h;
        const double half = 0.5 * h;
        for (int q = 0; q < 6; ++q) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const double s = mid + sign * half * gl_x[q];
                const complexd f = std::exp(rate * s) * std::cyl_bessel_j(0.0, std::sqrt(b * s));
                sum += gl_w[q] * half * f;
            }
        }
    }
    return -i_unit * std::exp(-i_unit * pulse.detuning * t) * sum;
}

} // namespace

double RandomWalkModel::b0z() const {
    geometry.validate();
    return std::sqrt(2.0 * pi) * sigma0 * geometry.peak_density *
           geometry.longitudinal_radius;
}

double optical_depth_ray(const RandomWalkModel& model, const Eigen::Vector3d& point,
                         const Eigen::Vector3d& direction) {
    if (std::abs(direction.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("optical_depth_ray: direction must be a unit vector");
    const double r2 = model.geometry.transverse_radius * model.geometry.transverse_radius;
    const double l2 = model.geometry.longitudinal_radius * model.geometry.longitudinal_radius;

    // n(point + s d) = n0 exp(-(a s^2 + b s + c)); the half-line integral is a
    // shifted 1-D Gaussian handled by erfc. Cauchy-Schwarz gives
    // b^2/(4a) <= c, so the exponential never overflows.
    const double a = direction.z() * direction.z() / (2.0 * l2) +
                     (direction.x() * direction.x() + direction.y() * direction.y()) / (2.0 * r2);
    const double b = point.z() * direction.z() / l2 +
                     (point.x() * direction.x() + point.y() * direction.y()) / r2;
    const double c = point.z() * point.z() / (2.0 * l2) +
                     (point.x() * point.x() + point.y() * point.y()) / (2.0 * r2);

    const double sqrt_a = std::sqrt(a);
    const double integral = std::exp(b * b / (4.0 * a) - c) *
                            (std::sqrt(pi) / (2.0 * sqrt_a)) *
                            std::erfc(b / (2.0 * sqrt_a));
    return RandomWalkModel::sigma0 * model.geometry.peak_density * integral;
}

double mean_total_depth(const RandomWalkModel& model, double theta) {
    const double r2 = model.geometry.transverse_radius * model.geometry.transverse_radius;
    const double l2 = model.geometry.longitudinal_radius * model.geometry.longitudinal_radius;
    const double ratio = std::sqrt(2.0) * model.geometry.transverse_radius /
                         std::sqrt(r2 + l2 + (r2 - l2) * std::cos(2.0 * theta));
    return 0.25 * model.b0z() * (1.0 + ratio);
}

double decay_rate_analytic(const RandomWalkModel& model, double theta) {
    return 1.0 + 0.5 * mean_total_depth(model, theta);
}

double decay_rate_forward(const RandomWalkModel& model) {
    return 1.0 + model.b0z() / 8.0;
}

bool in_coherent_zone(const RandomWalkModel& model, double theta, double factor) {
    const double lobe = 1.0 / model.geometry.transverse_radius;
    return theta < factor * lobe || theta > pi - factor * lobe;
}

double single_scatter_intensity(const RandomWalkModel& model, const Pulse& pulse,
                                double theta, double t,
                                const SingleScatterOptions& options,
                                std::string* warning) {
    model.geometry.validate();
    pulse.validate();
    if (!(t > 0.0))
        throw std::domain_error("single_scatter_intensity: requires t > 0 (after pulse end)");

    if (warning) {
        warning->clear();
        const double depth = mean_total_depth(model, theta);
        const bool broadband_ok = depth * std::min(pulse.duration, 1.0) <= 1.0;
        const bool detuned_ok =
            depth / (1.0 + 4.0 * pulse.detuning * pulse.detuning) <= 1.0;
        if (!broadband_ok && !detuned_ok)
            *warning = "single-scattering validity guard: average optical depth too "
                       "large for this pulse (quasi-resonant, not broadband); decay "
                       "rates will be contaminated by higher scattering orders";
    }

    const HermiteRule rule = hermite_rule(options.hermite_order);
    const double sr = std::sqrt(2.0) * model.geometry.transverse_radius;
    const double sl = std::sqrt(2.0) * model.geometry.longitudinal_radius;
    const Eigen::Vector3d into_source(0.0, 0.0, -1.0);
    const Eigen::Vector3d toward_detector(std::sin(theta), 0.0, std::cos(theta));

    double integral = 0.0;
    double max_term = 0.0;
    for (int ix = 0; ix < options.hermite_order; ++ix)
        for (int iy = 0; iy < options.hermite_order; ++iy)
            for (int iz = 0; iz < options.hermite_order; ++iz) {
                const Eigen::Vector3d r(sr * rule.nodes[ix], sr * rule.nodes[iy],
                                        sl * rule.nodes[iz]);
                const double depth = optical_depth_ray(model, r, into_source) +
                                     optical_depth_ray(model, r, toward_detector);
                const complexd amp = scatter_amplitude(depth, t, pulse);
                const double w = rule.weights[ix] * rule.weights[iy] * rule.weights[iz];
                const double term = w * std::norm(amp);
                integral += term;
                max_term = std::max(max_term, std::abs(term));
            }

    if (!std::isfinite(integral) || integral < 0.0 ||
        (integral > 0.0 && max_term > 0.5 * integral))
        throw std::runtime_error(
            "single_scatter_intensity: cloud quadrature failed to converge "
            "(a single node dominates the integral); increase hermite_order");

    // dipole pattern of the polarization-summed single-scattered light
    const double pattern = 0.5 * (1.0 + std::cos(theta) * std::cos(theta));
    const double volume = model.geometry.peak_density * sr * sr * sl;
    return volume * pattern * integral;
}

}
