#include "srsim/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace srsim {

using complexd = std::complex<double>;

Eigen::Matrix3cd pair_kernel(const Eigen::Vector3d& separation) {
    const double r = separation.norm();
    if (!(r > 0.0))
        throw std::invalid_argument("pair_kernel: coincident atoms");

    const complexd i_unit(0.0, 1.0);
    const double r2 = r * r;
    const complexd phase = std::exp(i_unit * r);
    const complexd scalar_part = 1.0 - i_unit * r - r2;        // multiplies delta
    const complexd projector_part = 3.0 - 3.0 * i_unit * r - r2; // multiplies rr^T/r^2
    const complexd prefactor = 0.75 * phase / (r2 * r);

    const Eigen::Vector3d n = separation / r;
    Eigen::Matrix3cd block;
    for (int mu = 0; mu < 3; ++mu)
        for (int nu = 0; nu < 3; ++nu) {
            const double delta = (mu == nu) ? 1.0 : 0.0;
            block(mu, nu) =
                prefactor * (delta * scalar_part - n(mu) * n(nu) * projector_part);
        }
    return block;
}

EffectiveHamiltonian build_hamiltonian(const AtomConfiguration& config) {
    const int n = config.n_atoms();
    EffectiveHamiltonian h;
    h.n_atoms = n;
    h.matrix = Eigen::MatrixXcd::Zero(3 * n, 3 * n);

    const complexd diag(0.0, -0.5);
    for (int j = 0; j < n; ++j)
        for (int mu = 0; mu < 3; ++mu)
            h.matrix(3 * j + mu, 3 * j + mu) = diag;

    for (int j = 0; j < n; ++j) {
        for (int l = j + 1; l < n; ++l) {
            const Eigen::Vector3d sep = config.positions.col(j) - config.positions.col(l);
            const Eigen::Matrix3cd block = pair_kernel(sep);
            h.matrix.block<3, 3>(3 * j, 3 * l) = block;
            // kernel is even in the separation, so the transpose block is equal
            h.matrix.block<3, 3>(3 * l, 3 * j) = block;
        }
    }

    // symmetry invariant, relative 1e-12
    const double scale = h.matrix.cwiseAbs().maxCoeff();
    const double defect = (h.matrix - h.matrix.transpose()).cwiseAbs().maxCoeff();
    if (defect > 1e-12 * scale)
        throw std::runtime_error("build_hamiltonian: symmetry invariant violated");

    return h;
}

}
