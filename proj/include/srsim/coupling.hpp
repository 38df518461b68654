#pragma once

#include "srsim/cloud.hpp"

#include <Eigen/Dense>

#include <complex>

namespace srsim {

/// Non-Hermitian effective Hamiltonian of the single-excitation sector, in
/// units of the free-atom linewidth gamma and with frequencies measured from
/// the atomic resonance. Basis is atom-major Cartesian: atom j occupies rows
/// and columns 3j..3j+2 for dipole components x, y, z.
///
/// Invariants: complex symmetric (M = M^T), every diagonal entry exactly
/// -i/2, trace exactly -i * 3N/2.
struct EffectiveHamiltonian {
    Eigen::MatrixXcd matrix;
    int n_atoms = 0;
};

/// 3x3 excitation-exchange block between two atoms separated by `separation`
/// (reduced wavelengths; the resonant wave number is 1 in these units):
///
///   G_{mu nu} = (3/4) e^{i r} / r^3 *
///       { delta_{mu nu} (1 - i r - r^2) - (r_mu r_nu / r^2)(3 - 3 i r - r^2) }
///
/// The prefactor 3/4 fixes the reduced dipole so the single-atom width is
/// gamma (equivalently, resonant cross-section 6 pi in these units).
/// Throws std::invalid_argument for coincident atoms.
Eigen::Matrix3cd pair_kernel(const Eigen::Vector3d& separation);

/// Assemble the full 3N x 3N matrix: pair_kernel off-diagonal blocks,
/// -i/2 * Identity diagonal blocks. Verifies the symmetry invariant.
EffectiveHamiltonian build_hamiltonian(const AtomConfiguration& config);

}
