#pragma once

#include "srsim/coupling.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>

namespace srsim {

struct SpectralTolerances {
    double biorthogonality = 1e-8; ///< max |V^T V - I|
    double residual = 1e-8;        ///< max_n ||(M - lambda_n) v_n|| / ||v_n||
    bool check_reconstruction = true;
};

/// Eigendecomposition of the complex-symmetric effective Hamiltonian with
/// bilinear normalization V^T V = I, so the resolvent is
/// V diag(1/(omega - lambda)) V^T. Eigenvalues are in units of gamma:
/// Re = collective shift from resonance, -2 Im = collective decay rate.
/// Sorted most superradiant first (decay rate descending), ties by Re.
struct SpectralDecomposition {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd modes; ///< column n = right eigenvector v_n
    double residual = 0.0;
    double biorthogonality_defect = 0.0;
    int n_atoms = 0;
};

/// Raised when a configuration is numerically defective (biorthogonality or
/// residual above tolerance). Carries the configuration seed so the ensemble
/// driver can exclude and log the configuration instead of averaging it.
class DecompositionError : public std::runtime_error {
public:
    DecompositionError(const std::string& what, std::uint64_t seed)
        : std::runtime_error(what), config_seed(seed) {}
    std::uint64_t config_seed;
};

SpectralDecomposition decompose(const EffectiveHamiltonian& hamiltonian,
                                std::uint64_t config_seed = 0,
                                const SpectralTolerances& tol = {});

/// Apply the resolvent (omega I - M)^{-1} through the mode decomposition.
/// omega is a complex frequency offset from resonance in units of gamma.
/// Throws std::domain_error when omega is within 1e-12 of an eigenvalue.
Eigen::VectorXcd resolvent_apply(const SpectralDecomposition& decomp,
                                 std::complex<double> omega,
                                 const Eigen::VectorXcd& v);

}
