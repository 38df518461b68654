#include "srsim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace srsim {

using complexd = std::complex<double>;

namespace {

/// Bilinear (not conjugated) Gram-Schmidt inside a cluster of near-degenerate
/// eigenvalues. Generic configurations have simple spectra; exact geometric
/// degeneracies (pairs, symmetric placements) land here.
bool bilinear_orthonormalize_cluster(Eigen::MatrixXcd& v, const std::vector<int>& idx) {
    for (std::size_t a = 0; a < idx.size(); ++a) {
        auto col = v.col(idx[a]);
        for (std::size_t b = 0; b < a; ++b) {
            const complexd overlap = v.col(idx[b]).transpose() * col;
            col -= overlap * v.col(idx[b]);
        }
        const complexd norm2 = col.transpose() * col;
        if (std::abs(norm2) < 1e-10 * col.squaredNorm())
            return false; // quasi-null vector: genuinely defective
        col /= std::sqrt(norm2);
    }
    return true;
}

} // namespace

SpectralDecomposition decompose(const EffectiveHamiltonian& hamiltonian,
                                std::uint64_t config_seed,
                                const SpectralTolerances& tol) {
    const Eigen::MatrixXcd& m = hamiltonian.matrix;
    const Eigen::Index dim = m.rows();

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw DecompositionError("decompose: eigensolver failed to converge", config_seed);

    SpectralDecomposition dec;
    dec.n_atoms = hamiltonian.n_atoms;
    dec.eigenvalues = solver.eigenvalues();
    dec.modes = solver.eigenvectors();

    // Sort by decay rate -2 Im(lambda) descending (most superradiant first),
    // ties broken by Re(lambda) for index stability.
    std::vector<int> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const complexd la = dec.eigenvalues(a), lb = dec.eigenvalues(b);
        if (la.imag() != lb.imag())
            return la.imag() < lb.imag();
        return la.real() < lb.real();
    });
    {
        Eigen::VectorXcd ev(dim);
        Eigen::MatrixXcd vm(dim, dim);
        for (Eigen::Index k = 0; k < dim; ++k) {
            ev(k) = dec.eigenvalues(order[static_cast<std::size_t>(k)]);
            vm.col(k) = dec.modes.col(order[static_cast<std::size_t>(k)]);
        }
        dec.eigenvalues.swap(ev);
        dec.modes.swap(vm);
    }

    // Bilinear normalization within clusters of near-equal eigenvalues.
    const double scale = std::max(1.0, dec.eigenvalues.cwiseAbs().maxCoeff());
    const double cluster_gap = 1e-10 * scale;
    Eigen::Index k = 0;
    while (k < dim) {
        Eigen::Index end = k + 1;
        while (end < dim && std::abs(dec.eigenvalues(end) - dec.eigenvalues(end - 1)) <= cluster_gap)
            ++end;
        std::vector<int> idx;
        for (Eigen::Index j = k; j < end; ++j)
            idx.push_back(static_cast<int>(j));
        if (!bilinear_orthonormalize_cluster(dec.modes, idx))
            throw DecompositionError(
                "decompose: defective eigenbasis (quasi-null bilinear norm)", config_seed);
        k = end;
    }

    // Invariant checks: biorthogonality, per-mode residual, trace, mode signs.
    const Eigen::MatrixXcd gram = dec.modes.transpose() * dec.modes;
    dec.biorthogonality_defect =
        (gram - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (dec.biorthogonality_defect > tol.biorthogonality)
        throw DecompositionError("decompose: biorthogonality residual above threshold",
                                 config_seed);

    const Eigen::MatrixXcd mv = m * dec.modes;
    double worst = 0.0;
    for (Eigen::Index n = 0; n < dim; ++n) {
        const double num = (mv.col(n) - dec.eigenvalues(n) * dec.modes.col(n)).norm();
        worst = std::max(worst, num / dec.modes.col(n).norm());
    }
    dec.residual = worst;
    if (dec.residual > tol.residual)
        throw DecompositionError("decompose: eigenpair residual above threshold",
                                 config_seed);

    if (tol.check_reconstruction) {
        const Eigen::MatrixXcd rebuilt =
            dec.modes * dec.eigenvalues.asDiagonal() * dec.modes.transpose();
        const double m_scale = m.cwiseAbs().maxCoeff();
        const double defect = (rebuilt - m).cwiseAbs().maxCoeff();
        if (defect > tol.residual * std::max(m_scale, 1.0))
            throw DecompositionError("decompose: spectral reconstruction above threshold",
                                     config_seed);
    }

    for (Eigen::Index n = 0; n < dim; ++n)
        if (!(dec.eigenvalues(n).imag() < 0.0))
            throw DecompositionError("decompose: non-decaying mode (Im lambda >= 0)",
                                     config_seed);

    const complexd trace_sum = dec.eigenvalues.sum();
    const complexd trace_expected(0.0, -1.5 * hamiltonian.n_atoms);
    if (std::abs(trace_sum - trace_expected) > 1e-8 * std::max(1.0, std::abs(trace_expected)))
        throw DecompositionError("decompose: eigenvalue sum violates trace identity",
                                 config_seed);

    return dec;
}

Eigen::VectorXcd resolvent_apply(const SpectralDecomposition& decomp, complexd omega,
                                 const Eigen::VectorXcd& v) {
    const Eigen::Index dim = decomp.eigenvalues.size();
    for (Eigen::Index n = 0; n < dim; ++n)
        if (std::abs(omega - decomp.eigenvalues(n)) < 1e-12)
            throw std::domain_error("resolvent_apply: frequency too close to an eigenvalue");

    Eigen::VectorXcd projected = decomp.modes.transpose() * v;
    for (Eigen::Index n = 0; n < dim; ++n)
        projected(n) /= (omega - decomp.eigenvalues(n));
    return decomp.modes * projected;
}

}
