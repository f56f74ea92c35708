#pragma once

#include "wavecore/fespace.hpp"

#include <Eigen/Dense>

namespace wavecore {

struct PhysParams {
    double cs = 340.0;  ///< sound speed (m/s)
    double N = 0.01;    ///< buoyancy frequency (1/s)

    void validate() const;
};

/// Per-wavenumber reduction of the linear system:  -i omega M x + S x = 0.
///
/// Unknowns are ordered [U owned, W owned, P owned, B owned] with each block of
/// size (h+1)(v+1). Every DoF amplitude is referenced to the DoF's own physical
/// position, which makes M Hermitian.
struct BlochSystem {
    OrderCase order{0, 0};
    double k = 0.0;
    double l = 0.0;
    double dx = 1.0;
    double dz = 1.0;
    PhysParams params;
    Eigen::MatrixXcd M;
    Eigen::MatrixXcd S;

    [[nodiscard]] int dimension() const noexcept { return static_cast<int>(M.rows()); }
    [[nodiscard]] int block_size() const noexcept { return order.dofs_per_cell(); }
    /// Sub-block (row field, column field) of either matrix.
    [[nodiscard]] Eigen::MatrixXcd block(const Eigen::MatrixXcd& A, Field row, Field col) const;
};

/// Quadrature assembly on one reference cell with neighbour couplings folded
/// in through phase factors exp(i k (x_b - x_a) + i l (z_b - z_a)).
BlochSystem assemble_bloch(const OrderCase& c, double k, double l, double dx, double dz,
                           const PhysParams& p, int quad_points = kDefaultQuadPoints);

/// Hand-derived matrices for (1,0) and (0,1), in their own phase
/// convention. Throws DomainError for other cases.
BlochSystem closed_form_bloch(const OrderCase& c, double k, double l, double dx, double dz,
                              const PhysParams& p);

/// Eigenvalues of -i M^{-1} S, sorted by real part then imaginary part.
Eigen::VectorXcd bloch_frequencies(const BlochSystem& sys);

struct OracleReport {
    double eig_mismatch = 0.0;               ///< absolute, rad/s
    double entry_mismatch_after_phase = 0.0;  ///< relative to the largest entry of each matrix
};

OracleReport oracle_compare(const BlochSystem& a, const BlochSystem& b);

}  // namespace wavecore
