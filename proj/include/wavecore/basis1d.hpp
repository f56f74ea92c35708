#pragma once

#include <span>
#include <vector>

namespace wavecore {

enum class BasisKind { ConstantG, LinearF, QuadraticE };
enum class Continuity { Discontinuous, Continuous };

/// Nodal Lagrange basis on the reference interval [0,1].
///
/// ConstantG has its single node at 1/2, LinearF at {0, 1}, QuadraticE at
/// {0, 1/2, 1}. Physical derivatives on a cell of width d are obtained by
/// multiplying eval_basis_deriv by 1/d.
struct Basis1D {
    BasisKind kind = BasisKind::ConstantG;
    Continuity continuity = Continuity::Discontinuous;

    [[nodiscard]] int node_count() const noexcept;
    [[nodiscard]] std::span<const double> nodes() const noexcept;
    [[nodiscard]] int degree() const noexcept { return node_count() - 1; }
};

double eval_basis(const Basis1D& b, int node, double s);
double eval_basis_deriv(const Basis1D& b, int node, double s);

/// Gauss-Legendre rule mapped to [0,1]; weights sum to one.
struct QuadRule {
    std::vector<double> points;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
};

/// n-point rule, 1 <= n <= 10; exact for polynomials of degree 2n-1.
QuadRule gauss_rule(int n);

/// Default number of points per direction for element integrals.
inline constexpr int kDefaultQuadPoints = 3;

}  // namespace wavecore
