#include "wavecore/basis1d.hpp"

#include "wavecore/errors.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace wavecore {

namespace {

constexpr std::array<double, 1> kNodesG{0.5};
constexpr std::array<double, 2> kNodesF{0.0, 1.0};
constexpr std::array<double, 3> kNodesE{0.0, 0.5, 1.0};

void check_node(const Basis1D& b, int node) {
    if (node < 0 || node >= b.node_count()) {
        throw DomainError("basis node index " + std::to_string(node) + " out of range [0, " +
                          std::to_string(b.node_count()) + ")");
    }
}

}  // namespace

int Basis1D::node_count() const noexcept {
    switch (kind) {
        case BasisKind::ConstantG: return 1;
        case BasisKind::LinearF: return 2;
        case BasisKind::QuadraticE: return 3;
    }
    return 0;
}

std::span<const double> Basis1D::nodes() const noexcept {
    switch (kind) {
        case BasisKind::ConstantG: return kNodesG;
        case BasisKind::LinearF: return kNodesF;
        case BasisKind::QuadraticE: return kNodesE;
    }
    return {};
}

double eval_basis(const Basis1D& b, int node, double s) {
    check_node(b, node);
    switch (b.kind) {
        case BasisKind::ConstantG:
            return 1.0;
        case BasisKind::LinearF:
            return node == 0 ? 1.0 - s : s;
        case BasisKind::QuadraticE:
            switch (node) {
                case 0: return 2.0 * (s - 0.5) * (s - 1.0);
                case 1: return 4.0 * s * (1.0 - s);
                default: return 2.0 * s * (s - 0.5);
            }
    }
    return 0.0;
}

double eval_basis_deriv(const Basis1D& b, int node, double s) {
    check_node(b, node);
    switch (b.kind) {
        case BasisKind::ConstantG:
            return 0.0;
        case BasisKind::LinearF:
            return node == 0 ? -1.0 : 1.0;
        case BasisKind::QuadraticE:
            switch (node) {
                case 0: return 4.0 * s - 3.0;
                case 1: return 4.0 - 8.0 * s;
                default: return 4.0 * s - 1.0;
            }
    }
    return 0.0;
}

QuadRule gauss_rule(int n) {
    if (n < 1 || n > 10) {
        throw DomainError("gauss_rule: n = " + std::to_string(n) + " outside [1, 10]");
    }
    QuadRule rule;
    rule.points.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));

    // Newton iteration on P_n from the Chebyshev-like initial guess, on [-1,1].
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute derivative at the converged root.
        {
            double p0 = 1.0;
            double p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        // Map [-1,1] -> [0,1]; points ascending.
        rule.points[lo] = 0.5 * (1.0 - x);
        rule.points[hi] = 0.5 * (1.0 + x);
        rule.weights[lo] = 0.5 * w;
        rule.weights[hi] = 0.5 * w;
    }
    if (n % 2 == 1) {
        rule.points[static_cast<std::size_t>(n / 2)] = 0.5;
    }
    return rule;
}

}  // namespace wavecore
