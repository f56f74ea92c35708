#include "wavecore/basis1d.hpp"
#include "wavecore/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace wavecore;

namespace {

const Basis1D G{BasisKind::ConstantG, Continuity::Discontinuous};
const Basis1D F{BasisKind::LinearF, Continuity::Continuous};
const Basis1D E{BasisKind::QuadraticE, Continuity::Continuous};

}  // namespace

TEST(Basis1D, NodeCounts) {
    EXPECT_EQ(G.node_count(), 1);
    EXPECT_EQ(F.node_count(), 2);
    EXPECT_EQ(E.node_count(), 3);
    EXPECT_EQ(E.degree(), 2);
}

TEST(Basis1D, SpecExamples) {
    EXPECT_DOUBLE_EQ(eval_basis(F, 0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(eval_basis(G, 0, 0.37), 1.0);
    EXPECT_DOUBLE_EQ(eval_basis(E, 1, 0.5), 1.0);
    for (double s : {0.0, 0.3, 0.8, 1.0}) {
        EXPECT_DOUBLE_EQ(eval_basis_deriv(F, 0, s), -1.0);
        EXPECT_DOUBLE_EQ(eval_basis_deriv(G, 0, s), 0.0);
    }
    EXPECT_DOUBLE_EQ(eval_basis_deriv(E, 1, 0.5), 0.0);
}

TEST(Basis1D, BadNodeThrows) {
    EXPECT_THROW(eval_basis(G, 1, 0.5), DomainError);
    EXPECT_THROW(eval_basis(E, -1, 0.5), DomainError);
    EXPECT_THROW(eval_basis_deriv(F, 2, 0.5), DomainError);
}

TEST(Basis1D, Kronecker) {
    for (const Basis1D& b : {G, F, E}) {
        const auto nodes = b.nodes();
        for (int i = 0; i < b.node_count(); ++i) {
            for (int j = 0; j < b.node_count(); ++j) {
                EXPECT_NEAR(eval_basis(b, i, nodes[static_cast<std::size_t>(j)]), i == j ? 1.0 : 0.0, 1e-15);
            }
        }
    }
}

TEST(Basis1D, PartitionOfUnity) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const double s = u(rng);
        for (const Basis1D& b : {F, E}) {
            double sum = 0.0;
            for (int i = 0; i < b.node_count(); ++i) sum += eval_basis(b, i, s);
            EXPECT_NEAR(sum, 1.0, 1e-14);
        }
    }
}

TEST(Basis1D, DerivativeMatchesFiniteDifference) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    const double h = 1e-6;
    for (int t = 0; t < 50; ++t) {
        const double s = u(rng);
        for (const Basis1D& b : {G, F, E}) {
            for (int i = 0; i < b.node_count(); ++i) {
                const double fd = (eval_basis(b, i, s + h) - eval_basis(b, i, s - h)) / (2 * h);
                EXPECT_NEAR(fd, eval_basis_deriv(b, i, s), 1e-8);
            }
        }
    }
}

TEST(GaussRule, SmallRules) {
    const QuadRule r1 = gauss_rule(1);
    ASSERT_EQ(r1.size(), 1u);
    EXPECT_DOUBLE_EQ(r1.points[0], 0.5);
    EXPECT_DOUBLE_EQ(r1.weights[0], 1.0);

    const QuadRule r2 = gauss_rule(2);
    ASSERT_EQ(r2.size(), 2u);
    const double off = 1.0 / (2.0 * std::sqrt(3.0));
    EXPECT_NEAR(r2.points[0], 0.5 - off, 1e-15);
    EXPECT_NEAR(r2.points[1], 0.5 + off, 1e-15);
    EXPECT_NEAR(r2.weights[0], 0.5, 1e-15);
    EXPECT_NEAR(r2.weights[1], 0.5, 1e-15);

    double cubic = 0.0;
    for (std::size_t i = 0; i < r2.size(); ++i) cubic += r2.weights[i] * std::pow(r2.points[i], 3);
    EXPECT_NEAR(cubic, 0.25, 1e-16);
}

TEST(GaussRule, ExactnessAndWeights) {
    for (int n = 1; n <= 10; ++n) {
        const QuadRule r = gauss_rule(n);
        double wsum = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            wsum += w;
        }
        EXPECT_NEAR(wsum, 1.0, 1e-14);
        for (double p : r.points) {
            EXPECT_GT(p, 0.0);
            EXPECT_LT(p, 1.0);
        }
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double q = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) q += r.weights[i] * std::pow(r.points[i], d);
            EXPECT_NEAR(q, 1.0 / (d + 1), 1e-14) << "n=" << n << " degree " << d;
        }
    }
}

TEST(GaussRule, OutOfRangeThrows) {
    EXPECT_THROW(gauss_rule(0), DomainError);
    EXPECT_THROW(gauss_rule(11), DomainError);
}
