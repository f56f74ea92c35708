#include "wavecore/dispersion.hpp"
#include "wavecore/errors.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace wavecore;

namespace {

constexpr double kPi = std::numbers::pi;
const PhysParams kParams{340.0, 0.01};

// Roots of w^4 - B w^2 + C via the companion matrix of the quartic.
std::pair<double, double> quartic_roots(double k, double l, const PhysParams& p) {
    const double B = (k * k + l * l) * p.cs * p.cs + p.N * p.N;
    const double C = k * k * p.N * p.N * p.cs * p.cs;
    Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
    comp(0, 0) = 0.0;
    comp(0, 1) = B;
    comp(0, 2) = 0.0;
    comp(0, 3) = -C;
    comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
    const Eigen::Vector4cd ev = comp.eigenvalues();
    std::vector<double> pos;
    for (int i = 0; i < 4; ++i) {
        if (ev(i).real() > 0.0) pos.push_back(ev(i).real());
    }
    std::sort(pos.begin(), pos.end());
    return {pos.back(), pos.front()};
}

}  // namespace

TEST(AnalyticOmega, RestLimit) {
    const auto m = analytic_omega(0, 0, kParams);
    EXPECT_EQ(m.omega_plus, kParams.N);
    EXPECT_EQ(m.omega_minus, 0.0);
}

TEST(AnalyticOmega, HighWavenumberGravityLimit) {
    // k dx = 10 with dx = 1 km. For l = 0 the gravity root is min(k cs, N).
    const auto m = analytic_omega(10.0 / 1000.0, 0, kParams);
    EXPECT_LE(m.omega_minus, kParams.N);
    EXPECT_NEAR(m.omega_minus, kParams.N, 1e-6 * kParams.N);
}

TEST(AnalyticOmega, MatchesQuarticRoots) {
    for (const auto& [k, l] : std::vector<std::pair<double, double>>{
             {0.001, 0.001}, {kPi / 1000, kPi / 1000}, {1e-5, 3e-3}, {2e-3, 1e-6}}) {
        const auto m = analytic_omega(k, l, kParams);
        const auto [plus, minus] = quartic_roots(k, l, kParams);
        EXPECT_NEAR(m.omega_plus, plus, 1e-10 * plus);
        EXPECT_NEAR(m.omega_minus, minus, 1e-8 * minus);
    }
}

TEST(AnalyticOmega, Invariants) {
    for (double k : {0.0, 1e-5, 1e-3, 0.1}) {
        for (double l : {0.0, 1e-4, 1e-2}) {
            const auto m = analytic_omega(k, l, kParams);
            EXPECT_GE(m.omega_plus, m.omega_minus);
            EXPECT_GE(m.omega_minus, 0.0);
            EXPECT_LE(m.omega_minus, kParams.N);
            EXPECT_EQ(m.omega_minus == 0.0, k == 0.0);
        }
    }
}

TEST(DiscreteOmega, BranchCounts) {
    const std::array<std::size_t, 4> expect{2, 4, 4, 8};
    const auto cases = OrderCase::all();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto w = discrete_omega(cases[i], 1e-3, 2e-3, 1000, 1000, kParams);
        EXPECT_EQ(w.size(), static_cast<std::size_t>(2 * cases[i].dofs_per_cell()));
        EXPECT_TRUE(std::is_sorted(w.begin(), w.end()));
    }
    EXPECT_EQ(discrete_omega(OrderCase(0, 0), 1e-3, 1e-3, 1000, 1000, kParams).size(), expect[0]);
    EXPECT_EQ(discrete_omega(OrderCase(1, 0), 1e-3, 1e-3, 1000, 1000, kParams).size(), expect[2]);
    EXPECT_EQ(discrete_omega(OrderCase(1, 1), 1e-3, 1e-3, 1000, 1000, kParams).size(), expect[3]);
}

TEST(DiscreteOmega, GravityBelowAcoustic) {
    for (const auto& c : OrderCase::all()) {
        const auto w = discrete_omega(c, 0.4 * kPi / 1000, 0.7 * kPi / 1000, 1000, 1000, kParams);
        const std::size_t n = w.size() / 2;
        EXPECT_LE(w[n - 1], kParams.N * (1 + 1e-9));
        EXPECT_GT(w[n], kParams.N);
    }
}

TEST(DiscreteOmega, SecondOrderConsistency) {
    // Gravity branch error under halving of dx, dz at fixed (k, l) with k dx <= 0.1.
    for (const auto& c : OrderCase::all()) {
        const double k = 0.05 / 1000, l = 0.08 / 1000;
        const double exact = analytic_omega(k, l, kParams).omega_minus;
        std::vector<double> err;
        for (double d : {1000.0, 500.0, 250.0}) {
            const auto w = discrete_omega(c, k, l, d, d, kParams);
            // The base branch is the one closest to the analytic value.
            double best = 1e300;
            for (std::size_t i = 0; i < w.size() / 2; ++i) best = std::min(best, std::abs(w[i] - exact));
            err.push_back(best / exact);
        }
        for (std::size_t i = 1; i < err.size(); ++i) {
            const double ratio = err[i - 1] / err[i];
            // At least second order; (1,1) is fourth order at the base branch.
            EXPECT_GT(ratio, 4.0 * 0.7) << c.label();
            if (!(c == OrderCase(1, 1))) {
                EXPECT_NEAR(ratio, 4.0, 4.0 * 0.3) << c.label();
            }
        }
    }
}

TEST(Parsing, RoundTrip) {
    for (auto f : {FoldConvention::Reflect, FoldConvention::Shift}) EXPECT_EQ(parse_fold(to_string(f)), f);
    for (auto s : {SweepScaling::DofSpacing, SweepScaling::CellSize}) EXPECT_EQ(parse_scaling(to_string(s)), s);
    for (auto m : {AllocationMode::Pointwise, AllocationMode::SectorConstant})
        EXPECT_EQ(parse_allocation(to_string(m)), m);
    EXPECT_THROW(parse_fold("mirror"), DomainError);
    EXPECT_THROW(parse_scaling(""), DomainError);
    EXPECT_THROW(parse_allocation("x"), DomainError);
}

TEST(SweepCellSize, Conventions) {
    EXPECT_EQ(sweep_cell_size(OrderCase(0, 1), 1000, 800, SweepScaling::CellSize), std::make_pair(1000.0, 800.0));
    EXPECT_EQ(sweep_cell_size(OrderCase(0, 1), 1000, 800, SweepScaling::DofSpacing), std::make_pair(500.0, 800.0));
    EXPECT_EQ(sweep_cell_size(OrderCase(1, 1), 1000, 800, SweepScaling::DofSpacing), std::make_pair(1000.0, 800.0));
}

TEST(BestPermutation, BruteForceAgreement) {
    const std::vector<double> branches{0.1, 0.5, 0.3, 0.9};
    const std::vector<double> targets{0.32, 0.11, 0.88, 0.49};
    const auto p = best_permutation(branches, targets);
    EXPECT_EQ(p, (std::vector<int>{2, 0, 3, 1}));
    EXPECT_THROW(best_permutation({1.0}, {1.0, 2.0}), DomainError);
}

TEST(BestPermutation, TiesFavourFirst) {
    const auto p = best_permutation({1.0, 1.0}, {1.0, 1.0});
    EXPECT_EQ(p, (std::vector<int>{0, 1}));
}

TEST(AllocateBranches, RejectsSmallGrid) {
    EXPECT_THROW(allocate_branches(OrderCase(0, 0), 1000, 1000, kParams, 4), DomainError);
}

TEST(AllocateBranches, LowestOrderIsIdentity) {
    SweepOptions o;
    o.grid_n = 10;
    o.mode = AllocationMode::SectorConstant;
    const auto s = allocate_branches(OrderCase(0, 0), 1000, 1000, kParams, o);
    ASSERT_EQ(s.allocation[0].permutation, std::vector<int>{0});
    EXPECT_EQ(s.sectors_x() * s.sectors_z(), 1);
    for (const auto& p : s.points) {
        EXPECT_EQ(p.sector, 0);
        const auto w = discrete_omega(OrderCase(0, 0), p.base_k, p.base_l, s.cell_dx, s.cell_dz, kParams);
        EXPECT_EQ(p.omega[0], w[0]);
        EXPECT_EQ(p.omega[1], w[1]);
    }
}

TEST(AllocateBranches, GridLayout) {
    SweepOptions o;
    o.grid_n = 8;
    o.fold = FoldConvention::Reflect;
    const auto s = allocate_branches(OrderCase(1, 0), 1000, 1000, kParams, o);
    ASSERT_EQ(s.points.size(), 64u);
    EXPECT_DOUBLE_EQ(s.points[1].k_tilde, 1.5 * 2 * kPi / 1000 / 8);
    EXPECT_DOUBLE_EQ(s.points[1].l_tilde, s.points[0].l_tilde);
    EXPECT_DOUBLE_EQ(s.points[8].l_tilde, 1.5 * 2 * kPi / 1000 / 8);
    for (const auto& p : s.points) {
        EXPECT_GT(p.k_tilde, 0.0);
        EXPECT_LT(p.k_tilde, 2 * kPi / 1000);
        EXPECT_GE(p.omega[1], p.omega[0]);
    }
}

TEST(AllocateBranches, SectorConstantOptimality) {
    // Re-score every permutation; the stored one must be minimal and first among ties.
    for (const auto& c : {OrderCase(1, 0), OrderCase(0, 1), OrderCase(1, 1)}) {
        SweepOptions o;
        o.grid_n = 12;
        o.mode = AllocationMode::SectorConstant;
        o.fold = FoldConvention::Reflect;
        const auto s = allocate_branches(c, 1000, 1000, kParams, o);
        for (const auto& alloc : s.allocation) {
            const std::size_t expect = c == OrderCase(1, 1) ? 24u : 2u;
            ASSERT_EQ(alloc.candidates.size(), expect);
            for (const auto& [perm, score] : alloc.candidates) {
                EXPECT_LE(alloc.score, score);
                if (score == alloc.score) {
                    EXPECT_EQ(perm, alloc.permutation);
                    break;
                }
            }
        }
    }
}

TEST(AllocateBranches, PointwiseOptimality) {
    SweepOptions o;
    o.grid_n = 10;
    o.fold = FoldConvention::Reflect;
    const auto c = OrderCase(1, 1);
    const auto s = allocate_branches(c, 1000, 1000, kParams, o);
    for (const auto& p : s.points) {
        const auto w = discrete_omega(c, p.base_k, p.base_l, s.cell_dx, s.cell_dz, kParams);
        for (Regime r : {Regime::Gravity, Regime::Acoustic}) {
            const std::size_t n = w.size() / 2;
            const std::size_t off = r == Regime::Gravity ? 0 : n;
            std::vector<double> branches(w.begin() + static_cast<long>(off), w.begin() + static_cast<long>(off + n));
            const auto targets = aliased_targets(c, p.base_k, p.base_l, s.cell_dx, s.cell_dz, s.fold, r, kParams);
            // Own-sector target is the analytic value at this point.
            EXPECT_NEAR(targets[static_cast<std::size_t>(p.sector)], p.analytic[static_cast<std::size_t>(r)],
                        1e-12 * std::max(1e-3, p.analytic[static_cast<std::size_t>(r)]));
            double best = 1e300;
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            do {
                double sc = 0.0;
                for (std::size_t q = 0; q < n; ++q) sc += std::pow(branches[static_cast<std::size_t>(perm[q])] - targets[q], 2);
                best = std::min(best, sc);
            } while (std::next_permutation(perm.begin(), perm.end()));
            const auto chosen = best_permutation(branches, targets);
            double sc = 0.0;
            for (std::size_t q = 0; q < n; ++q) sc += std::pow(branches[static_cast<std::size_t>(chosen[q])] - targets[q], 2);
            EXPECT_EQ(sc, best);
            EXPECT_EQ(p.omega[static_cast<std::size_t>(r)],
                      branches[static_cast<std::size_t>(chosen[static_cast<std::size_t>(p.sector)])]);
        }
    }
}

TEST(AllocateBranches, AutomaticFoldPicksLowerError) {
    SweepOptions o;
    o.grid_n = 10;
    const auto s = allocate_branches(OrderCase(1, 0), 1000, 1000, kParams, o);
    EXPECT_GT(s.fold_scores[0], 0.0);
    EXPECT_GT(s.fold_scores[1], 0.0);
    const std::size_t chosen = s.fold == FoldConvention::Reflect ? 0 : 1;
    EXPECT_LE(s.fold_scores[chosen], s.fold_scores[1 - chosen]);
}

TEST(AllocateBranches, ThreadCountDoesNotChangeResult) {
    SweepOptions a;
    a.grid_n = 12;
    a.threads = 1;
    SweepOptions b = a;
    b.threads = 3;
    const auto sa = allocate_branches(OrderCase(1, 1), 1000, 1000, kParams, a);
    const auto sb = allocate_branches(OrderCase(1, 1), 1000, 1000, kParams, b);
    ASSERT_EQ(sa.points.size(), sb.points.size());
    for (std::size_t i = 0; i < sa.points.size(); ++i) {
        EXPECT_EQ(sa.points[i].omega, sb.points[i].omega);
    }
}

TEST(ErrorStats, ExactSurfaceIsZero) {
    SweepOptions o;
    o.grid_n = 8;
    auto s = allocate_branches(OrderCase(1, 1), 1000, 1000, kParams, o);
    overwrite_with_analytic(s);
    for (Regime r : {Regime::Gravity, Regime::Acoustic}) {
        const auto st = error_stats(s, r);
        EXPECT_EQ(st.normalized_l2, 0.0);
        EXPECT_EQ(st.max_err, 0.0);
        EXPECT_EQ(st.min_err, 0.0);
        EXPECT_EQ(st.max_abs, 0.0);
    }
}

TEST(ErrorStats, Ordering) {
    SweepOptions o;
    o.grid_n = 10;
    const auto s = allocate_branches(OrderCase(0, 1), 1000, 1000, kParams, o);
    for (Regime r : {Regime::Gravity, Regime::Acoustic}) {
        const auto st = error_stats(s, r);
        EXPECT_GE(st.min_err, 0.0);
        EXPECT_LE(st.min_err, st.rms_rel);
        EXPECT_LE(st.rms_rel, st.max_err);
        EXPECT_LE(st.min_abs, st.max_abs);
    }
}

TEST(ErrorStats, EmptyThrows) {
    DispersionSurface s;
    EXPECT_THROW(error_stats(s, Regime::Gravity), DomainError);
}
