#include "wavecore/errors.hpp"
#include "wavecore/fespace.hpp"

#include <gtest/gtest.h>

using namespace wavecore;

TEST(OrderCase, Construction) {
    EXPECT_NO_THROW(OrderCase(1, 1));
    EXPECT_THROW(OrderCase(2, 0), DomainError);
    EXPECT_THROW(OrderCase(0, -1), DomainError);
    EXPECT_EQ(OrderCase(1, 0).label(), "(1,0)");
    EXPECT_EQ(OrderCase::parse("0,1"), OrderCase(0, 1));
    EXPECT_EQ(OrderCase::parse("(1,1)"), OrderCase(1, 1));
    EXPECT_EQ(OrderCase::parse("10"), OrderCase(1, 0));
    EXPECT_THROW(OrderCase::parse("x"), DomainError);
}

TEST(BuildCase, TenU) {
    const auto s = build_case(OrderCase(1, 0));
    const auto& U = space_of(s, Field::U);
    EXPECT_EQ(U.horiz.kind, BasisKind::QuadraticE);
    EXPECT_EQ(U.vert.kind, BasisKind::ConstantG);
    EXPECT_EQ(U.unique_dofs_per_cell, 2);
}

TEST(BuildCase, DimensionsAndSpaces) {
    EXPECT_EQ(OrderCase(0, 0).system_dim(), 4);
    EXPECT_EQ(OrderCase(1, 1).system_dim(), 16);
    for (const auto& c : OrderCase::all()) {
        const auto s = build_case(c);
        const auto& U = space_of(s, Field::U);
        const auto& W = space_of(s, Field::W);
        const auto& P = space_of(s, Field::P);
        const auto& B = space_of(s, Field::B);
        const BasisKind cg = c.h() == 0 ? BasisKind::LinearF : BasisKind::QuadraticE;
        const BasisKind dgh = c.h() == 0 ? BasisKind::ConstantG : BasisKind::LinearF;
        const BasisKind cgv = c.v() == 0 ? BasisKind::LinearF : BasisKind::QuadraticE;
        const BasisKind dgv = c.v() == 0 ? BasisKind::ConstantG : BasisKind::LinearF;
        EXPECT_EQ(U.horiz.kind, cg);
        EXPECT_EQ(U.vert.kind, dgv);
        EXPECT_EQ(W.horiz.kind, dgh);
        EXPECT_EQ(W.vert.kind, cgv);
        EXPECT_EQ(P.horiz.kind, dgh);
        EXPECT_EQ(P.vert.kind, dgv);
        EXPECT_EQ(B.horiz.kind, W.horiz.kind);
        EXPECT_EQ(B.vert.kind, W.vert.kind);
        for (Field f : kFields) {
            const auto& fs = space_of(s, f);
            EXPECT_EQ(fs.unique_dofs_per_cell, c.dofs_per_cell()) << c.label() << " " << field_name(f);
        }
    }
}

TEST(BuildCase, SharedIdentificationCount) {
    // Local nodes minus far-edge copies equals (h+1)(v+1).
    for (const auto& c : OrderCase::all()) {
        const auto s = build_case(c);
        for (Field f : kFields) {
            const auto& fs = space_of(s, f);
            int far = 0;
            for (const auto& n : fs.nodes) {
                if (n.shift_x == 1 || n.shift_z == 1) ++far;
            }
            EXPECT_EQ(fs.local_count() - far, c.dofs_per_cell());
        }
    }
}

TEST(BuildCase, ContinuityTags) {
    for (const auto& c : OrderCase::all()) {
        const auto s = build_case(c);
        EXPECT_TRUE(space_of(s, Field::U).continuous_x());
        EXPECT_FALSE(space_of(s, Field::U).continuous_z());
        for (Field f : {Field::W, Field::B}) {
            EXPECT_FALSE(space_of(s, f).continuous_x());
            EXPECT_TRUE(space_of(s, f).continuous_z());
        }
        EXPECT_FALSE(space_of(s, Field::P).continuous_x());
        EXPECT_FALSE(space_of(s, Field::P).continuous_z());
        for (Field f : kFields) {
            const auto& fs = space_of(s, f);
            for (const auto& n : fs.nodes) {
                if (n.tag == DofTag::XEdgeShared) EXPECT_TRUE(fs.continuous_x());
                if (n.tag == DofTag::ZEdgeShared) EXPECT_TRUE(fs.continuous_z());
            }
        }
        for (const auto& n : space_of(s, Field::P).nodes) EXPECT_EQ(n.tag, DofTag::Interior);
    }
}

TEST(DofNumbering, PaperLayouts) {
    const auto s10 = build_case(OrderCase(1, 0));
    const auto u = dof_numbering(space_of(s10, Field::U));
    ASSERT_EQ(u.size(), 2u);
    EXPECT_EQ(u[0].xi, 0.0);
    EXPECT_EQ(u[0].eta, 0.5);
    EXPECT_EQ(u[0].tag, DofTag::XEdgeShared);
    EXPECT_EQ(u[1].xi, 0.5);
    EXPECT_EQ(u[1].eta, 0.5);
    EXPECT_EQ(u[1].tag, DofTag::Interior);

    const auto w = dof_numbering(space_of(s10, Field::W));
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[0].xi, 0.0);
    EXPECT_EQ(w[0].eta, 0.0);
    EXPECT_EQ(w[1].xi, 1.0);
    EXPECT_EQ(w[1].eta, 0.0);

    const auto s01 = build_case(OrderCase(0, 1));
    const auto w01 = dof_numbering(space_of(s01, Field::W));
    ASSERT_EQ(w01.size(), 2u);
    EXPECT_EQ(w01[0].xi, 0.5);
    EXPECT_EQ(w01[0].eta, 0.0);
    EXPECT_EQ(w01[0].tag, DofTag::ZEdgeShared);
    EXPECT_EQ(w01[1].xi, 0.5);
    EXPECT_EQ(w01[1].eta, 0.5);
}

TEST(DofNumbering, Deterministic) {
    for (const auto& c : OrderCase::all()) {
        const auto a = build_case(c);
        const auto b = build_case(c);
        for (Field f : kFields) {
            const auto da = dof_numbering(space_of(a, f));
            const auto db = dof_numbering(space_of(b, f));
            ASSERT_EQ(da.size(), db.size());
            for (std::size_t i = 0; i < da.size(); ++i) {
                EXPECT_EQ(da[i].xi, db[i].xi);
                EXPECT_EQ(da[i].eta, db[i].eta);
            }
            // x fastest, bottom to top
            for (std::size_t i = 1; i < da.size(); ++i) {
                EXPECT_TRUE(da[i - 1].eta < da[i].eta || (da[i - 1].eta == da[i].eta && da[i - 1].xi < da[i].xi));
            }
        }
    }
}

TEST(ElementMatrices, MassSymmetricPositive) {
    for (const auto& c : OrderCase::all()) {
        const auto em = element_matrices(build_case(c), 700.0, 300.0);
        for (const auto& m : em.mass) {
            EXPECT_LT((m - m.transpose()).norm(), 1e-12 * m.norm());
            Eigen::LLT<Eigen::MatrixXd> llt(m);
            EXPECT_EQ(llt.info(), Eigen::Success);
            // Unit field integrates to the cell area.
            EXPECT_NEAR(m.sum(), 700.0 * 300.0, 1e-8);
        }
    }
}

TEST(ElementMatrices, GradientOfConstantTrial) {
    // Sum over trial p-nodes gives int dchi/dx over the cell: zero for interior u-nodes.
    const auto s = build_case(OrderCase(1, 0));
    const auto em = element_matrices(s, 1000.0, 1000.0);
    const Eigen::VectorXd row = em.grad_x.rowwise().sum();
    const auto& U = space_of(s, Field::U);
    for (int a = 0; a < U.local_count(); ++a) {
        const auto& n = U.nodes[static_cast<std::size_t>(a)];
        const double expect = n.xi == 0.0 ? -1000.0 : (n.xi == 1.0 ? 1000.0 : 0.0);
        EXPECT_NEAR(row(a), expect, 1e-9);
    }
}
