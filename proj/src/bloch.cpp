#include "wavecore/bloch.hpp"

#include "wavecore/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

namespace wavecore {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

void PhysParams::validate() const {
    if (!(cs > 0.0) || !std::isfinite(cs)) {
        throw DomainError("sound speed must be positive");
    }
    if (!(N >= 0.0) || !std::isfinite(N)) {
        throw DomainError("buoyancy frequency must be non-negative");
    }
}

Eigen::MatrixXcd BlochSystem::block(const Eigen::MatrixXcd& A, Field row, Field col) const {
    const int n = block_size();
    return A.block(static_cast<int>(row) * n, static_cast<int>(col) * n, n, n);
}

namespace {

// Sum of local couplings into owned-DoF rows/cols with Bloch phases.
Eigen::MatrixXcd fold(const FieldSpace& test, const FieldSpace& trial, const Eigen::MatrixXd& local,
                      double k, double l, double dx, double dz) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(test.unique_dofs_per_cell, trial.unique_dofs_per_cell);
    for (int a = 0; a < test.local_count(); ++a) {
        const auto& na = test.nodes[static_cast<std::size_t>(a)];
        for (int b = 0; b < trial.local_count(); ++b) {
            const double v = local(a, b);
            if (v == 0.0) {
                continue;
            }
            const auto& nb = trial.nodes[static_cast<std::size_t>(b)];
            const double phase = k * (nb.xi - na.xi) * dx + l * (nb.eta - na.eta) * dz;
            out(na.owned, nb.owned) += v * std::exp(kI * phase);
        }
    }
    return out;
}

void check_mass_blocks(const BlochSystem& sys) {
    for (Field f : kFields) {
        const Eigen::MatrixXcd blk = sys.block(sys.M, f, f);
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(blk);
        const double rc = lu.rcond();
        if (!(rc > 1e-13)) {
            std::ostringstream os;
            os << "singular " << field_name(f) << " mass block at k=" << sys.k << " l=" << sys.l
               << " case " << sys.order.label() << " (rcond " << rc << ")";
            throw NumericalError(os.str());
        }
    }
}

void place(Eigen::MatrixXcd& A, int n, Field row, Field col, const Eigen::MatrixXcd& blk) {
    A.block(static_cast<int>(row) * n, static_cast<int>(col) * n, n, n) = blk;
}

}  // namespace

BlochSystem assemble_bloch(const OrderCase& c, double k, double l, double dx, double dz,
                           const PhysParams& p, int quad_points) {
    if (!(dx > 0.0) || !(dz > 0.0)) {
        throw DomainError("assemble_bloch: cell sizes must be positive");
    }
    if (!std::isfinite(k) || !std::isfinite(l)) {
        throw DomainError("assemble_bloch: wavenumbers must be finite");
    }
    p.validate();

    const CaseSpaces spaces = build_case(c);
    const ElementMatrices em = element_matrices(spaces, dx, dz, quad_points);
    const auto& U = space_of(spaces, Field::U);
    const auto& W = space_of(spaces, Field::W);
    const auto& P = space_of(spaces, Field::P);
    const auto& B = space_of(spaces, Field::B);
    const double c2 = p.cs * p.cs;
    const double n2 = p.N * p.N;

    BlochSystem sys;
    sys.order = c;
    sys.k = k;
    sys.l = l;
    sys.dx = dx;
    sys.dz = dz;
    sys.params = p;
    const int n = c.dofs_per_cell();
    sys.M = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
    sys.S = Eigen::MatrixXcd::Zero(4 * n, 4 * n);

    for (Field f : kFields) {
        const auto& fs = space_of(spaces, f);
        place(sys.M, n, f, f, fold(fs, fs, em.mass[static_cast<std::size_t>(f)], k, l, dx, dz));
    }
    place(sys.S, n, Field::U, Field::P, -fold(U, P, em.grad_x, k, l, dx, dz));
    place(sys.S, n, Field::W, Field::P, -fold(W, P, em.grad_z, k, l, dx, dz));
    place(sys.S, n, Field::W, Field::B, -fold(W, B, em.coupling_wb, k, l, dx, dz));
    place(sys.S, n, Field::P, Field::U, c2 * fold(P, U, em.grad_x.transpose(), k, l, dx, dz));
    place(sys.S, n, Field::P, Field::W, c2 * fold(P, W, em.grad_z.transpose(), k, l, dx, dz));
    place(sys.S, n, Field::B, Field::W, n2 * fold(B, W, em.coupling_wb.transpose(), k, l, dx, dz));

    check_mass_blocks(sys);
    return sys;
}

BlochSystem closed_form_bloch(const OrderCase& c, double k, double l, double dx, double dz,
                              const PhysParams& p) {
    if (!(c == OrderCase{1, 0}) && !(c == OrderCase{0, 1})) {
        throw DomainError("closed_form_bloch: no closed form for case " + c.label());
    }
    p.validate();
    using Mat2 = Eigen::Matrix2cd;
    const double a = k * dx;
    const double b = l * dz;
    const cplx ek = std::exp(kI * a);
    const cplx ek2 = std::exp(kI * a / 2.0);
    const cplx el = std::exp(kI * b);
    const cplx el2 = std::exp(kI * b / 2.0);
    const cplx ekm = std::exp(-kI * a);
    const cplx elm = std::exp(-kI * b);
    const double area = dx * dz;

    Mat2 Mu;
    Mat2 Mw;
    Mat2 Mp;
    Mat2 Dxu;
    Mat2 Dxp;
    Mat2 Dzw;
    Mat2 Dzp;
    if (c == OrderCase{1, 0}) {
        Mu << (8.0 - 2.0 * std::cos(a)) * el2, 4.0 * std::cos(a / 2.0) * el2,
              (2.0 * ek + 2.0) * el2, 16.0 * ek2 * el2;
        Mu *= area / 30.0;
        const double cb = std::cos(b) + 2.0;
        Mw << 4.0 * cb, 2.0 * cb * ek,
              2.0 * cb, 4.0 * cb * ek;
        Mw *= area / 36.0;
        Mp << 2.0 * el2, el2 * ek,
              el2, 2.0 * el2 * ek;
        Mp *= area / 6.0;
        Dxu << (5.0 - ekm) * el2, (ek - 5.0) * el2,
               -4.0 * el2, 4.0 * el2 * ek;
        Dxu *= dz / 6.0;
        Dxp << (ek - 5.0) * el2, 4.0 * el2 * ek2,
               (5.0 * ek - 1.0) * el2, -4.0 * el2 * ek2;
        Dxp *= dz / 6.0;
        const cplx s = kI * std::sin(b / 2.0);
        Dzw << 4.0 * s, 2.0 * s * ek,
               2.0 * s, 4.0 * s * ek;
        Dzw *= dx / 6.0;
        Dzp << 2.0 * (el - 1.0), (el - 1.0) * ek,
               (el - 1.0), 2.0 * (el - 1.0) * ek;
        Dzp *= dx / 6.0;
    } else {
        const double ca = std::cos(a) + 2.0;
        // Prefactor dx dz / 36: the only value matching the quadrature spectrum.
        Mu << 4.0 * ca, 2.0 * ca * el,
              2.0 * ca, 4.0 * ca * el;
        Mu *= area / 36.0;
        Mw << (8.0 - 2.0 * std::cos(b)) * ek2, 4.0 * std::cos(b / 2.0) * ek2,
              (2.0 * el + 2.0) * ek2, 16.0 * ek2 * el2;
        Mw *= area / 30.0;
        Mp << 2.0 * ek2, ek2 * el,
              ek2, 2.0 * ek2 * el;
        Mp *= area / 6.0;
        const cplx s = kI * std::sin(a / 2.0);
        Dxu << 4.0 * s, 2.0 * s * el,
               2.0 * s, 4.0 * s * el;
        Dxu *= dz / 6.0;
        Dxp << 2.0 * (ek - 1.0), (ek - 1.0) * el,
               (ek - 1.0), 2.0 * (ek - 1.0) * el;
        Dxp *= dz / 6.0;
        Dzw << (5.0 - elm) * ek2, (el - 5.0) * ek2,
               -4.0 * ek2, 4.0 * ek2 * el;
        Dzw *= dx / 6.0;
        Dzp << (el - 5.0) * ek2, 4.0 * ek2 * el2,
               (5.0 * el - 1.0) * ek2, -4.0 * ek2 * el2;
        Dzp *= dx / 6.0;
    }
    const Mat2& Mb = Mw;
    const Mat2& Q = Mw;
    const double c2 = p.cs * p.cs;
    const double n2 = p.N * p.N;

    BlochSystem sys;
    sys.order = c;
    sys.k = k;
    sys.l = l;
    sys.dx = dx;
    sys.dz = dz;
    sys.params = p;
    sys.M = Eigen::MatrixXcd::Zero(8, 8);
    sys.S = Eigen::MatrixXcd::Zero(8, 8);
    place(sys.M, 2, Field::U, Field::U, Mu);
    place(sys.M, 2, Field::W, Field::W, Mw);
    place(sys.M, 2, Field::P, Field::P, Mp);
    place(sys.M, 2, Field::B, Field::B, Mb);
    place(sys.S, 2, Field::U, Field::P, Dxu);
    place(sys.S, 2, Field::W, Field::P, Dzw);
    place(sys.S, 2, Field::W, Field::B, -Q);
    place(sys.S, 2, Field::P, Field::U, c2 * Dxp);
    place(sys.S, 2, Field::P, Field::W, c2 * Dzp);
    // The b-row coupling is N^2 Q in this phase convention (Q^T does not
    // reproduce the spectrum).
    place(sys.S, 2, Field::B, Field::W, n2 * Q);
    return sys;
}

Eigen::VectorXcd bloch_frequencies(const BlochSystem& sys) {
    // Both branches are similarity transforms of -i M^{-1} S. With a Hermitian
    // mass, W M = L L^H gives L^{-1} (-i W S) L^{-H}, which is close to Hermitian
    // and so has well-conditioned eigenvalues. Otherwise (the closed-form phase
    // convention) only the energy weights W are balanced out.
    const int nb = sys.block_size();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(sys.dimension());
    w.segment(2 * nb, nb).setConstant(1.0 / (sys.params.cs * sys.params.cs));
    if (sys.params.N > 0.0) {
        w.segment(3 * nb, nb).setConstant(1.0 / (sys.params.N * sys.params.N));
    }
    const Eigen::MatrixXcd WM = w.asDiagonal() * sys.M;
    Eigen::MatrixXcd F;
    Eigen::LLT<Eigen::MatrixXcd> llt;
    if ((WM - WM.adjoint()).norm() <= 1e-13 * WM.norm() && llt.compute(WM).info() == Eigen::Success) {
        F = -kI * (w.asDiagonal() * sys.S);
        llt.matrixL().solveInPlace(F);
        F = llt.matrixL().solve(F.adjoint()).adjoint();
    } else {
        const Eigen::VectorXd r = w.cwiseSqrt();
        F = -kI * (r.asDiagonal() * sys.M.partialPivLu().solve(sys.S) * r.cwiseInverse().asDiagonal());
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(F, false);
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigensolver did not converge for case " + sys.order.label());
    }
    Eigen::VectorXcd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](const cplx& x, const cplx& y) {
        if (x.real() != y.real()) {
            return x.real() < y.real();
        }
        return x.imag() < y.imag();
    });
    return ev;
}

namespace {

// Row/column phases aligning A to B: B_ij ~ exp(i(theta_i + phi_j)) A_ij.
double phase_aligned_residual(const std::vector<const Eigen::MatrixXcd*>& as,
                              const std::vector<const Eigen::MatrixXcd*>& bs) {
    const int n = static_cast<int>(as.front()->rows());
    struct Edge {
        int i;
        int j;
        double weight;
        double phase;
    };
    std::vector<Edge> edges;
    for (std::size_t m = 0; m < as.size(); ++m) {
        const auto& A = *as[m];
        const auto& B = *bs[m];
        const double scale = std::max(A.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff());
        if (scale == 0.0) {
            continue;
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double w = std::min(std::abs(A(i, j)), std::abs(B(i, j))) / scale;
                if (w > 1e-8) {
                    edges.push_back({i, j, w, std::arg(B(i, j) / A(i, j))});
                }
            }
        }
    }
    std::stable_sort(edges.begin(), edges.end(),
                     [](const Edge& x, const Edge& y) { return x.weight > y.weight; });

    // Maximum spanning forest over rows (0..n-1) and columns (n..2n-1).
    std::vector<int> parent(static_cast<std::size_t>(2 * n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(2 * n));
    for (const auto& e : edges) {
        const int ri = find(e.i);
        const int rj = find(n + e.j);
        if (ri != rj) {
            parent[static_cast<std::size_t>(ri)] = rj;
            adj[static_cast<std::size_t>(e.i)].push_back({n + e.j, e.phase});
            adj[static_cast<std::size_t>(n + e.j)].push_back({e.i, e.phase});
        }
    }
    std::vector<double> ang(static_cast<std::size_t>(2 * n), 0.0);
    std::vector<bool> seen(static_cast<std::size_t>(2 * n), false);
    for (int root = 0; root < 2 * n; ++root) {
        if (seen[static_cast<std::size_t>(root)]) {
            continue;
        }
        std::vector<int> stack{root};
        seen[static_cast<std::size_t>(root)] = true;
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            for (const auto& [y, ph] : adj[static_cast<std::size_t>(x)]) {
                if (!seen[static_cast<std::size_t>(y)]) {
                    seen[static_cast<std::size_t>(y)] = true;
                    ang[static_cast<std::size_t>(y)] = ph - ang[static_cast<std::size_t>(x)];
                    stack.push_back(y);
                }
            }
        }
    }
    double worst = 0.0;
    for (std::size_t m = 0; m < as.size(); ++m) {
        const auto& A = *as[m];
        const auto& B = *bs[m];
        const double scale = std::max(A.cwiseAbs().maxCoeff(), B.cwiseAbs().maxCoeff());
        if (scale == 0.0) {
            continue;
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const cplx rot = std::exp(kI * (ang[static_cast<std::size_t>(i)] + ang[static_cast<std::size_t>(n + j)]));
                worst = std::max(worst, std::abs(B(i, j) - rot * A(i, j)) / scale);
            }
        }
    }
    return worst;
}

}  // namespace

OracleReport oracle_compare(const BlochSystem& a, const BlochSystem& b) {
    if (a.dimension() != b.dimension() || a.S.rows() != b.S.rows()) {
        throw DomainError("oracle_compare: systems have different dimensions");
    }
    OracleReport rep;
    const Eigen::VectorXcd ea = bloch_frequencies(a);
    const Eigen::VectorXcd eb = bloch_frequencies(b);
    for (Eigen::Index i = 0; i < ea.size(); ++i) {
        rep.eig_mismatch = std::max(rep.eig_mismatch, std::abs(ea(i) - eb(i)));
    }
    rep.entry_mismatch_after_phase = phase_aligned_residual({&a.M, &a.S}, {&b.M, &b.S});
    return rep;
}

}  // namespace wavecore
