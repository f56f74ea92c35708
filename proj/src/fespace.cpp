#include "wavecore/fespace.hpp"

#include "wavecore/errors.hpp"

#include <algorithm>
#include <cctype>

namespace wavecore {

OrderCase::OrderCase(int h, int v) : h_(h), v_(v) {
    if ((h != 0 && h != 1) || (v != 0 && v != 1)) {
        throw DomainError("order case (" + std::to_string(h) + "," + std::to_string(v) +
                          ") is not one of (0,0), (0,1), (1,0), (1,1)");
    }
}

std::string OrderCase::label() const {
    return "(" + std::to_string(h_) + "," + std::to_string(v_) + ")";
}

OrderCase OrderCase::parse(const std::string& text) {
    std::string digits;
    for (char ch : text) {
        if (std::isdigit(static_cast<unsigned char>(ch)) != 0) {
            digits.push_back(ch);
        } else if (ch != ',' && ch != '(' && ch != ')' && ch != ' ') {
            throw DomainError("cannot parse order case '" + text + "'");
        }
    }
    if (digits.size() != 2) {
        throw DomainError("cannot parse order case '" + text + "'");
    }
    return {digits[0] - '0', digits[1] - '0'};
}

std::array<OrderCase, 4> OrderCase::all() {
    return {OrderCase{0, 0}, OrderCase{0, 1}, OrderCase{1, 0}, OrderCase{1, 1}};
}

const char* field_name(Field f) noexcept {
    switch (f) {
        case Field::U: return "u";
        case Field::W: return "w";
        case Field::P: return "p";
        case Field::B: return "b";
    }
    return "?";
}

double FieldSpace::value(int node, double xi, double eta) const {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    return eval_basis(horiz, n.hi, xi) * eval_basis(vert, n.vi, eta);
}

double FieldSpace::dxi(int node, double xi, double eta) const {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    return eval_basis_deriv(horiz, n.hi, xi) * eval_basis(vert, n.vi, eta);
}

double FieldSpace::deta(int node, double xi, double eta) const {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    return eval_basis(horiz, n.hi, xi) * eval_basis_deriv(vert, n.vi, eta);
}

namespace {

Basis1D continuous(int order) {
    return {order == 0 ? BasisKind::LinearF : BasisKind::QuadraticE, Continuity::Continuous};
}

Basis1D discontinuous(int order) {
    return {order == 0 ? BasisKind::ConstantG : BasisKind::LinearF, Continuity::Discontinuous};
}

FieldSpace make_space(Field f, Basis1D horiz, Basis1D vert) {
    FieldSpace fs;
    fs.field = f;
    fs.horiz = horiz;
    fs.vert = vert;
    const auto hn = horiz.nodes();
    const auto vn = vert.nodes();

    // Owned nodes: everything except the far (right/top) edge in a continuous direction.
    auto is_far = [&](double xi, double eta) {
        return (fs.continuous_x() && xi == 1.0) || (fs.continuous_z() && eta == 1.0);
    };
    for (int j = 0; j < vert.node_count(); ++j) {
        for (int i = 0; i < horiz.node_count(); ++i) {
            LocalNode n;
            n.hi = i;
            n.vi = j;
            n.xi = hn[static_cast<std::size_t>(i)];
            n.eta = vn[static_cast<std::size_t>(j)];
            if (fs.continuous_x() && (n.xi == 0.0 || n.xi == 1.0)) {
                n.tag = DofTag::XEdgeShared;
            } else if (fs.continuous_z() && (n.eta == 0.0 || n.eta == 1.0)) {
                n.tag = DofTag::ZEdgeShared;
            }
            fs.nodes.push_back(n);
        }
    }
    for (int a = 0; a < fs.local_count(); ++a) {
        const auto& n = fs.nodes[static_cast<std::size_t>(a)];
        if (!is_far(n.xi, n.eta)) {
            fs.owned.push_back(a);
        }
    }
    for (auto& n : fs.nodes) {
        double oxi = n.xi;
        double oeta = n.eta;
        if (fs.continuous_x() && n.xi == 1.0) {
            oxi = 0.0;
            n.shift_x = 1;
        }
        if (fs.continuous_z() && n.eta == 1.0) {
            oeta = 0.0;
            n.shift_z = 1;
        }
        const auto it = std::find_if(fs.owned.begin(), fs.owned.end(), [&](int a) {
            const auto& m = fs.nodes[static_cast<std::size_t>(a)];
            return m.xi == oxi && m.eta == oeta;
        });
        n.owned = static_cast<int>(it - fs.owned.begin());
    }
    fs.unique_dofs_per_cell = static_cast<int>(fs.owned.size());
    return fs;
}

}  // namespace

CaseSpaces build_case(const OrderCase& c) {
    return {
        make_space(Field::U, continuous(c.h()), discontinuous(c.v())),
        make_space(Field::W, discontinuous(c.h()), continuous(c.v())),
        make_space(Field::P, discontinuous(c.h()), discontinuous(c.v())),
        make_space(Field::B, discontinuous(c.h()), continuous(c.v())),
    };
}

std::vector<OwnedDof> dof_numbering(const FieldSpace& fs) {
    std::vector<OwnedDof> out;
    out.reserve(fs.owned.size());
    for (std::size_t id = 0; id < fs.owned.size(); ++id) {
        const auto& n = fs.nodes[static_cast<std::size_t>(fs.owned[id])];
        out.push_back({static_cast<int>(id), n.xi, n.eta, n.tag});
    }
    return out;
}

ElementMatrices element_matrices(const CaseSpaces& spaces, double dx, double dz, int quad_points) {
    const QuadRule q = gauss_rule(quad_points);
    const double jac = dx * dz;
    const auto& U = space_of(spaces, Field::U);
    const auto& W = space_of(spaces, Field::W);
    const auto& P = space_of(spaces, Field::P);
    const auto& B = space_of(spaces, Field::B);

    ElementMatrices em;
    for (Field f : kFields) {
        const int n = space_of(spaces, f).local_count();
        em.mass[static_cast<std::size_t>(f)] = Eigen::MatrixXd::Zero(n, n);
    }
    em.grad_x = Eigen::MatrixXd::Zero(U.local_count(), P.local_count());
    em.grad_z = Eigen::MatrixXd::Zero(W.local_count(), P.local_count());
    em.coupling_wb = Eigen::MatrixXd::Zero(W.local_count(), B.local_count());

    for (std::size_t qi = 0; qi < q.size(); ++qi) {
        for (std::size_t qj = 0; qj < q.size(); ++qj) {
            const double xi = q.points[qi];
            const double eta = q.points[qj];
            const double w = q.weights[qi] * q.weights[qj] * jac;
            for (Field f : kFields) {
                const auto& fs = space_of(spaces, f);
                auto& m = em.mass[static_cast<std::size_t>(f)];
                for (int a = 0; a < fs.local_count(); ++a) {
                    const double va = fs.value(a, xi, eta);
                    for (int b = 0; b < fs.local_count(); ++b) {
                        m(a, b) += w * va * fs.value(b, xi, eta);
                    }
                }
            }
            for (int a = 0; a < U.local_count(); ++a) {
                const double d = U.dxi(a, xi, eta) / dx;
                for (int b = 0; b < P.local_count(); ++b) {
                    em.grad_x(a, b) += w * d * P.value(b, xi, eta);
                }
            }
            for (int a = 0; a < W.local_count(); ++a) {
                const double d = W.deta(a, xi, eta) / dz;
                const double va = W.value(a, xi, eta);
                for (int b = 0; b < P.local_count(); ++b) {
                    em.grad_z(a, b) += w * d * P.value(b, xi, eta);
                }
                for (int b = 0; b < B.local_count(); ++b) {
                    em.coupling_wb(a, b) += w * va * B.value(b, xi, eta);
                }
            }
        }
    }
    return em;
}

}  // namespace wavecore
