#pragma once

#include "wavecore/basis1d.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace wavecore {

/// Horizontal/vertical polynomial order of the discontinuous pressure space.
class OrderCase {
public:
    /// Throws DomainError unless h, v are each 0 or 1.
    OrderCase(int h, int v);

    [[nodiscard]] int h() const noexcept { return h_; }
    [[nodiscard]] int v() const noexcept { return v_; }
    [[nodiscard]] int dofs_per_cell() const noexcept { return (h_ + 1) * (v_ + 1); }
    [[nodiscard]] int system_dim() const noexcept { return 4 * dofs_per_cell(); }
    /// "(h,v)" form, e.g. "(1,0)".
    [[nodiscard]] std::string label() const;

    static OrderCase parse(const std::string& text);  // accepts "1,0", "(1,0)", "10"
    static std::array<OrderCase, 4> all();

    friend bool operator==(const OrderCase&, const OrderCase&) = default;

private:
    int h_;
    int v_;
};

enum class Field { U = 0, W = 1, P = 2, B = 3 };
inline constexpr std::array<Field, 4> kFields{Field::U, Field::W, Field::P, Field::B};
const char* field_name(Field f) noexcept;

/// Which cell edge a DoF sits on with continuity across it.
enum class DofTag { Interior, XEdgeShared, ZEdgeShared };

struct LocalNode {
    int hi = 0;  ///< index into the horizontal basis
    int vi = 0;  ///< index into the vertical basis
    double xi = 0.0;
    double eta = 0.0;
    DofTag tag = DofTag::Interior;
    int owned = 0;    ///< owned-DoF index this node maps to
    int shift_x = 0;  ///< 1 when the owning cell is the right neighbour
    int shift_z = 0;  ///< 1 when the owning cell is the upper neighbour
};

struct OwnedDof {
    int id = 0;
    double xi = 0.0;
    double eta = 0.0;
    DofTag tag = DofTag::Interior;
};

/// One tensor-product field space on the reference cell.
struct FieldSpace {
    Field field = Field::P;
    Basis1D horiz;
    Basis1D vert;
    std::vector<LocalNode> nodes;  ///< all cell-local nodes, x-fastest, bottom to top
    std::vector<int> owned;        ///< local node index of each owned DoF
    int unique_dofs_per_cell = 0;

    [[nodiscard]] int local_count() const noexcept { return static_cast<int>(nodes.size()); }
    [[nodiscard]] double value(int node, double xi, double eta) const;
    [[nodiscard]] double dxi(int node, double xi, double eta) const;
    [[nodiscard]] double deta(int node, double xi, double eta) const;
    [[nodiscard]] bool continuous_x() const noexcept { return horiz.continuity == Continuity::Continuous; }
    [[nodiscard]] bool continuous_z() const noexcept { return vert.continuity == Continuity::Continuous; }
};

using CaseSpaces = std::array<FieldSpace, 4>;

inline const FieldSpace& space_of(const CaseSpaces& s, Field f) { return s[static_cast<std::size_t>(f)]; }

/// U: CG_{h+1} x DG_v, W: DG_h x CG_{v+1}, P: DG_h x DG_v, B: same layout as W.
CaseSpaces build_case(const OrderCase& c);

/// Owned DoFs in deterministic order (x-fastest, bottom to top). Shared DoFs
/// are owned by the cell whose left/bottom edge carries them.
std::vector<OwnedDof> dof_numbering(const FieldSpace& fs);

/// Reference-cell integrals for one cell of size dx x dz.
struct ElementMatrices {
    std::array<Eigen::MatrixXd, 4> mass;  ///< per field, local x local
    Eigen::MatrixXd grad_x;               ///< U test x P trial: int p dchi/dx
    Eigen::MatrixXd grad_z;               ///< W test x P trial: int p dnu/dz
    Eigen::MatrixXd coupling_wb;          ///< W test x B trial: int b nu
};

ElementMatrices element_matrices(const CaseSpaces& spaces, double dx, double dz,
                                 int quad_points = kDefaultQuadPoints);

}  // namespace wavecore
