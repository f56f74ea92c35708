#pragma once

#include "wavecore/bloch.hpp"
#include "wavecore/fespace.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace wavecore {

enum class ZBoundary { Periodic, RigidLid };

const char* to_string(ZBoundary b) noexcept;

/// Structured vertical slice [0, nx dx] x [0, nz dz], periodic in x.
struct SliceMesh {
    int nx = 4;
    int nz = 4;
    double dx = 1.0;
    double dz = 1.0;
    bool x_periodic = true;
    ZBoundary z_boundary = ZBoundary::Periodic;

    [[nodiscard]] double length() const noexcept { return nx * dx; }
    [[nodiscard]] double height() const noexcept { return nz * dz; }
    [[nodiscard]] int cells() const noexcept { return nx * nz; }
};

/// Global numbering of one field.
struct FieldMap {
    int local_count = 0;
    std::vector<int> cell_local;  ///< cell * local_count + local node -> global id, -1 if constrained
    std::vector<double> x;        ///< physical position of each global DoF
    std::vector<double> z;
    std::vector<int> constrained_raw;  ///< raw ids removed by the rigid lid
    int raw_count = 0;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(x.size()); }
    [[nodiscard]] int global(int cell, int local) const {
        return cell_local[static_cast<std::size_t>(cell * local_count + local)];
    }
};

struct DofMap {
    OrderCase order{0, 0};
    std::array<FieldMap, 4> fields;

    [[nodiscard]] const FieldMap& field(Field f) const { return fields[static_cast<std::size_t>(f)]; }
    [[nodiscard]] int count(Field f) const { return field(f).size(); }
    /// Offset of each field in the stacked [u, w, p, b] vector; offsets[4] is the total.
    [[nodiscard]] std::array<Eigen::Index, 5> offsets() const;
    [[nodiscard]] Eigen::Index total() const { return offsets()[4]; }
};

/// Throws DomainError for counts below 4 or non-positive sizes.
SliceMesh make_mesh(int nx, int nz, double dx, double dz, ZBoundary zb = ZBoundary::Periodic);

/// Global numbering is cell-major with cells x-fastest, owned DoFs in local
/// order within each cell. Under RigidLid the W and B fields gain a top layer
/// of edge DoFs; W's top and bottom layers are then eliminated.
DofMap build_dofmap(const OrderCase& c, const SliceMesh& mesh);

/// Stacked coefficients [u, w, p, b].
struct StateVector {
    Eigen::VectorXd data;
    std::array<Eigen::Index, 5> offsets{};

    StateVector() = default;
    explicit StateVector(const DofMap& map);

    [[nodiscard]] Eigen::Index size(Field f) const {
        return offsets[static_cast<std::size_t>(f) + 1] - offsets[static_cast<std::size_t>(f)];
    }
    [[nodiscard]] auto field(Field f) { return data.segment(offsets[static_cast<std::size_t>(f)], size(f)); }
    [[nodiscard]] auto field(Field f) const {
        return data.segment(offsets[static_cast<std::size_t>(f)], size(f));
    }
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// M dx/dt = Sp x, where Sp is the right-hand-side operator:
///   u: Gx p,  w: Gz p + Q b,  p: -cs^2 (Gx^T u + Gz^T w),  b: -N^2 Q^T w.
/// The Bloch matrix S corresponds to -Sp.
struct GlobalSystem {
    OrderCase order{0, 0};
    SliceMesh mesh;
    PhysParams params;
    DofMap map;
    SparseMatrix M;
    SparseMatrix Sp;

    [[nodiscard]] Eigen::Index dimension() const noexcept { return M.rows(); }
};

GlobalSystem assemble_global(const OrderCase& c, const SliceMesh& mesh, const PhysParams& p, int threads = 0,
                             int quad_points = kDefaultQuadPoints);

/// Weight of each component in the energy 1/2 x^T diag(1, 1, 1/cs^2, 1/N^2) M x.
/// The buoyancy weight is 0 when N = 0.
Eigen::VectorXd energy_weights(const GlobalSystem& sys);
double energy(const GlobalSystem& sys, const Eigen::VectorXd& x);

using FieldFunction = std::function<double(double x, double z)>;

/// Initial data per field; an empty function means zero.
struct FieldSpec {
    std::array<FieldFunction, 4> f;
};

/// L2 projection of each field onto its finite-element space.
StateVector project_initial(const GlobalSystem& sys, const FieldSpec& spec,
                            int quad_points = kDefaultQuadPoints + 2);

/// Value of a finite-element field at a physical point. Points on a cell edge
/// belong to the cell on their right/top; x wraps periodically.
double evaluate(const GlobalSystem& sys, const StateVector& s, Field f, double x, double z);

/// Sample a Bloch eigenvector on the mesh: q_g = x_hat[owned(g)] exp(i (k x_g + l z_g)).
/// Requires a mesh that is periodic in both directions.
Eigen::VectorXcd sample_bloch_mode(const GlobalSystem& sys, const Eigen::VectorXcd& x_hat, double k, double l);

struct SnapshotHeader {
    int h = 0;
    int v = 0;
    int nx = 0;
    int nz = 0;
    double dx = 0.0;
    double dz = 0.0;
    double time = 0.0;
};

struct Snapshot {
    SnapshotHeader header;
    std::array<std::vector<double>, 4> fields;
};

/// Binary layout, all little-endian: "WVCSNAP\0", u32 schema (1), i32 h, v, nx, nz,
/// f64 dx, dz, time, then for u, w, p, b: u64 count followed by count f64 values.
void write_snapshot_binary(const std::string& path, const GlobalSystem& sys, const StateVector& s, double time);
Snapshot read_snapshot_binary(const std::string& path);

/// Cell-centre samples "i,j,x,z,u,w,p,b" preceded by a '#' metadata block.
void write_snapshot_csv(const std::string& path, const GlobalSystem& sys, const StateVector& s, double time,
                        const std::vector<std::string>& metadata = {});

}  // namespace wavecore
