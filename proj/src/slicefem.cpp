#include "wavecore/slicefem.hpp"

#include "wavecore/errors.hpp"
#include "wavecore/parallel.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

namespace wavecore {

const char* to_string(ZBoundary b) noexcept { return b == ZBoundary::Periodic ? "periodic" : "rigid-lid"; }

SliceMesh make_mesh(int nx, int nz, double dx, double dz, ZBoundary zb) {
    if (nx < 4 || nz < 4) {
        throw DomainError(fmt::format("mesh needs at least 4x4 cells, got {}x{}", nx, nz));
    }
    if (!(dx > 0.0) || !(dz > 0.0) || !std::isfinite(dx) || !std::isfinite(dz)) {
        throw DomainError("mesh cell sizes must be positive and finite");
    }
    SliceMesh m;
    m.nx = nx;
    m.nz = nz;
    m.dx = dx;
    m.dz = dz;
    m.z_boundary = zb;
    return m;
}

std::array<Eigen::Index, 5> DofMap::offsets() const {
    std::array<Eigen::Index, 5> off{};
    for (std::size_t f = 0; f < 4; ++f) {
        off[f + 1] = off[f] + fields[f].size();
    }
    return off;
}

namespace {

FieldMap build_field_map(const FieldSpace& fs, const SliceMesh& mesh) {
    const int nown = fs.unique_dofs_per_cell;
    const bool lid = mesh.z_boundary == ZBoundary::RigidLid && fs.continuous_z();

    // Owned DoFs on the bottom edge; under a lid they get an extra top layer.
    std::vector<int> edge_slot(static_cast<std::size_t>(nown), -1);
    int n_edge = 0;
    for (int o = 0; o < nown; ++o) {
        if (fs.nodes[static_cast<std::size_t>(fs.owned[static_cast<std::size_t>(o)])].tag == DofTag::ZEdgeShared) {
            edge_slot[static_cast<std::size_t>(o)] = n_edge++;
        }
    }
    const int bulk = mesh.cells() * nown;
    const int raw_count = bulk + (lid ? mesh.nx * n_edge : 0);

    std::vector<double> raw_x(static_cast<std::size_t>(raw_count));
    std::vector<double> raw_z(static_cast<std::size_t>(raw_count));
    std::vector<char> constrained(static_cast<std::size_t>(raw_count), 0);
    auto raw_id = [&](int i, int j, int o) {
        if (j == mesh.nz) {
            return bulk + i * n_edge + edge_slot[static_cast<std::size_t>(o)];
        }
        return (j * mesh.nx + i) * nown + o;
    };
    const int top = lid ? mesh.nz : mesh.nz - 1;
    for (int j = 0; j <= top; ++j) {
        for (int i = 0; i < mesh.nx; ++i) {
            for (int o = 0; o < nown; ++o) {
                if (j == mesh.nz && edge_slot[static_cast<std::size_t>(o)] < 0) {
                    continue;
                }
                const auto& n = fs.nodes[static_cast<std::size_t>(fs.owned[static_cast<std::size_t>(o)])];
                const auto r = static_cast<std::size_t>(raw_id(i, j, o));
                raw_x[r] = (i + n.xi) * mesh.dx;
                raw_z[r] = (j + n.eta) * mesh.dz;
                if (lid && fs.field == Field::W && n.tag == DofTag::ZEdgeShared && (j == 0 || j == mesh.nz)) {
                    constrained[r] = 1;
                }
            }
        }
    }

    FieldMap fm;
    fm.local_count = fs.local_count();
    fm.raw_count = raw_count;
    std::vector<int> compact(static_cast<std::size_t>(raw_count), -1);
    for (int r = 0; r < raw_count; ++r) {
        if (constrained[static_cast<std::size_t>(r)]) {
            fm.constrained_raw.push_back(r);
            continue;
        }
        compact[static_cast<std::size_t>(r)] = fm.size();
        fm.x.push_back(raw_x[static_cast<std::size_t>(r)]);
        fm.z.push_back(raw_z[static_cast<std::size_t>(r)]);
    }

    fm.cell_local.resize(static_cast<std::size_t>(mesh.cells() * fm.local_count));
    for (int j = 0; j < mesh.nz; ++j) {
        for (int i = 0; i < mesh.nx; ++i) {
            const int cell = j * mesh.nx + i;
            for (int a = 0; a < fm.local_count; ++a) {
                const auto& n = fs.nodes[static_cast<std::size_t>(a)];
                const int oi = (i + n.shift_x) % mesh.nx;
                int oj = j + n.shift_z;
                if (oj == mesh.nz && !lid) {
                    oj = 0;
                }
                fm.cell_local[static_cast<std::size_t>(cell * fm.local_count + a)] =
                    compact[static_cast<std::size_t>(raw_id(oi, oj, n.owned))];
            }
        }
    }
    return fm;
}

}  // namespace

DofMap build_dofmap(const OrderCase& c, const SliceMesh& mesh) {
    const CaseSpaces spaces = build_case(c);
    DofMap map;
    map.order = c;
    for (Field f : kFields) {
        map.fields[static_cast<std::size_t>(f)] = build_field_map(space_of(spaces, f), mesh);
    }
    return map;
}

StateVector::StateVector(const DofMap& map) : data(Eigen::VectorXd::Zero(map.total())), offsets(map.offsets()) {}

GlobalSystem assemble_global(const OrderCase& c, const SliceMesh& mesh, const PhysParams& p, int threads,
                             int quad_points) {
    p.validate();
    GlobalSystem sys;
    sys.order = c;
    sys.mesh = mesh;
    sys.params = p;
    sys.map = build_dofmap(c, mesh);

    const CaseSpaces spaces = build_case(c);
    const ElementMatrices em = element_matrices(spaces, mesh.dx, mesh.dz, quad_points);
    const auto off = sys.map.offsets();
    const double c2 = p.cs * p.cs;
    const double n2 = p.N * p.N;

    using Triplet = Eigen::Triplet<double>;
    const int workers = std::max(1, std::min(resolve_threads(threads), mesh.cells()));
    std::vector<std::vector<Triplet>> mass_buf(static_cast<std::size_t>(workers));
    std::vector<std::vector<Triplet>> coup_buf(static_cast<std::size_t>(workers));

    parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t t) {
        const int begin = static_cast<int>(t) * mesh.cells() / workers;
        const int end = static_cast<int>(t + 1) * mesh.cells() / workers;
        auto& mt = mass_buf[t];
        auto& st = coup_buf[t];
        std::array<std::vector<int>, 4> g;
        for (int cell = begin; cell < end; ++cell) {
            for (Field f : kFields) {
                const auto& fm = sys.map.field(f);
                auto& gf = g[static_cast<std::size_t>(f)];
                gf.resize(static_cast<std::size_t>(fm.local_count));
                for (int a = 0; a < fm.local_count; ++a) {
                    gf[static_cast<std::size_t>(a)] = fm.global(cell, a);
                }
            }
            for (Field f : kFields) {
                const auto fi = static_cast<std::size_t>(f);
                const auto& m = em.mass[fi];
                for (Eigen::Index a = 0; a < m.rows(); ++a) {
                    const int ga = g[fi][static_cast<std::size_t>(a)];
                    if (ga < 0) continue;
                    for (Eigen::Index b = 0; b < m.cols(); ++b) {
                        const int gb = g[fi][static_cast<std::size_t>(b)];
                        if (gb < 0 || m(a, b) == 0.0) continue;
                        mt.emplace_back(off[fi] + ga, off[fi] + gb, m(a, b));
                    }
                }
            }
            // (test field, trial field, matrix, forward scale, transposed block scale)
            auto couple = [&](Field tf, Field rf, const Eigen::MatrixXd& A, double fwd, double back) {
                const auto ti = static_cast<std::size_t>(tf);
                const auto ri = static_cast<std::size_t>(rf);
                for (Eigen::Index a = 0; a < A.rows(); ++a) {
                    const int ga = g[ti][static_cast<std::size_t>(a)];
                    if (ga < 0) continue;
                    for (Eigen::Index b = 0; b < A.cols(); ++b) {
                        const int gb = g[ri][static_cast<std::size_t>(b)];
                        if (gb < 0 || A(a, b) == 0.0) continue;
                        st.emplace_back(off[ti] + ga, off[ri] + gb, fwd * A(a, b));
                        st.emplace_back(off[ri] + gb, off[ti] + ga, back * A(a, b));
                    }
                }
            };
            couple(Field::U, Field::P, em.grad_x, 1.0, -c2);
            couple(Field::W, Field::P, em.grad_z, 1.0, -c2);
            couple(Field::W, Field::B, em.coupling_wb, 1.0, -n2);
        }
    });

    std::vector<Triplet> mass;
    std::vector<Triplet> coup;
    for (int t = 0; t < workers; ++t) {
        mass.insert(mass.end(), mass_buf[static_cast<std::size_t>(t)].begin(),
                    mass_buf[static_cast<std::size_t>(t)].end());
        coup.insert(coup.end(), coup_buf[static_cast<std::size_t>(t)].begin(),
                    coup_buf[static_cast<std::size_t>(t)].end());
    }
    const Eigen::Index n = off[4];
    sys.M.resize(n, n);
    sys.M.setFromTriplets(mass.begin(), mass.end());
    sys.Sp.resize(n, n);
    sys.Sp.setFromTriplets(coup.begin(), coup.end());
    sys.M.makeCompressed();
    sys.Sp.makeCompressed();
    return sys;
}

Eigen::VectorXd energy_weights(const GlobalSystem& sys) {
    const auto off = sys.map.offsets();
    Eigen::VectorXd w = Eigen::VectorXd::Ones(off[4]);
    const double c2 = sys.params.cs * sys.params.cs;
    const double n2 = sys.params.N * sys.params.N;
    w.segment(off[2], off[3] - off[2]).setConstant(1.0 / c2);
    w.segment(off[3], off[4] - off[3]).setConstant(n2 > 0.0 ? 1.0 / n2 : 0.0);
    return w;
}

double energy(const GlobalSystem& sys, const Eigen::VectorXd& x) {
    const Eigen::VectorXd mx = sys.M * x;
    return 0.5 * x.cwiseProduct(energy_weights(sys)).dot(mx);
}

StateVector project_initial(const GlobalSystem& sys, const FieldSpec& spec, int quad_points) {
    StateVector s(sys.map);
    const CaseSpaces spaces = build_case(sys.order);
    const QuadRule q = gauss_rule(quad_points);
    const SliceMesh& mesh = sys.mesh;
    const double jac = mesh.dx * mesh.dz;

    for (Field f : kFields) {
        const auto fi = static_cast<std::size_t>(f);
        if (!spec.f[fi]) {
            continue;
        }
        const auto& fs = space_of(spaces, f);
        const auto& fm = sys.map.field(f);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(fm.size());
        for (int j = 0; j < mesh.nz; ++j) {
            for (int i = 0; i < mesh.nx; ++i) {
                const int cell = j * mesh.nx + i;
                for (std::size_t qi = 0; qi < q.size(); ++qi) {
                    for (std::size_t qj = 0; qj < q.size(); ++qj) {
                        const double xi = q.points[qi];
                        const double eta = q.points[qj];
                        const double val = spec.f[fi]((i + xi) * mesh.dx, (j + eta) * mesh.dz);
                        const double w = q.weights[qi] * q.weights[qj] * jac * val;
                        for (int a = 0; a < fm.local_count; ++a) {
                            const int g = fm.global(cell, a);
                            if (g >= 0) {
                                rhs(g) += w * fs.value(a, xi, eta);
                            }
                        }
                    }
                }
            }
        }
        const Eigen::Index o = s.offsets[fi];
        const Eigen::SparseMatrix<double> mf = sys.M.block(o, o, fm.size(), fm.size());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mf);
        if (ldlt.info() != Eigen::Success) {
            throw NumericalError(fmt::format("{} mass matrix factorisation failed", field_name(f)));
        }
        s.field(f) = ldlt.solve(rhs);
    }
    return s;
}

double evaluate(const GlobalSystem& sys, const StateVector& s, Field f, double x, double z) {
    const SliceMesh& mesh = sys.mesh;
    const double L = mesh.length();
    double xm = std::fmod(x, L);
    if (xm < 0.0) {
        xm += L;
    }
    const double zc = std::clamp(z, 0.0, mesh.height());
    const int i = std::min(static_cast<int>(std::floor(xm / mesh.dx)), mesh.nx - 1);
    const int j = std::min(static_cast<int>(std::floor(zc / mesh.dz)), mesh.nz - 1);
    const double xi = xm / mesh.dx - i;
    const double eta = zc / mesh.dz - j;

    thread_local std::optional<std::pair<OrderCase, CaseSpaces>> cache;
    if (!cache || !(cache->first == sys.order)) {
        cache.emplace(sys.order, build_case(sys.order));
    }
    const auto& fs = space_of(cache->second, f);
    const auto& fm = sys.map.field(f);
    const auto coef = s.field(f);
    const int cell = j * mesh.nx + i;
    double out = 0.0;
    for (int a = 0; a < fm.local_count; ++a) {
        const int g = fm.global(cell, a);
        if (g >= 0) {
            out += coef(g) * fs.value(a, xi, eta);
        }
    }
    return out;
}

Eigen::VectorXcd sample_bloch_mode(const GlobalSystem& sys, const Eigen::VectorXcd& x_hat, double k, double l) {
    if (sys.mesh.z_boundary != ZBoundary::Periodic) {
        throw DomainError("sample_bloch_mode needs a doubly periodic mesh");
    }
    const int nb = sys.order.dofs_per_cell();
    if (x_hat.size() != 4 * nb) {
        throw DomainError("sample_bloch_mode: Bloch vector has the wrong size");
    }
    const auto off = sys.map.offsets();
    Eigen::VectorXcd q(off[4]);
    const std::complex<double> I(0.0, 1.0);
    for (Field f : kFields) {
        const auto fi = static_cast<std::size_t>(f);
        const auto& fm = sys.map.field(f);
        for (int g = 0; g < fm.size(); ++g) {
            const int o = g % nb;
            q(off[fi] + g) = x_hat(static_cast<Eigen::Index>(fi) * nb + o) *
                             std::exp(I * (k * fm.x[static_cast<std::size_t>(g)] + l * fm.z[static_cast<std::size_t>(g)]));
        }
    }
    return q;
}

namespace {

constexpr char kMagic[8] = {'W', 'V', 'C', 'S', 'N', 'A', 'P', '\0'};

template <class T>
void put_le(std::string& buf, T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
    }
}

template <class T>
T get_le(const std::string& buf, std::size_t& pos) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    if (pos + sizeof(U) > buf.size()) {
        throw IntegrityError("snapshot truncated");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        bits |= static_cast<U>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    }
    pos += sizeof(U);
    return std::bit_cast<T>(bits);
}

}  // namespace

void write_snapshot_binary(const std::string& path, const GlobalSystem& sys, const StateVector& s, double time) {
    std::string buf(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(buf, 1);
    put_le<std::int32_t>(buf, sys.order.h());
    put_le<std::int32_t>(buf, sys.order.v());
    put_le<std::int32_t>(buf, sys.mesh.nx);
    put_le<std::int32_t>(buf, sys.mesh.nz);
    put_le<double>(buf, sys.mesh.dx);
    put_le<double>(buf, sys.mesh.dz);
    put_le<double>(buf, time);
    for (Field f : kFields) {
        const auto seg = s.field(f);
        put_le<std::uint64_t>(buf, static_cast<std::uint64_t>(seg.size()));
        for (Eigen::Index i = 0; i < seg.size(); ++i) {
            put_le<double>(buf, seg(i));
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IntegrityError("cannot open " + path + " for writing");
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

Snapshot read_snapshot_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IntegrityError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();
    if (buf.size() < sizeof(kMagic) || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw IntegrityError(path + " is not a snapshot file");
    }
    std::size_t pos = sizeof(kMagic);
    if (get_le<std::uint32_t>(buf, pos) != 1) {
        throw IntegrityError(path + ": unsupported snapshot schema");
    }
    Snapshot snap;
    snap.header.h = get_le<std::int32_t>(buf, pos);
    snap.header.v = get_le<std::int32_t>(buf, pos);
    snap.header.nx = get_le<std::int32_t>(buf, pos);
    snap.header.nz = get_le<std::int32_t>(buf, pos);
    snap.header.dx = get_le<double>(buf, pos);
    snap.header.dz = get_le<double>(buf, pos);
    snap.header.time = get_le<double>(buf, pos);
    for (auto& field : snap.fields) {
        const auto n = get_le<std::uint64_t>(buf, pos);
        if (n > (buf.size() - pos) / 8) {
            throw IntegrityError(path + ": field length exceeds file size");
        }
        field.resize(static_cast<std::size_t>(n));
        for (auto& v : field) {
            v = get_le<double>(buf, pos);
        }
    }
    if (pos != buf.size()) {
        throw IntegrityError(path + ": trailing bytes after snapshot payload");
    }
    return snap;
}

void write_snapshot_csv(const std::string& path, const GlobalSystem& sys, const StateVector& s, double time,
                        const std::vector<std::string>& metadata) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IntegrityError("cannot open " + path + " for writing");
    }
    for (const auto& line : metadata) {
        out << "# " << line << '\n';
    }
    const SliceMesh& m = sys.mesh;
    out << fmt::format("# case={} nx={} nz={} dx={} dz={} time={}\n", sys.order.label(), m.nx, m.nz, m.dx, m.dz,
                       time);
    out << "i,j,x,z,u,w,p,b\n";
    for (int j = 0; j < m.nz; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            const double x = (i + 0.5) * m.dx;
            const double z = (j + 0.5) * m.dz;
            out << fmt::format("{},{},{},{},{},{},{},{}\n", i, j, x, z, evaluate(sys, s, Field::U, x, z),
                               evaluate(sys, s, Field::W, x, z), evaluate(sys, s, Field::P, x, z),
                               evaluate(sys, s, Field::B, x, z));
        }
    }
}

}  // namespace wavecore
