#include "wavecore/experiments.hpp"

#include "wavecore/errors.hpp"
#include "wavecore/parallel.hpp"

#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include <algorithm>

#include <chrono>
#include <cmath>
#include <numbers>

namespace wavecore {

namespace {

int cells_for(double length, double d, const char* what) {
    if (!(d > 0.0)) {
        throw DomainError(fmt::format("{} spacing must be positive", what));
    }
    const auto n = static_cast<int>(std::lround(length / d));
    if (n < 4) {
        throw DomainError(fmt::format("{} spacing {} leaves fewer than 4 cells", what, d));
    }
    return n;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* to_string(ErrorNorm n) noexcept {
    return n == ErrorNorm::ReferenceQuadrature ? "reference-quadrature" : "coarse-projection";
}

ErrorNorm parse_error_norm(const std::string& text) {
    if (text == "reference-quadrature") return ErrorNorm::ReferenceQuadrature;
    if (text == "coarse-projection") return ErrorNorm::CoarseProjection;
    throw DomainError("unknown error norm '" + text + "'");
}

int GravityWaveConfig::nx() const { return cells_for(L, dx, "horizontal"); }
int GravityWaveConfig::nz() const { return cells_for(H, dz, "vertical"); }

int GravityWaveConfig::steps() const { return static_cast<int>(std::lround(t_end / dt)); }

void GravityWaveConfig::validate() const {
    if (!(L > 0.0) || !(H > 0.0) || !(a > 0.0)) {
        throw DomainError("domain size and perturbation width must be positive");
    }
    if (!(dt > 0.0)) {
        throw DomainError("dt must be positive");
    }
    if (!(t_end >= 0.0)) {
        throw DomainError("t_end must be non-negative");
    }
    if (!(alpha >= 0.5 && alpha <= 1.0)) {
        throw DomainError(fmt::format("alpha must lie in [0.5, 1], got {}", alpha));
    }
    if (sample_every < 1) {
        throw DomainError("sample_every must be at least 1");
    }
    params.validate();
    (void)nx();
    (void)nz();
}

GravityWaveConfig GravityWaveConfig::for_case(const OrderCase& c) {
    GravityWaveConfig cfg;
    cfg.order = c;
    cfg.dx = c.h() == 0 ? 1000.0 : 2000.0;
    cfg.dz = c.v() == 0 ? 1000.0 : 2000.0;
    return cfg;
}

double buoyancy_perturbation(const GravityWaveConfig& cfg, double x, double z) {
    const double s = (x - cfg.xc()) / cfg.a;
    return cfg.b0 * std::sin(std::numbers::pi * z / cfg.H) / (1.0 + s * s);
}

double field_mean(const GlobalSystem& sys, const StateVector& s, Field f) {
    const QuadRule q = gauss_rule(3);
    const SliceMesh& m = sys.mesh;
    double sum = 0.0;
    for (int j = 0; j < m.nz; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            for (std::size_t a = 0; a < q.size(); ++a) {
                for (std::size_t b = 0; b < q.size(); ++b) {
                    sum += q.weights[a] * q.weights[b] *
                           evaluate(sys, s, f, (i + q.points[a]) * m.dx, (j + q.points[b]) * m.dz);
                }
            }
        }
    }
    return sum / m.cells();
}

GravityWaveResult run_gravity_wave(const GravityWaveConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const int nx = cfg.nx();
    const int nz = cfg.nz();
    const SliceMesh mesh = make_mesh(nx, nz, cfg.L / nx, cfg.H / nz, cfg.z_boundary);

    GravityWaveResult res;
    auto sys = std::make_shared<GlobalSystem>(assemble_global(cfg.order, mesh, cfg.params, cfg.threads));
    res.system = sys;
    FieldSpec spec;
    spec.f[static_cast<std::size_t>(Field::B)] = [&cfg](double x, double z) {
        return buoyancy_perturbation(cfg, x, z);
    };
    res.initial = project_initial(*sys, spec);
    res.steps = cfg.steps();

    auto record = [&](double t, const StateVector& s) {
        const auto b = s.field(Field::B);
        res.times.push_back(t);
        res.b_min.push_back(b.minCoeff());
        res.b_max.push_back(b.maxCoeff());
        res.energy.push_back(energy(*sys, s.data));
        res.b_mean.push_back(field_mean(*sys, s, Field::B));
    };
    record(0.0, res.initial);
    const double e0 = res.energy.front();

    StateVector x = res.initial;
    if (res.steps > 0) {
        const ThetaScheme scheme(*sys, cfg.alpha, cfg.dt, cfg.solver);
        for (int n = 1; n <= res.steps; ++n) {
            x = scheme.step(x);
            const double e = energy(*sys, x.data);
            const double drift = e0 > 0.0 ? std::abs(e - e0) / e0 : std::abs(e);
            res.max_energy_drift = std::max(res.max_energy_drift, drift);
            if (!std::isfinite(e) || (e0 > 0.0 && e > 1.01 * e0)) {
                throw IntegrityError(fmt::format("energy grew from {:.6e} to {:.6e} by step {} for case {}", e0, e,
                                                 n, cfg.order.label()));
            }
            if (n % cfg.sample_every == 0 || n == res.steps) {
                record(n * cfg.dt, x);
            }
        }
    }
    res.final_state = std::move(x);
    res.wallclock = seconds_since(t0);
    return res;
}

double buoyancy_l2_difference(const GlobalSystem& ref_sys, const StateVector& ref, const GlobalSystem& sys,
                              const StateVector& s, int quad_points) {
    const SliceMesh& rm = ref_sys.mesh;
    const SliceMesh& cm = sys.mesh;
    const double tol = 1e-9 * std::max(rm.length(), rm.height());
    if (std::abs(rm.length() - cm.length()) > tol || std::abs(rm.height() - cm.height()) > tol) {
        throw DomainError(fmt::format("reference domain {}x{} differs from {}x{}", rm.length(), rm.height(),
                                      cm.length(), cm.height()));
    }
    const QuadRule q = gauss_rule(quad_points);
    double sum = 0.0;
    for (int j = 0; j < rm.nz; ++j) {
        for (int i = 0; i < rm.nx; ++i) {
            for (std::size_t a = 0; a < q.size(); ++a) {
                for (std::size_t b = 0; b < q.size(); ++b) {
                    const double x = (i + q.points[a]) * rm.dx;
                    const double z = (j + q.points[b]) * rm.dz;
                    const double d = evaluate(ref_sys, ref, Field::B, x, z) - evaluate(sys, s, Field::B, x, z);
                    sum += q.weights[a] * q.weights[b] * d * d;
                }
            }
        }
    }
    return std::sqrt(sum * rm.dx * rm.dz);
}

namespace {

// Sorted union of two uniform partitions of [0, length].
std::vector<double> merged_breaks(double length, int n1, int n2) {
    std::vector<double> b;
    for (int i = 0; i <= n1; ++i) b.push_back(length * i / n1);
    for (int i = 0; i <= n2; ++i) b.push_back(length * i / n2);
    std::sort(b.begin(), b.end());
    std::vector<double> out;
    for (double v : b) {
        if (out.empty() || v - out.back() > 1e-9 * length) out.push_back(v);
    }
    out.back() = length;
    return out;
}

}  // namespace

double buoyancy_projected_difference(const GlobalSystem& ref_sys, const StateVector& ref, const GlobalSystem& sys,
                                     const StateVector& s, int quad_points) {
    const SliceMesh& rm = ref_sys.mesh;
    const SliceMesh& cm = sys.mesh;
    const double tol = 1e-9 * std::max(rm.length(), rm.height());
    if (std::abs(rm.length() - cm.length()) > tol || std::abs(rm.height() - cm.height()) > tol) {
        throw DomainError(fmt::format("reference domain {}x{} differs from {}x{}", rm.length(), rm.height(),
                                      cm.length(), cm.height()));
    }
    // Both solutions are polynomial on every intersection of a reference cell
    // with a coarse cell, so Gauss rules on the pieces integrate exactly.
    const std::vector<double> xb = merged_breaks(cm.length(), cm.nx, rm.nx);
    const std::vector<double> zb = merged_breaks(cm.height(), cm.nz, rm.nz);
    const QuadRule q = gauss_rule(quad_points);
    const CaseSpaces spaces = build_case(sys.order);
    const FieldSpace& fs = space_of(spaces, Field::B);
    const FieldMap& fm = sys.map.field(Field::B);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(fm.size());
    for (std::size_t jz = 0; jz + 1 < zb.size(); ++jz) {
        const double z0 = zb[jz];
        const double hz = zb[jz + 1] - z0;
        const int j = std::min(static_cast<int>((z0 + 0.5 * hz) / cm.dz), cm.nz - 1);
        for (std::size_t ix = 0; ix + 1 < xb.size(); ++ix) {
            const double x0 = xb[ix];
            const double hx = xb[ix + 1] - x0;
            const int i = std::min(static_cast<int>((x0 + 0.5 * hx) / cm.dx), cm.nx - 1);
            const int cell = j * cm.nx + i;
            for (std::size_t a = 0; a < q.size(); ++a) {
                for (std::size_t b = 0; b < q.size(); ++b) {
                    const double x = x0 + q.points[a] * hx;
                    const double z = z0 + q.points[b] * hz;
                    const double w = q.weights[a] * q.weights[b] * hx * hz * evaluate(ref_sys, ref, Field::B, x, z);
                    const double xi = x / cm.dx - i;
                    const double eta = z / cm.dz - j;
                    for (int n = 0; n < fm.local_count; ++n) {
                        const int g = fm.global(cell, n);
                        if (g >= 0) rhs(g) += w * fs.value(n, xi, eta);
                    }
                }
            }
        }
    }
    const auto o = sys.map.offsets()[static_cast<std::size_t>(Field::B)];
    const Eigen::SparseMatrix<double> mb = sys.M.block(o, o, fm.size(), fm.size());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(mb);
    const Eigen::VectorXd d = ldlt.solve(rhs) - s.field(Field::B);
    return std::sqrt(std::max(0.0, d.dot(mb * d)));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw DomainError("loglog_slope needs at least two paired samples");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw DomainError("loglog_slope needs positive samples");
        }
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(x.size());
    const double den = n * sxx - sx * sx;
    if (den == 0.0) {
        throw DomainError("loglog_slope: all x values coincide");
    }
    return (n * sxy - sx * sy) / den;
}

ConvergenceConfig ConvergenceConfig::desk() {
    ConvergenceConfig cfg;
    cfg.dx_list = {450, 600, 750, 900};
    cfg.reference_dx = 240.0;
    return cfg;
}

ConvergenceResult run_convergence(const OrderCase& c, const ConvergenceConfig& cfg,
                                  const GravityWaveResult* reference) {
    if (cfg.dx_list.size() < 2) {
        throw DomainError("convergence sweep needs at least two resolutions");
    }
    auto member = [&](double dx) {
        GravityWaveConfig g = cfg.base;
        g.order = c;
        g.dx = dx;
        g.dz = cfg.dz;
        g.threads = 1;
        g.sample_every = std::max(1, g.steps());
        return g;
    };

    ConvergenceResult out;
    out.order = c;
    GravityWaveResult local_ref;
    if (reference == nullptr) {
        local_ref = run_gravity_wave(member(cfg.reference_dx));
        reference = &local_ref;
    }
    out.reference_dx = reference->system->mesh.dx;
    out.reference_wallclock = reference->wallclock;

    out.points.resize(cfg.dx_list.size());
    parallel_for(cfg.dx_list.size(), cfg.base.threads, [&](std::size_t i) {
        const GravityWaveConfig g = member(cfg.dx_list[i]);
        const GravityWaveResult r = run_gravity_wave(g);
        auto& p = out.points[i];
        p.nx = g.nx();
        p.dx = r.system->mesh.dx;
        p.errors[static_cast<std::size_t>(ErrorNorm::ReferenceQuadrature)] = buoyancy_l2_difference(
            *reference->system, reference->final_state, *r.system, r.final_state, cfg.error_quad_points);
        p.errors[static_cast<std::size_t>(ErrorNorm::CoarseProjection)] = buoyancy_projected_difference(
            *reference->system, reference->final_state, *r.system, r.final_state, cfg.error_quad_points);
        p.error = p.errors[static_cast<std::size_t>(cfg.norm)];
        p.wallclock = r.wallclock;
    });

    std::vector<double> xs;
    for (const auto& p : out.points) {
        xs.push_back(p.dx);
    }
    for (std::size_t n = 0; n < out.slopes.size(); ++n) {
        std::vector<double> ys;
        for (const auto& p : out.points) {
            ys.push_back(p.errors[n]);
        }
        out.slopes[n] = loglog_slope(xs, ys);
    }
    out.slope = out.slopes[static_cast<std::size_t>(cfg.norm)];
    return out;
}

}  // namespace wavecore
