#include "wavecore/dispersion.hpp"

#include "wavecore/errors.hpp"
#include "wavecore/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>
#include <numbers>
#include <sstream>

namespace wavecore {

AnalyticModes analytic_omega(double k, double l, const PhysParams& p) {
    const double c2 = p.cs * p.cs;
    const double n2 = p.N * p.N;
    const double a = n2 + (k * k + l * l) * c2;
    const double prod = k * k * n2 * c2;
    const double disc = std::sqrt(std::max(0.0, a * a - 4.0 * prod));
    const double plus2 = 0.5 * (a + disc);
    // Product of roots is k^2 N^2 cs^2; avoids cancellation in (a - disc).
    const double minus2 = plus2 > 0.0 ? prod / plus2 : 0.0;
    return {std::sqrt(plus2), std::sqrt(minus2)};
}

std::vector<double> discrete_omega(const OrderCase& c, double k, double l, double dx, double dz,
                                   const PhysParams& p) {
    const BlochSystem sys = assemble_bloch(c, k, l, dx, dz, p);
    const Eigen::VectorXcd ev = bloch_frequencies(sys);
    double max_re = 0.0;
    double max_im = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        max_re = std::max(max_re, std::abs(ev(i).real()));
        max_im = std::max(max_im, std::abs(ev(i).imag()));
    }
    if (max_im > 1e-6 * max_re) {
        std::ostringstream os;
        os << "complex discrete frequency for case " << c.label() << " at k=" << k << " l=" << l
           << ": |Im| = " << max_im << ", max |Re| = " << max_re;
        throw IntegrityError(os.str());
    }
    // Spectrum is symmetric under negation; keep the upper half.
    const auto half = static_cast<std::size_t>(ev.size() / 2);
    std::vector<double> out;
    out.reserve(half);
    for (Eigen::Index i = ev.size() - static_cast<Eigen::Index>(half); i < ev.size(); ++i) {
        out.push_back(std::max(0.0, ev(i).real()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

const char* to_string(Regime r) noexcept { return r == Regime::Gravity ? "gravity" : "acoustic"; }
const char* to_string(FoldConvention f) noexcept { return f == FoldConvention::Reflect ? "reflect" : "shift"; }
const char* to_string(SweepScaling s) noexcept {
    return s == SweepScaling::DofSpacing ? "dof-spacing" : "cell-size";
}
const char* to_string(AllocationMode m) noexcept {
    return m == AllocationMode::Pointwise ? "pointwise" : "sector-constant";
}

FoldConvention parse_fold(const std::string& text) {
    if (text == "reflect") return FoldConvention::Reflect;
    if (text == "shift") return FoldConvention::Shift;
    throw DomainError("unknown fold convention '" + text + "'");
}

SweepScaling parse_scaling(const std::string& text) {
    if (text == "dof-spacing") return SweepScaling::DofSpacing;
    if (text == "cell-size") return SweepScaling::CellSize;
    throw DomainError("unknown sweep scaling '" + text + "'");
}

AllocationMode parse_allocation(const std::string& text) {
    if (text == "pointwise") return AllocationMode::Pointwise;
    if (text == "sector-constant") return AllocationMode::SectorConstant;
    throw DomainError("unknown allocation mode '" + text + "'");
}

std::pair<double, double> sweep_cell_size(const OrderCase& c, double dx, double dz, SweepScaling s) {
    if (s == SweepScaling::CellSize) {
        return {dx, dz};
    }
    return {dx * (c.h() + 1) / 2.0, dz * (c.v() + 1) / 2.0};
}

namespace {

constexpr double kPi = std::numbers::pi;

double extend(double base, double cell, int sector, FoldConvention fold) {
    if (sector == 0) {
        return base;
    }
    return fold == FoldConvention::Reflect ? 2.0 * kPi / cell - base : base + kPi / cell;
}

// Sector index and base wavenumber of one scaled coordinate.
std::pair<int, double> locate(double tilde, double cell, int sectors, FoldConvention fold) {
    if (sectors == 1 || tilde < kPi / cell) {
        return {0, tilde};
    }
    const double base = fold == FoldConvention::Reflect ? 2.0 * kPi / cell - tilde : tilde - kPi / cell;
    return {1, base};
}

struct Sampled {
    std::vector<SurfacePoint> points;
    std::vector<std::vector<double>> eig;  // per point, 2n ascending
};

Sampled sample(const OrderCase& c, double dx, double dz, double cell_dx, double cell_dz,
               const PhysParams& p, int grid_n, FoldConvention fold, int threads) {
    Sampled s;
    const auto total = static_cast<std::size_t>(grid_n) * static_cast<std::size_t>(grid_n);
    s.points.resize(total);
    s.eig.resize(total);
    parallel_for(total, threads, [&](std::size_t idx) {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(grid_n));
        const int j = static_cast<int>(idx / static_cast<std::size_t>(grid_n));
        SurfacePoint pt;
        pt.k_tilde = (i + 0.5) * (2.0 * kPi / dx) / grid_n;
        pt.l_tilde = (j + 0.5) * (2.0 * kPi / dz) / grid_n;
        const auto [sx, bk] = locate(pt.k_tilde, cell_dx, c.h() + 1, fold);
        const auto [sz, bl] = locate(pt.l_tilde, cell_dz, c.v() + 1, fold);
        pt.sector = sx + (c.h() + 1) * sz;
        pt.base_k = bk;
        pt.base_l = bl;
        const AnalyticModes am = analytic_omega(pt.k_tilde, pt.l_tilde, p);
        pt.analytic[static_cast<std::size_t>(Regime::Gravity)] = am.omega_minus;
        pt.analytic[static_cast<std::size_t>(Regime::Acoustic)] = am.omega_plus;
        s.eig[idx] = discrete_omega(c, bk, bl, cell_dx, cell_dz, p);
        s.points[idx] = pt;
    });
    return s;
}

std::vector<double> regime_slice(const std::vector<double>& eig, Regime r) {
    const auto n = eig.size() / 2;
    const auto off = r == Regime::Gravity ? 0 : n;
    return {eig.begin() + static_cast<std::ptrdiff_t>(off), eig.begin() + static_cast<std::ptrdiff_t>(off + n)};
}

void check_regime_gap(const OrderCase& c, const Sampled& s) {
    for (std::size_t idx = 0; idx < s.eig.size(); ++idx) {
        const auto& e = s.eig[idx];
        const auto n = e.size() / 2;
        if (e[n - 1] > e[n]) {
            std::ostringstream os;
            os << "gravity/acoustic regimes overlap for case " << c.label() << " at base (" << s.points[idx].base_k
               << ", " << s.points[idx].base_l << ")";
            throw IntegrityError(os.str());
        }
    }
}

double sq(double x) { return x * x; }

DispersionSurface build(const OrderCase& c, double dx, double dz, const PhysParams& p, const SweepOptions& opts,
                        FoldConvention fold) {
    DispersionSurface surf;
    surf.order = c;
    surf.params = p;
    surf.dx = dx;
    surf.dz = dz;
    std::tie(surf.cell_dx, surf.cell_dz) = sweep_cell_size(c, dx, dz, opts.scaling);
    surf.grid_n = opts.grid_n;
    surf.fold = fold;
    surf.scaling = opts.scaling;
    surf.mode = opts.mode;

    Sampled s = sample(c, dx, dz, surf.cell_dx, surf.cell_dz, p, opts.grid_n, fold, opts.threads);
    check_regime_gap(c, s);
    const int nb = c.dofs_per_cell();

    for (Regime r : {Regime::Gravity, Regime::Acoustic}) {
        const auto ri = static_cast<std::size_t>(r);
        auto& alloc = surf.allocation[ri];
        if (opts.mode == AllocationMode::SectorConstant) {
            std::vector<int> perm(static_cast<std::size_t>(nb));
            std::iota(perm.begin(), perm.end(), 0);
            double best = std::numeric_limits<double>::infinity();
            do {
                double score = 0.0;
                for (std::size_t idx = 0; idx < s.points.size(); ++idx) {
                    const auto& pt = s.points[idx];
                    const double wd = regime_slice(s.eig[idx], r)[static_cast<std::size_t>(
                        perm[static_cast<std::size_t>(pt.sector)])];
                    score += sq(wd - pt.analytic[ri]);
                }
                alloc.candidates.emplace_back(perm, score);
                if (score < best) {
                    best = score;
                    alloc.permutation = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            alloc.score = best;
            for (std::size_t idx = 0; idx < s.points.size(); ++idx) {
                auto& pt = s.points[idx];
                pt.omega[ri] = regime_slice(s.eig[idx], r)[static_cast<std::size_t>(
                    alloc.permutation[static_cast<std::size_t>(pt.sector)])];
            }
        } else {
            alloc.score = 0.0;
            for (std::size_t idx = 0; idx < s.points.size(); ++idx) {
                auto& pt = s.points[idx];
                const auto branches = regime_slice(s.eig[idx], r);
                const auto targets =
                    aliased_targets(c, pt.base_k, pt.base_l, surf.cell_dx, surf.cell_dz, fold, r, p);
                const auto perm = best_permutation(branches, targets);
                pt.omega[ri] = branches[static_cast<std::size_t>(perm[static_cast<std::size_t>(pt.sector)])];
                alloc.score += sq(pt.omega[ri] - pt.analytic[ri]);
            }
        }
    }
    surf.points = std::move(s.points);
    return surf;
}

}  // namespace

std::vector<double> aliased_targets(const OrderCase& c, double base_k, double base_l, double cell_dx,
                                    double cell_dz, FoldConvention fold, Regime r, const PhysParams& p) {
    std::vector<double> out;
    const int nx = c.h() + 1;
    const int nz = c.v() + 1;
    out.reserve(static_cast<std::size_t>(nx * nz));
    for (int sz = 0; sz < nz; ++sz) {
        for (int sx = 0; sx < nx; ++sx) {
            const AnalyticModes am =
                analytic_omega(extend(base_k, cell_dx, sx, fold), extend(base_l, cell_dz, sz, fold), p);
            out.push_back(r == Regime::Gravity ? am.omega_minus : am.omega_plus);
        }
    }
    return out;
}

std::vector<int> best_permutation(const std::vector<double>& branches, const std::vector<double>& targets) {
    if (branches.size() != targets.size()) {
        throw DomainError("best_permutation: branch and target counts differ");
    }
    std::vector<int> perm(branches.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_score = std::numeric_limits<double>::infinity();
    do {
        double score = 0.0;
        for (std::size_t s = 0; s < perm.size(); ++s) {
            score += sq(branches[static_cast<std::size_t>(perm[s])] - targets[s]);
        }
        if (score < best_score) {
            best_score = score;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

DispersionSurface allocate_branches(const OrderCase& c, double dx, double dz, const PhysParams& p, int grid_n) {
    SweepOptions opts;
    opts.grid_n = grid_n;
    return allocate_branches(c, dx, dz, p, opts);
}

DispersionSurface allocate_branches(const OrderCase& c, double dx, double dz, const PhysParams& p,
                                    const SweepOptions& opts) {
    if (opts.grid_n < 8) {
        throw DomainError("allocate_branches: grid_n must be at least 8");
    }
    if (!(dx > 0.0) || !(dz > 0.0)) {
        throw DomainError("allocate_branches: dx and dz must be positive");
    }
    p.validate();
    if (opts.fold) {
        return build(c, dx, dz, p, opts, *opts.fold);
    }
    DispersionSurface reflect = build(c, dx, dz, p, opts, FoldConvention::Reflect);
    DispersionSurface shift = build(c, dx, dz, p, opts, FoldConvention::Shift);
    auto total = [](const DispersionSurface& s) {
        return error_stats(s, Regime::Gravity).normalized_l2 + error_stats(s, Regime::Acoustic).normalized_l2;
    };
    const std::array<double, 2> scores{total(reflect), total(shift)};
    DispersionSurface& winner = scores[1] < scores[0] ? shift : reflect;
    winner.fold_scores = scores;
    return std::move(winner);
}

ErrorStats error_stats(const DispersionSurface& s, Regime r) {
    if (s.points.empty()) {
        throw DomainError("error_stats: empty dispersion surface");
    }
    const auto ri = static_cast<std::size_t>(r);
    double num = 0.0;
    double den = 0.0;
    double rel2 = 0.0;
    std::size_t rel_count = 0;
    ErrorStats st;
    st.min_err = std::numeric_limits<double>::infinity();
    st.min_abs = std::numeric_limits<double>::infinity();
    for (const auto& pt : s.points) {
        const double wa = pt.analytic[ri];
        const double e = std::abs(pt.omega[ri] - wa);
        num += e * e;
        den += wa * wa;
        st.max_abs = std::max(st.max_abs, e);
        st.min_abs = std::min(st.min_abs, e);
        if (wa > 0.0) {
            const double rel = e / wa;
            st.max_err = std::max(st.max_err, rel);
            st.min_err = std::min(st.min_err, rel);
            rel2 += rel * rel;
            ++rel_count;
        }
    }
    st.normalized_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    st.rms_rel = rel_count > 0 ? std::sqrt(rel2 / static_cast<double>(rel_count)) : 0.0;
    if (rel_count == 0) {
        st.min_err = 0.0;
    }
    return st;
}

void overwrite_with_analytic(DispersionSurface& s) {
    for (auto& pt : s.points) {
        pt.omega = pt.analytic;
    }
}

}  // namespace wavecore
