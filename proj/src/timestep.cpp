#include "wavecore/timestep.hpp"

#include "wavecore/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <variant>

namespace wavecore {

using ColSparse = Eigen::SparseMatrix<double>;

// With rows (p, b) scaled by (-1/cs, -1/N) and columns by (cs, N) the implicit
// operator becomes symmetric quasi-definite: [[Mu,w  B^T], [B, -Mp,b]].
// Such matrices admit an LDL^T factorisation under any symmetric ordering.
struct ThetaScheme::Solver {
    std::variant<Eigen::SimplicialLDLT<ColSparse>, Eigen::SparseLU<ColSparse, Eigen::COLAMDOrdering<int>>,
                 Eigen::BiCGSTAB<ColSparse, Eigen::IncompleteLUT<double>>>
        impl;
    ColSparse A;  // the iterative solver keeps a reference to it
    Eigen::VectorXd row_scale;
    Eigen::VectorXd col_scale;
};

ThetaScheme::ThetaScheme(const GlobalSystem& sys, double alpha, double dt, LinearSolver solver)
    : sys_(&sys), alpha_(alpha), dt_(dt), solver_(std::make_unique<Solver>()) {
    if (!(alpha >= 0.5 && alpha <= 1.0)) {
        throw DomainError(fmt::format("alpha must lie in [0.5, 1], got {}", alpha));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError(fmt::format("dt must be positive, got {}", dt));
    }
    const auto off = sys.map.offsets();
    const double cs = sys.params.cs;
    const double N = sys.params.N;
    const bool quasi_definite = solver == LinearSolver::SparseDirect && N > 0.0;
    auto& rs = solver_->row_scale;
    auto& cs_ = solver_->col_scale;
    rs = Eigen::VectorXd::Ones(off[4]);
    cs_ = Eigen::VectorXd::Ones(off[4]);
    if (quasi_definite) {
        rs.segment(off[2], off[3] - off[2]).setConstant(-1.0 / cs);
        cs_.segment(off[2], off[3] - off[2]).setConstant(cs);
        rs.segment(off[3], off[4] - off[3]).setConstant(-1.0 / N);
        cs_.segment(off[3], off[4] - off[3]).setConstant(N);
    } else {
        rs = energy_weights(sys);
        rs.segment(off[3], off[4] - off[3]).setConstant(1.0);
    }
    ColSparse& A = solver_->A;
    A = ColSparse(sys.M) - (alpha * dt) * ColSparse(sys.Sp);
    A = rs.asDiagonal() * A * cs_.asDiagonal();
    A.makeCompressed();
    if (quasi_definite) {
        auto& ldlt = solver_->impl.emplace<0>();
        ldlt.compute(A);
        if (ldlt.info() != Eigen::Success) {
            throw NumericalError("LDL^T factorisation of the implicit operator failed");
        }
    } else if (solver == LinearSolver::SparseDirect) {
        auto& lu = solver_->impl.emplace<1>();
        lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("implicit operator is singular: " + lu.lastErrorMessage());
        }
    } else {
        auto& it = solver_->impl.emplace<2>();
        it.setTolerance(1e-10);
        it.compute(A);
        if (it.info() != Eigen::Success) {
            throw NumericalError("incomplete LU of the implicit operator failed");
        }
    }
}

ThetaScheme::~ThetaScheme() = default;
ThetaScheme::ThetaScheme(ThetaScheme&&) noexcept = default;
ThetaScheme& ThetaScheme::operator=(ThetaScheme&&) noexcept = default;

Eigen::VectorXd ThetaScheme::solve(const Eigen::VectorXd& rhs) const {
    const Eigen::VectorXd r = solver_->row_scale.cwiseProduct(rhs);
    Eigen::VectorXd y;
    switch (solver_->impl.index()) {
        case 0:
            y = std::get<0>(solver_->impl).solve(r);
            break;
        case 1:
            y = std::get<1>(solver_->impl).solve(r);
            break;
        default: {
            auto& it = std::get<2>(solver_->impl);
            y = it.solve(r);
            if (it.info() != Eigen::Success) {
                throw NumericalError(fmt::format("iterative solve did not converge (error {})", it.error()));
            }
        }
    }
    return solver_->col_scale.cwiseProduct(y);
}

Eigen::VectorXd ThetaScheme::step(const Eigen::VectorXd& x) const {
    const GlobalSystem& sys = *sys_;
    if (x.size() != sys.dimension()) {
        throw DomainError(fmt::format("state has {} entries, system has {}", x.size(), sys.dimension()));
    }
    // Explicit forcing with the old state, then Newton-like corrections of the
    // implicit part. The residual is formed in mass-matrix (weak) form.
    const Eigen::VectorXd forced = sys.M * x + ((1.0 - alpha_) * dt_) * (sys.Sp * x);
    Eigen::VectorXd next = x;
    for (int k = 0; k < outer_iterations; ++k) {
        for (int i = 0; i < inner_iterations; ++i) {
            const Eigen::VectorXd residual = forced + (alpha_ * dt_) * (sys.Sp * next) - sys.M * next;
            next += solve(residual);
        }
    }
    return next;
}

StateVector ThetaScheme::step(const StateVector& x) const {
    StateVector out = x;
    out.data = step(x.data);
    return out;
}

namespace {

struct Projection {
    double cost = 0.0;
    double a = 0.0;
    double b = 0.0;
};

// Best a cos(w t) + b sin(w t) for fixed w.
Projection project(const std::vector<double>& y, double dt, double w) {
    double cc = 0.0, ss = 0.0, cs = 0.0, yc = 0.0, ys = 0.0, yy = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        const double t = static_cast<double>(n) * dt;
        const double c = std::cos(w * t);
        const double s = std::sin(w * t);
        cc += c * c;
        ss += s * s;
        cs += c * s;
        yc += y[n] * c;
        ys += y[n] * s;
        yy += y[n] * y[n];
    }
    const double det = cc * ss - cs * cs;
    Projection p;
    if (std::abs(det) < 1e-12 * (cc * ss + 1e-300)) {
        p.cost = yy;
        return p;
    }
    p.a = (yc * ss - ys * cs) / det;
    p.b = (ys * cc - yc * cs) / det;
    p.cost = yy - (p.a * yc + p.b * ys);
    return p;
}

}  // namespace

FrequencyFit extract_frequency(const std::vector<double>& series, double dt) {
    if (series.size() < 64) {
        throw DomainError(fmt::format("extract_frequency needs at least 64 samples, got {}", series.size()));
    }
    if (!(dt > 0.0)) {
        throw DomainError("extract_frequency: dt must be positive");
    }
    const double nyquist = std::numbers::pi / dt;
    const std::size_t grid = 8 * series.size();
    const double step = nyquist / static_cast<double>(grid);
    std::size_t best = 1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < grid; ++j) {
        const double c = project(series, dt, static_cast<double>(j) * step).cost;
        if (c < best_cost) {
            best_cost = c;
            best = j;
        }
    }
    const double lo = static_cast<double>(best - 1) * step;
    const double hi = static_cast<double>(best + 1) * step;
    auto [w, cost] = boost::math::tools::brent_find_minima(
        [&](double om) { return project(series, dt, om).cost; }, lo, hi, std::numeric_limits<double>::digits);
    (void)cost;

    // Brent resolves omega only to about sqrt(eps); finish with Gauss-Newton
    // on (a, b, omega).
    Projection p = project(series, dt, w);
    const auto n = static_cast<Eigen::Index>(series.size());
    for (int it = 0; it < 4; ++it) {
        Eigen::MatrixXd J(n, 3);
        Eigen::VectorXd r(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * dt;
            const double c = std::cos(w * t);
            const double sn = std::sin(w * t);
            J(i, 0) = c;
            J(i, 1) = sn;
            J(i, 2) = t * (p.b * c - p.a * sn);
            r(i) = series[static_cast<std::size_t>(i)] - (p.a * c + p.b * sn);
        }
        const Eigen::Vector3d d = J.colPivHouseholderQr().solve(r);
        if (!d.allFinite()) {
            break;
        }
        p.a += d(0);
        p.b += d(1);
        w += d(2);
    }

    FrequencyFit fit;
    fit.omega = w;
    fit.amplitude = std::hypot(p.a, p.b);
    fit.phase = std::atan2(-p.b, p.a);
    double ss = 0.0;
    for (std::size_t n = 0; n < series.size(); ++n) {
        const double t = static_cast<double>(n) * dt;
        const double r = series[n] - (p.a * std::cos(w * t) + p.b * std::sin(w * t));
        ss += r * r;
    }
    const double rms = std::sqrt(ss / static_cast<double>(series.size()));
    fit.residual = fit.amplitude > 0.0 ? rms / fit.amplitude : std::numeric_limits<double>::infinity();
    if (!(fit.residual <= 0.01)) {
        throw AmbiguousSignalError(fmt::format(
            "single-cosine fit leaves a relative residual of {:.3g} (omega {:.6g} rad/s)", fit.residual, w));
    }
    return fit;
}

double trapezoidal_measured(double omega, double dt) { return 2.0 / dt * std::atan(0.5 * omega * dt); }

double trapezoidal_corrected(double omega_measured, double dt) {
    return 2.0 / dt * std::tan(0.5 * omega_measured * dt);
}

}  // namespace wavecore
