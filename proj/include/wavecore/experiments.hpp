#pragma once

#include "wavecore/timestep.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace wavecore {

/// Buoyancy perturbation released in a resting, stratified slice.
struct GravityWaveConfig {
    OrderCase order{1, 1};
    double L = 3.0e5;  ///< m
    double H = 1.0e4;  ///< m
    double a = 5.0e3;  ///< perturbation half-width (m)
    double b0 = 1.0e-3;  ///< m/s^2
    double dx = 2000.0;  ///< requested; the mesh uses L / round(L / dx)
    double dz = 2000.0;
    PhysParams params{340.0, 0.01};
    double t_end = 3600.0;
    double dt = 1.2;
    double alpha = 0.5;
    ZBoundary z_boundary = ZBoundary::RigidLid;
    LinearSolver solver = LinearSolver::SparseDirect;
    int sample_every = 25;  ///< steps between recorded diagnostics
    int threads = 0;

    [[nodiscard]] double xc() const noexcept { return 0.5 * L; }
    [[nodiscard]] int nx() const;
    [[nodiscard]] int nz() const;
    [[nodiscard]] int steps() const;
    void validate() const;

    /// Default resolution for each case: (0,0) 1000x1000, (0,1) 1000x2000,
    /// (1,0) 2000x1000, (1,1) 2000x2000 m.
    static GravityWaveConfig for_case(const OrderCase& c);
};

/// b'(x, z) = b0 sin(pi z / H) / (1 + ((x - xc) / a)^2)
double buoyancy_perturbation(const GravityWaveConfig& cfg, double x, double z);

struct GravityWaveResult {
    std::shared_ptr<const GlobalSystem> system;
    StateVector initial;
    StateVector final_state;
    int steps = 0;
    std::vector<double> times;  ///< diagnostic sample times, first 0, last t_end
    std::vector<double> b_min;
    std::vector<double> b_max;
    std::vector<double> energy;
    std::vector<double> b_mean;  ///< domain integral of b divided by area
    double max_energy_drift = 0.0;  ///< max |E - E0| / E0 over all steps
    double wallclock = 0.0;         ///< seconds
};

/// Throws IntegrityError when the energy grows by more than 1%.
GravityWaveResult run_gravity_wave(const GravityWaveConfig& cfg);

/// Domain integral of one field divided by the domain area.
double field_mean(const GlobalSystem& sys, const StateVector& s, Field f);

enum class ErrorNorm {
    ReferenceQuadrature,  ///< both solutions sampled at the reference mesh's quadrature points
    CoarseProjection,     ///< reference L2-projected onto the coarse buoyancy space, compared there
};

const char* to_string(ErrorNorm n) noexcept;
ErrorNorm parse_error_norm(const std::string& text);

struct ConvergenceConfig {
    GravityWaveConfig base;  ///< physics, duration and timestep shared by every member
    std::vector<double> dx_list{450, 500, 600, 700, 750, 800, 850, 900};
    double dz = 1000.0;
    double reference_dx = 120.0;
    int error_quad_points = 3;
    ErrorNorm norm = ErrorNorm::ReferenceQuadrature;

    /// Reduced sweep: reference 240 m and four coarse spacings.
    static ConvergenceConfig desk();
};

struct ConvergencePoint {
    double dx = 0.0;  ///< adjusted spacing L / nx
    int nx = 0;
    double error = 0.0;            ///< in the configured norm
    std::array<double, 2> errors{};  ///< indexed by ErrorNorm
    double wallclock = 0.0;
};

struct ConvergenceResult {
    OrderCase order{0, 0};
    double reference_dx = 0.0;
    double reference_wallclock = 0.0;
    std::vector<ConvergencePoint> points;
    double slope = 0.0;               ///< in the configured norm
    std::array<double, 2> slopes{};  ///< indexed by ErrorNorm
};

/// L2 norm of the buoyancy difference, sampled at the reference mesh's
/// quadrature points. Throws DomainError if the domains differ.
double buoyancy_l2_difference(const GlobalSystem& ref_sys, const StateVector& ref, const GlobalSystem& sys,
                              const StateVector& s, int quad_points = 3);

/// L2 norm of (P ref - coarse) in the coarse buoyancy space, P the L2
/// projection. Integrals are exact: each piece of the overlay of both meshes
/// gets its own Gauss rule.
double buoyancy_projected_difference(const GlobalSystem& ref_sys, const StateVector& ref, const GlobalSystem& sys,
                                     const StateVector& s, int quad_points = 3);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Members run in parallel; a precomputed reference may be supplied.
ConvergenceResult run_convergence(const OrderCase& c, const ConvergenceConfig& cfg,
                                  const GravityWaveResult* reference = nullptr);

}  // namespace wavecore
