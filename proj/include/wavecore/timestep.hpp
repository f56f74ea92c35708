#pragma once

#include "wavecore/slicefem.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <vector>

namespace wavecore {

enum class LinearSolver { SparseDirect, Iterative };

/// Off-centred implicit step
///   (M - alpha dt Sp) x^{n+1} = (M + (1 - alpha) dt Sp) x^n
/// written as the outer/inner quasi-Newton loop of a semi-implicit model.
/// For a linear system about rest the advection step is the identity and one
/// outer and one inner iteration are exact, so both counts default to 1.
class ThetaScheme {
public:
    ThetaScheme(const GlobalSystem& sys, double alpha, double dt,
                LinearSolver solver = LinearSolver::SparseDirect);
    ~ThetaScheme();
    ThetaScheme(ThetaScheme&&) noexcept;
    ThetaScheme& operator=(ThetaScheme&&) noexcept;

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] const GlobalSystem& system() const noexcept { return *sys_; }

    int outer_iterations = 1;  ///< k_max
    int inner_iterations = 1;  ///< I_max

    /// Throws DomainError if x does not match the system dimension.
    [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& x) const;
    [[nodiscard]] StateVector step(const StateVector& x) const;

private:
    const GlobalSystem* sys_;
    double alpha_;
    double dt_;
    struct Solver;
    std::unique_ptr<Solver> solver_;
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

struct FrequencyFit {
    double omega = 0.0;      ///< rad/s
    double amplitude = 0.0;
    double phase = 0.0;      ///< series ~ amplitude cos(omega t + phase)
    double residual = 0.0;   ///< rms misfit divided by amplitude
};

/// Least-squares fit of A cos(omega t + phi) to samples taken every dt.
/// Throws DomainError for fewer than 64 samples and AmbiguousSignalError when
/// the relative residual exceeds 1%.
FrequencyFit extract_frequency(const std::vector<double>& series, double dt);

/// Trapezoidal phase distortion: omega_measured = (2/dt) atan(omega dt / 2).
double trapezoidal_measured(double omega, double dt);
/// Inverse of trapezoidal_measured.
double trapezoidal_corrected(double omega_measured, double dt);

}  // namespace wavecore
