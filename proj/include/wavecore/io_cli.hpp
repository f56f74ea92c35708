#pragma once

#include "wavecore/dispersion.hpp"
#include "wavecore/experiments.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wavecore {

inline constexpr int kSchemaVersion = 1;
const char* tool_version() noexcept;

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIntegrity = 2 };

/// Parameters shared by every command. Unset optionals take per-command defaults.
struct RunConfig {
    OrderCase order{1, 1};
    std::optional<double> dx;  ///< m
    std::optional<double> dz;
    PhysParams params{340.0, 0.01};
    int grid_n = 100;
    double alpha = 0.5;
    double dt = 1.2;
    double t_end = 3600.0;
    std::string out_dir = ".";
    int threads = 0;
    std::optional<FoldConvention> fold;
    SweepScaling scaling = SweepScaling::DofSpacing;
    AllocationMode allocation = AllocationMode::Pointwise;
    bool desk = false;  ///< convergence: reference 240 m, four coarse spacings
    std::optional<double> reference_dx;
    std::vector<double> dx_list;  ///< convergence: empty means the standard list
    ErrorNorm norm = ErrorNorm::ReferenceQuadrature;

    /// Throws DomainError for non-positive physical parameters.
    void validate() const;
    [[nodiscard]] nlohmann::ordered_json to_json() const;
    /// Unknown keys and a schema other than 1 are rejected with DomainError.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

/// "# "-prefixed lines: tool version, command and the full config.
std::string metadata_block(const std::string& command, const RunConfig& cfg);

/// Rows (k, l, omega_plus, omega_minus) over k in [0, 2 pi / dx], l in [0, 2 pi / dz]
/// with grid_n points each, l outer.
void write_analytic_csv(std::ostream& out, const RunConfig& cfg);

/// Columns k_tilde,l_tilde,omega_gravity,omega_acoustic,err_gravity_pct,err_acoustic_pct,
/// where err = 100 (discrete - analytic) / analytic and 0 where analytic is 0.
void write_dispersion_csv(std::ostream& out, const DispersionSurface& s, const std::string& metadata);
nlohmann::ordered_json dispersion_stats_json(const DispersionSurface& s);

/// Diagnostic series: time,b_min,b_max,energy,b_mean.
void write_extrema_csv(std::ostream& out, const GravityWaveResult& r, const std::string& metadata);

/// Header row of the convergence ledger.
inline constexpr const char* kLedgerHeader = "case,dx,dz,dt,alpha,error,slope,wallclock";
/// Appends one row per resolution, creating the file (with metadata) if missing.
void append_ledger(const std::string& path, const ConvergenceResult& r, const ConvergenceConfig& cfg,
                   const std::string& metadata);

/// Each command writes into cfg.out_dir and returns the files it wrote.
std::vector<std::string> cmd_analytic(const RunConfig& cfg);
std::vector<std::string> cmd_dispersion(const RunConfig& cfg);
std::vector<std::string> cmd_gravity_wave(const RunConfig& cfg);
std::vector<std::string> cmd_convergence(const RunConfig& cfg);

GravityWaveConfig gravity_wave_config(const RunConfig& cfg);
ConvergenceConfig convergence_config(const RunConfig& cfg);

/// Command-line entry point; returns an ExitCode. Diagnostics go to stderr.
int run_cli(int argc, const char* const* argv);

}  // namespace wavecore
