#pragma once

#include "wavecore/bloch.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace wavecore {

struct AnalyticModes {
    double omega_plus = 0.0;   ///< acoustic branch (rad/s)
    double omega_minus = 0.0;  ///< gravity branch (rad/s)
};

/// Exact positive roots of  w^4 - w^2 [(k^2+l^2) cs^2 + N^2] + k^2 N^2 cs^2 = 0.
AnalyticModes analytic_omega(double k, double l, const PhysParams& p);

/// The 2(h+1)(v+1) non-negative eigenfrequencies of -i M^{-1} S, ascending.
/// The lower half is the gravity regime, the upper half the acoustic regime.
std::vector<double> discrete_omega(const OrderCase& c, double k, double l, double dx, double dz,
                                   const PhysParams& p);

enum class Regime { Gravity = 0, Acoustic = 1 };
enum class FoldConvention { Reflect, Shift };
enum class SweepScaling {
    DofSpacing,  ///< order-0 directions use half-size cells so every case has the same DoF spacing
    CellSize,    ///< dx, dz are the cell sizes for every case
};
enum class AllocationMode {
    Pointwise,       ///< best permutation chosen independently at each base wavenumber
    SectorConstant,  ///< one permutation per regime for the whole surface
};

const char* to_string(Regime r) noexcept;
const char* to_string(FoldConvention f) noexcept;
const char* to_string(SweepScaling s) noexcept;
const char* to_string(AllocationMode m) noexcept;
FoldConvention parse_fold(const std::string& text);
SweepScaling parse_scaling(const std::string& text);
AllocationMode parse_allocation(const std::string& text);

struct SweepOptions {
    int grid_n = 100;
    SweepScaling scaling = SweepScaling::DofSpacing;
    AllocationMode mode = AllocationMode::Pointwise;
    std::optional<FoldConvention> fold;  ///< unset: run both and keep the lower-error one
    int threads = 0;
};

struct SurfacePoint {
    double k_tilde = 0.0;
    double l_tilde = 0.0;
    int sector = 0;  ///< sx + (h+1) * sz
    double base_k = 0.0;
    double base_l = 0.0;
    std::array<double, 2> omega{};     ///< discrete, indexed by Regime
    std::array<double, 2> analytic{};  ///< analytic at (k_tilde, l_tilde), indexed by Regime
};

struct RegimeAllocation {
    std::vector<int> permutation;  ///< SectorConstant: sector -> branch index
    double score = 0.0;            ///< summed squared error of the chosen assignment
    std::vector<std::pair<std::vector<int>, double>> candidates;  ///< SectorConstant: every permutation scored
};

struct DispersionSurface {
    OrderCase order{0, 0};
    PhysParams params;
    double dx = 0.0;  ///< scaled-wavenumber length: k_tilde spans (0, 2 pi / dx)
    double dz = 0.0;
    double cell_dx = 0.0;
    double cell_dz = 0.0;
    int grid_n = 0;
    FoldConvention fold = FoldConvention::Reflect;
    SweepScaling scaling = SweepScaling::DofSpacing;
    AllocationMode mode = AllocationMode::Pointwise;
    std::array<double, 2> fold_scores{};  ///< sum of both regimes' normalized L2 under {Reflect, Shift}; 0 if not run
    std::vector<SurfacePoint> points;     ///< l outer, k inner
    std::array<RegimeAllocation, 2> allocation;

    [[nodiscard]] int sectors_x() const noexcept { return order.h() + 1; }
    [[nodiscard]] int sectors_z() const noexcept { return order.v() + 1; }
};

/// Cell sizes used for the eigenproblem given the sweep scaling.
std::pair<double, double> sweep_cell_size(const OrderCase& c, double dx, double dz, SweepScaling s);

/// Analytic frequencies at each sector's extended wavenumber for one base point.
std::vector<double> aliased_targets(const OrderCase& c, double base_k, double base_l, double cell_dx,
                                    double cell_dz, FoldConvention fold, Regime r, const PhysParams& p);

/// Lowest-error sector -> branch permutation (ties: first in lexicographic order).
std::vector<int> best_permutation(const std::vector<double>& branches, const std::vector<double>& targets);

DispersionSurface allocate_branches(const OrderCase& c, double dx, double dz, const PhysParams& p,
                                    int grid_n);
DispersionSurface allocate_branches(const OrderCase& c, double dx, double dz, const PhysParams& p,
                                    const SweepOptions& opts);

struct ErrorStats {
    double normalized_l2 = 0.0;  ///< sqrt(sum (wd - wa)^2 / sum wa^2)
    double max_err = 0.0;        ///< max |wd - wa| / wa
    double min_err = 0.0;        ///< min |wd - wa| / wa
    double max_abs = 0.0;        ///< rad/s
    double min_abs = 0.0;
    double rms_rel = 0.0;
};

ErrorStats error_stats(const DispersionSurface& s, Regime r);

/// Test hook: replace discrete values by the analytic ones.
void overwrite_with_analytic(DispersionSurface& s);

}  // namespace wavecore
