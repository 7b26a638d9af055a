#pragma once

#include "bosonforge/common.hpp"
#include "bosonforge/dynamics.hpp"
#include "bosonforge/io.hpp"
#include "bosonforge/optimizer.hpp"
#include "bosonforge/tomography.hpp"

#include <optional>
#include <string>

namespace bosonforge::runner {

enum class Task {
    optimize,
    propagate,
    tomography,
    reconstruct,
    analyze,
    compare_gates,
    error_budget
};

struct GridConfig {
    int side = 25;
    double extent = 0.0;  // 0 → per-target default
};

struct RunConfig {
    Task task;
    std::optional<optimizer::TargetSpec> target;
    int dim = 0;              // optimization/working Fock dimension (0 → default)
    int sim_dim = 0;          // tomography-simulation dimension (0 → derived)
    int reconstruct_dim = 0;  // density-matrix dimension (0 → per-target default)
    bool escalate = false;    // reconstruct: escalate dimension until stable
    optimizer::OptimizeConfig opt;
    dynamics::NoiseModel noise;
    double sdf_omega = kTwoPi * 2000.0;
    long shots = 0;
    GridConfig grid;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    std::string waveform_path, chi_path, rho_path, hastrup_path;
    std::string source = "ideal";  // tomography: "ideal" target or prepared "pulse"
    std::vector<double> compare_db{9.0, 10.0, 10.43, 11.0, 12.0, 12.15, 13.0};
    bool analyze_reconstruct = false;
    io::json raw;  // original config document (hashed into artifacts)
};

optimizer::TargetSpec parse_target(const io::json& j);
RunConfig parse_config(const io::json& j);

/// Per-target defaults: working dim, reconstruction dim, grid normalization
/// (β = scale·β̃) and quadrant extent.
struct TargetDefaults {
    int dim;
    int reconstruct_dim;
    double beta_scale;
    double extent;
};
TargetDefaults target_defaults(const optimizer::TargetSpec& target);

/// Executes one task; returns the process exit code (0 success,
/// 2 non-convergence, 3 validation error).
int run(const RunConfig& cfg);

/// Five-source infidelity decomposition for one state:
/// {pulse, thermal, dephasing_prep, dephasing_recon, lamb_dicke}.
struct ErrorBudgetRow {
    std::string state;
    double pulse;
    double thermal;
    double dephasing_prep;
    double dephasing_recon;
    double lamb_dicke;
    double total() const {
        return pulse + thermal + dephasing_prep + dephasing_recon + lamb_dicke;
    }
};

struct ErrorBudgetSettings {
    dynamics::NoiseModel noise{18.0, kTwoPi * 18.0, 0.05};
    dynamics::LambDickeParams lamb_dicke;
    double sdf_omega = kTwoPi * 2000.0;
    int grid_side = 17;        // tomography grid for the reconstruction row
    int sim_dim = 0;           // 0 → derived
    int reconstruct_dim = 0;   // 0 → per-target default
};

ErrorBudgetRow error_budget_state(const optimizer::TargetSpec& target,
                                  const optimizer::OptimizedPulse& pulse,
                                  const FockSpace& space,
                                  const ErrorBudgetSettings& settings);

/// Simulated noisy reconstruction study of the squeezed vacuum state:
/// ideal state, dephasing during the SDF pulses only, default grid.
struct SqueezedStudy {
    double fit_db;         // 2-D χ-fit squeezing of the noisy grid
    double recon_fidelity; // density-matrix route fidelity vs ideal target
    double recon_db;       // Gaussian-fit squeezing of the reconstructed ρ
};
SqueezedStudy squeezed_reconstruction_study(double r, const dynamics::NoiseModel& noise,
                                            double sdf_omega, int sim_dim,
                                            int reconstruct_dim, int grid_side = 25,
                                            double extent = 3.5);

}  // namespace bosonforge::runner
