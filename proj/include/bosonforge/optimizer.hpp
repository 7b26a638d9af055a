#pragma once

#include "bosonforge/common.hpp"
#include "bosonforge/dynamics.hpp"
#include "bosonforge/targets.hpp"

#include <cstdint>
#include <variant>

namespace bosonforge::optimizer {

using TargetSpec =
    std::variant<targets::SqueezeSpec, targets::GkpSpec, targets::BinomialSpec>;

CVec build_target(const TargetSpec& spec, const FockSpace& space);

struct PulseAnsatz {
    int n_seg_opt = 90;
    int n_seg_out = 240;
    RVec params;                    // 2·n_seg_opt: φ_r block then φ_b block
    double duration = 1e-3;         // seconds
    double omega = kTwoPi * 2000.0; // constant sideband Rabi rate, rad/s

    void validate() const;
};

struct ConstraintConfig {
    double slew_rate_times_t = kTwoPi * 267.0;  // SR × T, rad
    double cutoff_times_t = kTwoPi * 15.0;      // f_c × T, rad
    bool enabled = true;
};

struct CostConfig {
    double epsilon = 0.05;
    double t_max = 2.4e-3;  // seconds
};

struct RobustnessConfig {
    double sigma = kTwoPi * 75.0;  // offset spacing, rad/s
    int n = 2;                     // half-width; n = 0 recovers the plain cost

    std::vector<double> offsets() const {
        std::vector<double> d;
        for (int k = -n; k <= n; ++k) d.push_back(k * sigma);
        return d;
    }
    std::vector<double> weights() const {
        std::vector<double> w;
        for (int k = -n; k <= n; ++k) w.push_back(std::exp(-double(k * k)));
        return w;
    }
};

/// Sequential slew-rate limiter: each step is saturated at ±step_limit,
/// smoothly (tanh) while optimizing or exactly when hard.
RVec slew_clamp(const RVec& phi, double step_limit, bool hard);

/// Raw optimizable phases -> hardware-ready waveform: sequential slew-rate
/// clamp (smooth tanh saturation while optimizing, hard clamp at export),
/// windowed-sinc low-pass of cutoff f_c, resample to n_seg_out equal
/// segments. Deterministic for fixed inputs.
dynamics::Waveform build_waveform(const PulseAnsatz& ansatz,
                                  const ConstraintConfig& constraints,
                                  bool hard_clamp = false);

/// C = Σ_k e^{-k²}(1 - F_k) + ε·T/T_max with F_k the overlap fidelity under
/// the k-th detuning offset; n = 0, ε = 0 reduces to the plain infidelity.
double cost(const PulseAnsatz& ansatz, const CVec& target_osc, const CostConfig& cost_cfg,
            const RobustnessConfig& robust_cfg, const ConstraintConfig& constraints);

/// ∂C/∂params via costate back-propagation through the segment propagators
/// and the clamp/filter/resample chain.
RVec gradient(const PulseAnsatz& ansatz, const CVec& target_osc,
              const CostConfig& cost_cfg, const RobustnessConfig& robust_cfg,
              const ConstraintConfig& constraints);

struct OptimizeConfig {
    ConstraintConfig constraints;
    CostConfig cost;
    RobustnessConfig robust{kTwoPi * 75.0, 0};
    int n_seg_opt = 90;
    int n_seg_out = 240;
    double omega = kTwoPi * 2000.0;
    std::vector<double> duration_grid_s;  // empty: geometric grid in [0.2, 1]·t_max
    int n_starts = 8;
    int max_iterations = 300;
    int report_dim_margin = 12;  // extra Fock levels for the reported f_th
};

struct OptimizedPulse {
    dynamics::Waveform waveform;
    double f_th = 0.0;  // |<↓,ψ_t|U|↓,0>|² against the truncation-extended target
    double cost = 0.0;  // cost of the exported (hard-clamped) waveform
    std::uint64_t seed = 0;
    int iterations = 0;
    double duration = 0.0;
    std::vector<double> cost_trace;          // best-so-far, non-increasing
    std::vector<double> delta_offsets;       // robustness offsets δ_k
    std::vector<double> per_delta_fidelity;  // fidelities at those offsets
    RVec opt_params;                         // winning raw phases (φ_r, φ_b blocks)
};

/// Multistart gradient descent over the duration grid; returns the
/// best-of-multistart pulse. Throws NonConvergence when no start reaches
/// C < 2ε.
OptimizedPulse optimize(const TargetSpec& target, const FockSpace& space,
                        const OptimizeConfig& cfg, std::uint64_t seed);

/// Cubic-spline interpolation of the segment-midpoint phases, resampled at
/// `sample_rate_hz` into a dense waveform. Needs >= 4 segments.
dynamics::Waveform spline_export(const dynamics::Waveform& wf, double sample_rate_hz);

}  // namespace bosonforge::optimizer
