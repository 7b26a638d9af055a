#pragma once

#include "bosonforge/common.hpp"

#include <optional>

namespace bosonforge::dynamics {

/// One piecewise-constant control interval of the bichromatic drive.
/// Rabi rates and phases are those of Eq.-style sideband interactions:
/// H = (omega_r/2) σ⁺ a e^{i phi_r} + (omega_b/2) σ⁺ a† e^{i phi_b} + h.c.
struct Segment {
    double dt;       // seconds, > 0
    double phi_r;    // rad
    double phi_b;    // rad
    double omega_r;  // rad/s
    double omega_b;  // rad/s
};

struct Waveform {
    std::vector<Segment> segments;

    double total_duration() const;
    /// True when every segment carries the same Rabi rates.
    bool constant_amplitude(double tol = 1e-12) const;
};

struct NoiseModel {
    double gamma = 0.0;  // motional dephasing rate Γ in Hz (collapse √Γ a†a)
    double delta = 0.0;  // static detuning δ in rad/s (δ a†a term)
    double nbar = 0.0;   // initial thermal occupation

    NoiseModel() = default;
    NoiseModel(double gamma_, double delta_, double nbar_)
        : gamma(gamma_), delta(delta_), nbar(nbar_) {
        if (gamma_ < 0) throw std::invalid_argument("NoiseModel: gamma must be >= 0");
        if (nbar_ < 0) throw std::invalid_argument("NoiseModel: nbar must be >= 0");
    }
};

struct LambDickeParams {
    double eta = 0.083;                  // Lamb-Dicke parameter
    double omega_r_mode = kTwoPi * 1.33e6;  // mode frequency, rad/s
    int taylor_order = 4;                // 1..6
    double delta_omega_l = 0.0;          // laser detuning for single-tone use, rad/s

    void validate() const {
        if (taylor_order < 1 || taylor_order > 6)
            throw std::invalid_argument("LambDickeParams: taylor_order must be in [1, 6]");
    }
};

/// Sparse COO operator action; rows/cols index the hybrid or oscillator space.
struct SparseOp {
    int dim = 0;
    std::vector<int> row, col;
    std::vector<Complex> val;

    explicit SparseOp(int d) : dim(d) {}
    void add(int r, int c, Complex v) {
        row.push_back(r);
        col.push_back(c);
        val.push_back(v);
    }
    void apply(const CVec& x, CVec& y) const;        // y = A x (y pre-sized)
    CMat to_dense() const;
    double one_norm() const;                          // max column abs-sum
};

/// Control Hamiltonian of one segment on the hybrid space (2N x 2N),
/// optionally detuned by delta·a†a.
SparseOp segment_hamiltonian(const Segment& seg, const FockSpace& space,
                             double delta = 0.0);
CMat control_hamiltonian(const Segment& seg, const FockSpace& space);

/// psi <- exp(-i H dt) psi, machine-precision scaled Taylor series.
void evolve_segment(const SparseOp& h, double dt, CVec& psi);

/// Piecewise-constant unitary evolution of a hybrid pure state.
CVec propagate_unitary(const Waveform& wf, const CVec& psi0);
/// Same with a static detuning delta·a†a added to every segment.
CVec propagate_detuned(const Waveform& wf, double delta, const CVec& psi0);

/// Lindblad master equation with dephasing collapse √Γ a†a and detuning
/// δ a†a. Accepts a hybrid (2N) density matrix driven by the waveform, or an
/// oscillator-only (N) one when the waveform has zero amplitude everywhere.
CMat propagate_master(const Waveform& wf, const NoiseModel& noise, const CMat& rho0,
                      const FockSpace& space);

/// Constant-generator master evolution recording the state at each requested
/// time (ascending). Used by the tomography simulator where one SDF ray
/// yields every radius along it.
std::vector<CMat> master_evolve_constant(const SparseOp& h, double gamma,
                                         const CMat& rho0,
                                         const std::vector<double>& times);

/// Thermal oscillator state, Boltzmann diagonal normalized after truncation.
CMat thermal_state(double nbar, const FockSpace& space);

/// Beyond-Lamb-Dicke interaction Hamiltonian at time t.
///
/// Single laser tone, literal exponent form with a Taylor-expanded
/// displacement kernel:
///   H = (Ω/2) σ⁺ exp(iη(a e^{-iωt} + a† e^{iωt})) e^{-iΔω_L t} e^{iφ} + h.c.
CMat lamb_dicke_interaction(double t, double omega_carrier, double phi,
                            const LambDickeParams& params, const FockSpace& space);

/// Full two-tone (RSB at Δω_L = -ω, BSB at +ω) Hamiltonian driven by a
/// waveform segment. Sideband phases map to laser tone phases with a -π/2
/// offset so the order-1 rotating-wave limit reproduces the control
/// Hamiltonian with Ω_r = Ω_b = ηΩ. `rwa_filter` keeps only the stationary
/// harmonic.
CMat lamb_dicke_hamiltonian(double t, const Segment& seg,
                            const LambDickeParams& params, const FockSpace& space,
                            bool rwa_filter = false);

/// Propagates a hybrid state under the two-tone beyond-Lamb-Dicke Hamiltonian
/// (midpoint-exponential stepping, `substeps_per_period` >= 20 resolves the
/// mode rotation).
CVec propagate_lamb_dicke(const Waveform& wf, const LambDickeParams& params,
                          const CVec& psi0, int substeps_per_period = 24);

}  // namespace bosonforge::dynamics
