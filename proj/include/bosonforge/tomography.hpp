#pragma once

#include "bosonforge/common.hpp"
#include "bosonforge/dynamics.hpp"

#include <cstdint>
#include <optional>

namespace bosonforge::tomography {

struct ChiPoint {
    Complex beta;       // raw (unnormalized) phase-space point
    double re_chi;      // measured/computed Re[χ(β)] in [-1, 1]
    long m_bright = -1; // shot record, absent when negative
    long m_total = -1;

    bool has_shots() const { return m_total > 0; }
};

struct ChiGrid {
    std::vector<ChiPoint> points;
    double beta_scale = 1.0;   // raw β = beta_scale · normalized β̃
    double extent = 0.0;       // quadrant extent in normalized units
    int side = 0;              // points per quadrant side (0 for ad-hoc sets)
    bool symmetric = true;     // state certified symmetric about both axes

    void validate() const;
};

struct SdfConfig {
    double omega_sdf = kTwoPi * 2000.0;  // SDF sideband Rabi rate, rad/s
    dynamics::NoiseModel noise;          // Γ, δ applied during the SDF pulse
    long shots = 0;                      // 0 = infinite-shot limit
};

/// Positive-quadrant grid: side × side points uniform over
/// [0, extent] × [0, extent] in normalized units, raw β = beta_scale·β̃.
ChiGrid make_quadrant_grid(int side, double extent, double beta_scale);

/// χ(β) = <D(β)> of a pure state or density matrix.
Complex chi_exact(const CVec& psi, Complex beta);
Complex chi_exact(const CMat& rho, Complex beta);

/// Simulated SDF measurement of Re[χ(β)]: conditional displacement D(βσx/2)
/// for t = |β|/Ω, closing π rotation, projective σz readout (bright = ↑).
/// States of length N are oscillator-only and get lifted with the |↓>
/// ancilla; length 2N means a hybrid input. With noise.gamma/delta nonzero
/// the SDF pulse evolves under the master equation.
ChiPoint sdf_measure(const CVec& state, Complex beta, const SdfConfig& cfg,
                     const FockSpace& space, std::uint64_t rng_seed);
ChiPoint sdf_measure(const CMat& rho, Complex beta, const SdfConfig& cfg,
                     const FockSpace& space, std::uint64_t rng_seed);

/// Simulates a whole grid. Points along one phase-space ray share a single
/// evolution (the SDF Hamiltonian is constant, radii are snapshot times).
/// Per-point RNG streams are derived from (seed, point index) so the result
/// is independent of scheduling. The state may be oscillator-only (N) or a
/// hybrid (2N) carrying residual spin-motion entanglement.
ChiGrid measure_grid(const CMat& rho, const FockSpace& space, const ChiGrid& grid_spec,
                     const SdfConfig& cfg, std::uint64_t seed);
/// Pure-state fast path (unitary SDF); requires noise.gamma == 0.
ChiGrid measure_grid(const CVec& psi, const FockSpace& space, const ChiGrid& grid_spec,
                     const SdfConfig& cfg, std::uint64_t seed);

/// Exact χ over the given grid points (no noise, no shots).
ChiGrid exact_grid(const CVec& psi, const ChiGrid& grid_spec);
ChiGrid exact_grid(const CMat& rho_osc, const ChiGrid& grid_spec);

/// Reflects a positive-quadrant grid across both axes (axis points not
/// duplicated). Throws SymmetryViolation when the grid is flagged asymmetric.
ChiGrid symmetrize(const ChiGrid& quadrant);
/// Restricts a full grid back to its positive quadrant.
ChiGrid restrict_quadrant(const ChiGrid& full);

struct ReconstructResult {
    CMat rho;
    double residual_rms;  // RMS of |Tr(ρD(β_i)) − χ_i| over grid points
    int iterations;
};

struct ReconstructOptions {
    int max_iterations = 4000;
    double tol = 1e-10;        // relative iterate-movement stop
    double illposed_residual = 0.2;
};

/// Constrained least squares: min ‖Tr(ρD(β_i)) − χ_i‖₂ over Hermitian,
/// trace-one, PSD ρ of the given dimension. Least-squares init followed by
/// FISTA with spectral simplex projection.
ReconstructResult reconstruct_density(const ChiGrid& grid, int dim,
                                      const ReconstructOptions& opts = {});

/// Escalates the reconstruction dimension until the fidelity against
/// `target` (zero-padded as needed) changes by less than 1e-3.
ReconstructResult reconstruct_escalating(const ChiGrid& grid, const CVec& target,
                                         int start_dim, int step = 6,
                                         const ReconstructOptions& opts = {});

struct BootstrapResult {
    double mean;
    double sigma;
    std::vector<double> samples;
};

/// Resamples `resample_size` outcomes per point from the recorded shot
/// fractions, rebuilds the grid, and reports the 1σ spread of metric_fn.
BootstrapResult bootstrap(const ChiGrid& grid, int n_resamples, int resample_size,
                          const std::function<double(const ChiGrid&)>& metric_fn,
                          std::uint64_t seed);

/// Wigner function W(x, p) on the outer product of the two grids;
/// normalized so that ∫∫ W dx dp = 1.
RMat wigner(const CMat& rho, const RVec& xs, const RVec& ps);

/// Position marginal P(x) = <x|ρ|x> evaluated exactly via Hermite functions.
RVec position_marginal(const CMat& rho, const RVec& xs);

/// Hermite-function table ψ_n(x), n < dim (rows: n, cols: x index).
RMat hermite_table(int dim, const RVec& xs);

}  // namespace bosonforge::tomography
