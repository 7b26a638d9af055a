#pragma once

#include "bosonforge/common.hpp"
#include "bosonforge/targets.hpp"
#include "bosonforge/tomography.hpp"

#include <optional>

namespace bosonforge::metrics {

using tomography::ChiGrid;

/// Normalized overlap of two characteristic functions on identical point
/// sets: F̃ = Σ χ_exp χ_th / Σ χ_th².
double pseudo_fidelity(const ChiGrid& exp_grid, const ChiGrid& th_grid);

struct StabilizerSqueezing {
    double delta_x, delta_z;   // +inf sentinel when the expectation vanishes
    double db_x, db_z;         // −10 log10(Δ²)
    Complex s_x, s_z;          // stabilizer expectations
};

/// Δ estimates from stabilizer expectations, Δ_X = √(−ln|<S_X>|²)/(2|α|).
/// The χ-point route evaluates the same displacements at 2α and 2β.
StabilizerSqueezing stabilizer_squeezing(const CMat& rho, const targets::GkpSpec& spec);
StabilizerSqueezing stabilizer_squeezing(const ChiGrid& grid, const targets::GkpSpec& spec);

struct EffectiveSqueezing {
    double delta_star;
    double db;
    double projector_overlap;  // Tr(P_Δ* ρ)
};

/// Codespace-projector estimate: Δ* maximizes Tr(P_Δ ρ) over the scan window
/// with P_Δ built from the ground space of the fictitious Hamiltonian
/// −S_{X,Δ} − S_{Z,Δ} − Z_Δ (finite-energy operators E_Δ D E_Δ⁻¹, handled via
/// the similarity transform to keep the eigenproblem bounded).
EffectiveSqueezing effective_squeezing(const CMat& rho, const targets::GkpSpec& spec,
                                       int build_dim = 160, double delta_lo = 0.1,
                                       double delta_hi = 0.6);

struct LogicalFidelity {
    double f_bar;          // (1 + <Z_m>)/2 against |0>_L
    double bloch_x, bloch_y, bloch_z;
    bool bloch_exceeds_unit;
};

/// Decoded logical fidelity from the Pauli measurement-operator sums over the
/// displacement lattice, truncated to indices in [-trunc, trunc).
LogicalFidelity logical_fidelity(const CMat& rho, const targets::GkpSpec& spec,
                                 int trunc = 3);
LogicalFidelity logical_fidelity(const ChiGrid& grid, const targets::GkpSpec& spec,
                                 int trunc = 3);

/// Lattice points the decoder needs (pre-symmetry): 48 square, 108 hexagonal
/// at trunc = 3.
std::vector<Complex> decoder_points(const targets::GkpSpec& spec, int trunc = 3);

struct SqueezedFit {
    double r;
    double db;
    // 1-D fits along the squeezed (Re β) and anti-squeezed (Im β) axes;
    // absent when the grid lacks axis points.
    std::optional<double> r_re, db_re, r_im, db_im;
};

/// Least-squares fit of A·exp(−|β cosh r + β* sinh r|²/2) to a measured grid
/// with the SPAM scale A fixed by the caller.
SqueezedFit fit_squeezed(const ChiGrid& grid, double a_scale);

struct KlReport {
    double violation;  // max |<Wσ|E_l†E_k|Wσ'> − δ_σσ' α_lk|
};

KlReport kl_check(const CVec& w0, const CVec& w1, const std::vector<CMat>& errors);

/// Squeezing in dB from a Gaussian fit of the position marginal P(x),
/// −10 log10(2σ²); 0 dB for vacuum.
double squeezing_from_density(const CMat& rho);

}  // namespace bosonforge::metrics
