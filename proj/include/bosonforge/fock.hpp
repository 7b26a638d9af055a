#pragma once

#include "bosonforge/common.hpp"

namespace bosonforge::fock {

// Oscillator ladder and quadrature operators on the truncated space.
CMat annihilation(const FockSpace& space);
CMat creation(const FockSpace& space);
CMat number_op(const FockSpace& space);
CMat position_op(const FockSpace& space);   // (a + a†)/√2
CMat momentum_op(const FockSpace& space);   // -i(a - a†)/√2
CMat parity_op(const FockSpace& space);     // exp(iπ a†a)
CMat identity(const FockSpace& space);

/// Displacement operator D(β) = exp(β a† − β* a), computed as the exponential
/// of the anti-Hermitian generator. Warns when |β|² > dim/4.
CMat displacement(Complex beta, const FockSpace& space);

/// Matrix elements <m|D(β)|n> of the ideal (untruncated) displacement
/// operator, restricted to the space. Unlike `displacement`, this stays
/// faithful for |β|² beyond the truncation (elements simply vanish), at the
/// price of not being unitary on the truncated space. Built by the exact
/// column recurrence D|n> = (a† − β*) D|n−1>/√n.
CMat projected_displacement(Complex beta, const FockSpace& space);

/// Squeeze operator S(r) = exp[(r a² − r a†²)/2] for real r.
/// Warns when e^{2r} > dim/6.
CMat squeeze(double r, const FockSpace& space);

// Qubit operators, basis (|↓>, |↑>) with σz|↓> = −|↓> and σ⁺ = |↑><↓|.
CMat sigma_x();
CMat sigma_y();
CMat sigma_z();
CMat sigma_plus();
CMat sigma_minus();
CMat qubit_identity();

/// Kronecker product, qubit index slow: index = s*dim + n.
CMat embed_hybrid(const CMat& spin_op, const CMat& osc_op);

// Basis states.
CVec fock_state(int n, const FockSpace& space);
CVec vacuum(const FockSpace& space);
/// |s> ⊗ |n> with s = 0 for ↓, 1 for ↑.
CVec hybrid_basis(int spin, int n, const FockSpace& space);

/// D(β)|v> without forming the matrix: scaled Taylor series of the generator
/// action. Exact to machine precision up to truncation of the space itself.
CVec apply_displacement(Complex beta, const CVec& v);
/// S(r)|v>, same scheme.
CVec apply_squeeze(double r, const CVec& v);

Complex expectation(const CMat& op, const CVec& psi);
Complex expectation(const CMat& op, const CMat& rho);

/// <ψ|ρ|ψ>, clipped to [0,1]; warns if the raw value is below −1e-9.
double state_fidelity(const CMat& rho, const CVec& psi);
/// |<a|b>|² for pure states.
double overlap_fidelity(const CVec& a, const CVec& b);

/// exp(−i·scale·H) for Hermitian H via eigendecomposition.
CMat expm_hermitian(const CMat& hermitian, double scale);

/// Reduced oscillator density matrix of a hybrid pure state or density matrix
/// (partial trace over the qubit).
CMat partial_trace_qubit(const CVec& hybrid_psi);
CMat partial_trace_qubit(const CMat& hybrid_rho);

}  // namespace bosonforge::fock
