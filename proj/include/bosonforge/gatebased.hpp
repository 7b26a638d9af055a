#pragma once

#include "bosonforge/common.hpp"
#include "bosonforge/targets.hpp"

namespace bosonforge::gatebased {

enum class GateAxis { sigma_x_x, sigma_y_x, sigma_x_p, sigma_y_p };

/// One state-dependent force exp(i·sign·magnitude·σ_a ⊗ q̂).
struct SdfGate {
    GateAxis axis;
    double magnitude;  // >= 0
    int sign;          // ±1
};

struct DurationModel {
    double eta = 0.1;
    double eta_omega = kTwoPi * 2000.0;  // first-order sideband rate ηΩ, rad/s

    double squeeze_duration(double r) const { return r / (eta * eta_omega); }
    // per gate: 2|magnitude|/(ηΩ)
};

struct GateSequence {
    std::vector<SdfGate> gates;  // in application order
    double squeeze_r;            // initial S(r)|0> resource
};

/// Fixed four-gate sequence preparing an approximate GKP |1>_L from a
/// squeezed input: magnitudes (1, 0.031, 0.5, 0.125)·2√π.
GateSequence deneve_sequence(double squeeze_r);

/// N rounds of (u_k σx x̂, w_k σy x̂, v_k σx p̂) forces with externally
/// supplied magnitudes. Throws MissingParams when the lists are empty or of
/// unequal length.
GateSequence hastrup_sequence(const std::vector<double>& u, const std::vector<double>& w,
                              const std::vector<double>& v, double squeeze_r);

double sdf_duration(const std::vector<SdfGate>& gates, const DurationModel& model);

/// Dense unitary of a single gate (for tests).
CMat gate_unitary(const SdfGate& gate, const FockSpace& space);

/// |↓> ⊗ S(r)|0> evolved through the sequence.
CVec apply_sequence(const GateSequence& seq, const FockSpace& space);

struct SequenceEval {
    double infidelity;  // 1 − <ψ_t| Tr_qubit(|Ψ><Ψ|) |ψ_t>
    double duration_s;  // squeeze + SDF durations
};

SequenceEval evaluate_sequence(const GateSequence& seq, const targets::GkpSpec& target,
                               const FockSpace& space, const DurationModel& model);

}  // namespace bosonforge::gatebased
