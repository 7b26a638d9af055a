#include "bosonforge/gatebased.hpp"

#include "bosonforge/dynamics.hpp"
#include "bosonforge/fock.hpp"

#include <cmath>

namespace bosonforge::gatebased {

namespace {

// σ_a ⊗ q̂ as a sparse hybrid operator.
dynamics::SparseOp gate_generator(const SdfGate& gate, const FockSpace& space) {
    const int n = space.dim;
    dynamics::SparseOp g(2 * n);
    const bool use_x = gate.axis == GateAxis::sigma_x_x || gate.axis == GateAxis::sigma_y_x;
    const bool spin_x = gate.axis == GateAxis::sigma_x_x || gate.axis == GateAxis::sigma_x_p;
    const double mag = gate.sign * gate.magnitude;

    // quadrature entries: x̂(m-1,m) = √m/√2; p̂(m-1,m) = -i√m/√2, p̂(m+1,m) = i√(m+1)/√2
    auto quad_upper = [&](int m) {  // entry (m-1, m)
        const double v = std::sqrt(double(m) / 2.0);
        return use_x ? Complex(v, 0.0) : Complex(0.0, -v);
    };
    // spin entries (basis ↓,↑): σx(0,1) = σx(1,0) = 1; σy(0,1) = i, σy(1,0) = -i
    const Complex s01 = spin_x ? Complex(1, 0) : Complex(0, 1);
    const Complex s10 = spin_x ? Complex(1, 0) : Complex(0, -1);

    for (int m = 1; m < n; ++m) {
        const Complex q = quad_upper(m);
        // (m-1, m) upper and (m, m-1) lower = conj for Hermitian q̂
        g.add(0 * n + m - 1, n + m, mag * s01 * q);
        g.add(0 * n + m, n + m - 1, mag * s01 * std::conj(q));
        g.add(n + m - 1, 0 * n + m, mag * s10 * q);
        g.add(n + m, 0 * n + m - 1, mag * s10 * std::conj(q));
    }
    return g;
}

}  // namespace

GateSequence deneve_sequence(double squeeze_r) {
    const double grid = 2.0 * std::sqrt(kPi);
    GateSequence seq;
    seq.squeeze_r = squeeze_r;
    seq.gates = {
        {GateAxis::sigma_x_p, grid, -1},
        {GateAxis::sigma_y_x, 0.031 * grid, +1},
        {GateAxis::sigma_x_p, 0.5 * grid, +1},
        {GateAxis::sigma_y_x, 0.125 * grid, -1},
    };
    return seq;
}

GateSequence hastrup_sequence(const std::vector<double>& u, const std::vector<double>& w,
                              const std::vector<double>& v, double squeeze_r) {
    if (u.size() != w.size() || u.size() != v.size())
        throw MissingParams("hastrup_sequence: u, w, v lists must have equal length");
    GateSequence seq;
    seq.squeeze_r = squeeze_r;
    for (size_t k = 0; k < u.size(); ++k) {
        seq.gates.push_back({GateAxis::sigma_x_p, std::abs(v[k]), v[k] < 0 ? -1 : 1});
        seq.gates.push_back({GateAxis::sigma_y_x, std::abs(w[k]), w[k] < 0 ? -1 : 1});
        seq.gates.push_back({GateAxis::sigma_x_x, std::abs(u[k]), u[k] < 0 ? -1 : 1});
    }
    return seq;
}

double sdf_duration(const std::vector<SdfGate>& gates, const DurationModel& model) {
    double t = 0.0;
    for (const auto& g : gates) t += 2.0 * g.magnitude / model.eta_omega;
    return t;
}

CMat gate_unitary(const SdfGate& gate, const FockSpace& space) {
    // exp(iG) = exp(-i(-G))
    const CMat g = gate_generator(gate, space).to_dense();
    return fock::expm_hermitian(g, -1.0);
}

CVec apply_sequence(const GateSequence& seq, const FockSpace& space) {
    CVec osc = targets::squeezed_vacuum(targets::SqueezeSpec(seq.squeeze_r), space);
    CVec psi = CVec::Zero(space.hybrid_dim());
    psi.head(space.dim) = osc;
    for (const auto& gate : seq.gates) {
        auto g = gate_generator(gate, space);
        // evolve_segment applies exp(-iH dt); H = -G, dt = 1 gives exp(iG).
        for (auto& v : g.val) v = -v;
        dynamics::evolve_segment(g, 1.0, psi);
    }
    return psi;
}

SequenceEval evaluate_sequence(const GateSequence& seq, const targets::GkpSpec& target,
                               const FockSpace& space, const DurationModel& model) {
    const CVec psi = apply_sequence(seq, space);
    const CVec psi_t = targets::gkp_state(target, space);
    const int n = space.dim;
    const double fid =
        std::norm(psi_t.dot(psi.head(n))) + std::norm(psi_t.dot(psi.tail(n)));
    SequenceEval out;
    out.infidelity = 1.0 - fid;
    out.duration_s = model.squeeze_duration(seq.squeeze_r) + sdf_duration(seq.gates, model);
    return out;
}

}  // namespace bosonforge::gatebased
