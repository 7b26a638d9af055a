#include "bosonforge/dynamics.hpp"

#include <cmath>
#include <map>

namespace bosonforge::dynamics {

double Waveform::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.dt;
    return t;
}

bool Waveform::constant_amplitude(double tol) const {
    if (segments.empty()) return true;
    for (const auto& s : segments) {
        if (std::abs(s.omega_r - segments.front().omega_r) > tol) return false;
        if (std::abs(s.omega_b - segments.front().omega_b) > tol) return false;
    }
    return true;
}

void SparseOp::apply(const CVec& x, CVec& y) const {
    y.setZero();
    for (size_t k = 0; k < val.size(); ++k) y(row[k]) += val[k] * x(col[k]);
}

CMat SparseOp::to_dense() const {
    CMat m = CMat::Zero(dim, dim);
    for (size_t k = 0; k < val.size(); ++k) m(row[k], col[k]) += val[k];
    return m;
}

double SparseOp::one_norm() const {
    RVec colsum = RVec::Zero(dim);
    for (size_t k = 0; k < val.size(); ++k) colsum(col[k]) += std::abs(val[k]);
    return colsum.size() ? colsum.maxCoeff() : 0.0;
}

SparseOp segment_hamiltonian(const Segment& seg, const FockSpace& space, double delta) {
    const int n = space.dim;
    SparseOp h(2 * n);
    const Complex cr = 0.5 * seg.omega_r * std::exp(kI * seg.phi_r);
    const Complex cb = 0.5 * seg.omega_b * std::exp(kI * seg.phi_b);
    for (int m = 1; m < n; ++m) {
        const Complex v = cr * std::sqrt(double(m));  // σ⁺ a: |↓,m> -> |↑,m-1>
        h.add(n + m - 1, m, v);
        h.add(m, n + m - 1, std::conj(v));
    }
    for (int m = 0; m + 1 < n; ++m) {
        const Complex v = cb * std::sqrt(double(m + 1));  // σ⁺ a†: |↓,m> -> |↑,m+1>
        h.add(n + m + 1, m, v);
        h.add(m, n + m + 1, std::conj(v));
    }
    if (delta != 0.0) {
        for (int i = 0; i < 2 * n; ++i) h.add(i, i, delta * double(i % n));
    }
    return h;
}

CMat control_hamiltonian(const Segment& seg, const FockSpace& space) {
    return segment_hamiltonian(seg, space).to_dense();
}

void evolve_segment(const SparseOp& h, double dt, CVec& psi) {
    const int substeps = std::max(1, int(std::ceil(h.one_norm() * std::abs(dt) / 2.0)));
    CVec term(psi.size()), next(psi.size());
    for (int s = 0; s < substeps; ++s) {
        term = psi;
        CVec acc = psi;
        for (int k = 1; k <= 120; ++k) {
            h.apply(term, next);
            term = next * (-kI * dt / (double(k) * substeps));
            acc += term;
            if (term.norm() < 1e-16 * (acc.norm() + 1e-300)) break;
            if (k == 120) throw IntegratorError("evolve_segment: series did not converge");
        }
        psi.swap(acc);
    }
}

CVec propagate_unitary(const Waveform& wf, const CVec& psi0) {
    return propagate_detuned(wf, 0.0, psi0);
}

CVec propagate_detuned(const Waveform& wf, double delta, const CVec& psi0) {
    const int n = int(psi0.size()) / 2;
    if (2 * n != psi0.size())
        throw DimensionMismatch("propagate: state is not a hybrid vector");
    const FockSpace space(n);
    CVec psi = psi0;
    for (const auto& seg : wf.segments) {
        if (seg.dt <= 0) throw std::invalid_argument("propagate: segment duration must be > 0");
        const SparseOp h = segment_hamiltonian(seg, space, delta);
        evolve_segment(h, seg.dt, psi);
    }
    return psi;
}

namespace {

// Lindblad action with collapse √Γ a†a: the dissipator is diagonal in the
// matrix entries, -Γ(n_i - n_j)²/2 per entry.
struct LindbladGen {
    const SparseOp* h;
    RMat deph_weight;  // -(Γ/2)(n_i-n_j)², zero matrix when Γ = 0
    double norm_bound;

    LindbladGen(const SparseOp& ham, double gamma, int osc_dim) : h(&ham) {
        const int d = ham.dim;
        deph_weight = RMat::Zero(d, d);
        double max_n = 0.0;
        if (gamma > 0) {
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    const double ni = double(i % osc_dim), nj = double(j % osc_dim);
                    deph_weight(i, j) = -0.5 * gamma * (ni - nj) * (ni - nj);
                    max_n = std::max(max_n, std::abs(deph_weight(i, j)));
                }
            }
        }
        norm_bound = 2.0 * ham.one_norm() + 2.0 * max_n;
    }

    void apply(const CMat& x, CMat& y, CMat& scratch) const {
        // y = -i(Hx - xH) + dephasing ∘ x
        scratch.setZero();
        for (size_t k = 0; k < h->val.size(); ++k)
            scratch.row(h->row[k]) += h->val[k] * x.row(h->col[k]);
        y = -kI * scratch;
        scratch.setZero();
        for (size_t k = 0; k < h->val.size(); ++k)
            scratch.col(h->col[k]) += h->val[k] * x.col(h->row[k]);
        y += kI * scratch;
        y.array() += deph_weight.array() * x.array();
    }
};

void master_step(const LindbladGen& gen, double dt, CMat& rho) {
    const int substeps = std::max(1, int(std::ceil(gen.norm_bound * dt / 6.0)));
    const int d = int(rho.rows());
    CMat term(d, d), next(d, d), scratch(d, d);
    for (int s = 0; s < substeps; ++s) {
        term = rho;
        CMat acc = rho;
        for (int k = 1; k <= 160; ++k) {
            gen.apply(term, next, scratch);
            term = next * (dt / (double(k) * substeps));
            acc += term;
            if (term.norm() < 1e-15 * (acc.norm() + 1e-300)) break;
            if (k == 160) throw IntegratorError("master_step: series did not converge");
        }
        rho.swap(acc);
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
}

}  // namespace

CMat propagate_master(const Waveform& wf, const NoiseModel& noise, const CMat& rho0,
                      const FockSpace& space) {
    if (rho0.rows() != rho0.cols())
        throw DimensionMismatch("propagate_master: rho0 must be square");
    const int d = int(rho0.rows());
    CMat rho = rho0;

    if (d == 2 * space.dim) {
        for (const auto& seg : wf.segments) {
            const SparseOp h = segment_hamiltonian(seg, space, noise.delta);
            LindbladGen gen(h, noise.gamma, space.dim);
            master_step(gen, seg.dt, rho);
        }
        return rho;
    }
    if (d != space.dim)
        throw DimensionMismatch("propagate_master: rho0 is neither N x N nor 2N x 2N");

    // Oscillator-only input: only an undriven waveform makes sense here.
    for (const auto& s : wf.segments)
        if (s.omega_r != 0.0 || s.omega_b != 0.0)
            throw DimensionMismatch("propagate_master: driven waveform needs a hybrid rho0");
    SparseOp h(d);
    for (int i = 0; i < d; ++i) h.add(i, i, noise.delta * double(i));
    LindbladGen gen(h, noise.gamma, d);
    const double t = wf.total_duration();
    if (t > 0) master_step(gen, t, rho);
    return rho;
}

std::vector<CMat> master_evolve_constant(const SparseOp& h, double gamma,
                                         const CMat& rho0,
                                         const std::vector<double>& times) {
    const int d = int(rho0.rows());
    const int osc_dim = (h.dim == d && d % 2 == 0) ? d / 2 : d;
    LindbladGen gen(h, gamma, osc_dim);
    std::vector<CMat> out;
    out.reserve(times.size());
    CMat rho = rho0;
    double t_now = 0.0;
    for (double t : times) {
        if (t < t_now - 1e-15) throw std::invalid_argument("master_evolve_constant: times must ascend");
        if (t > t_now) master_step(gen, t - t_now, rho);
        t_now = std::max(t_now, t);
        out.push_back(rho);
    }
    return out;
}

CMat thermal_state(double nbar, const FockSpace& space) {
    if (nbar < 0) throw std::invalid_argument("thermal_state: nbar must be >= 0");
    CMat rho = CMat::Zero(space.dim, space.dim);
    const double q = nbar / (1.0 + nbar);
    double w = 1.0, total = 0.0;
    for (int n = 0; n < space.dim; ++n) {
        rho(n, n) = w;
        total += w;
        w *= q;
    }
    rho /= total;
    return rho;
}

namespace {

// Harmonic decomposition of the Taylor-expanded displacement kernel:
// exp(iη(a e^{-iωt} + a† e^{iωt})) ≈ Σ_j (iη)^j/j! (a e^{-iωt} + a† e^{iωt})^j,
// collected as Σ_k e^{ikωt} E_k.
std::map<int, CMat> kernel_harmonics(double eta, int order, const FockSpace& space) {
    const int n = space.dim;
    CMat a = CMat::Zero(n, n);
    for (int m = 1; m < n; ++m) a(m - 1, m) = std::sqrt(double(m));
    const CMat ad = a.adjoint();

    std::map<int, CMat> power;  // harmonics of X^j during the recursion
    power[0] = CMat::Identity(n, n);
    std::map<int, CMat> out;
    out[0] = CMat::Identity(n, n);

    Complex coeff = 1.0;
    for (int j = 1; j <= order; ++j) {
        coeff *= kI * eta / double(j);
        std::map<int, CMat> next;
        for (const auto& [k, mat] : power) {
            auto lower = next.find(k - 1);
            if (lower == next.end()) next.emplace(k - 1, mat * a);
            else lower->second += mat * a;
            auto upper = next.find(k + 1);
            if (upper == next.end()) next.emplace(k + 1, mat * ad);
            else upper->second += mat * ad;
        }
        power = std::move(next);
        for (const auto& [k, mat] : power) {
            auto it = out.find(k);
            if (it == out.end()) out.emplace(k, coeff * mat);
            else it->second += coeff * mat;
        }
    }
    return out;
}

// σ⁺ coefficient harmonics G_k for the two-tone drive of one segment.
std::map<int, CMat> sdf_harmonics(const Segment& seg, const LambDickeParams& params,
                                  const FockSpace& space) {
    params.validate();
    const auto kernel = kernel_harmonics(params.eta, params.taylor_order, space);
    const Complex tone_r = 0.5 * (seg.omega_r / params.eta) *
                           std::exp(kI * (seg.phi_r - kPi / 2.0));
    const Complex tone_b = 0.5 * (seg.omega_b / params.eta) *
                           std::exp(kI * (seg.phi_b - kPi / 2.0));
    std::map<int, CMat> g;
    for (const auto& [k, mat] : kernel) {
        // RSB tone carries e^{+iωt} (Δω_L = -ω), BSB carries e^{-iωt}.
        auto r = g.find(k + 1);
        if (r == g.end()) g.emplace(k + 1, tone_r * mat);
        else r->second += tone_r * mat;
        auto b = g.find(k - 1);
        if (b == g.end()) g.emplace(k - 1, tone_b * mat);
        else b->second += tone_b * mat;
    }
    return g;
}

CMat assemble_hybrid(const CMat& g) {
    const int n = int(g.rows());
    CMat h = CMat::Zero(2 * n, 2 * n);
    h.block(n, 0, n, n) = g;            // σ⁺ ⊗ G
    h.block(0, n, n, n) = g.adjoint();  // h.c.
    return h;
}

}  // namespace

CMat lamb_dicke_interaction(double t, double omega_carrier, double phi,
                            const LambDickeParams& params, const FockSpace& space) {
    params.validate();
    const int n = space.dim;
    CMat a = CMat::Zero(n, n);
    for (int m = 1; m < n; ++m) a(m - 1, m) = std::sqrt(double(m));
    const CMat x_rot = a * std::exp(-kI * params.omega_r_mode * t) +
                       a.adjoint() * std::exp(kI * params.omega_r_mode * t);
    CMat kernel = CMat::Identity(n, n);
    CMat pw = CMat::Identity(n, n);
    Complex coeff = 1.0;
    for (int j = 1; j <= params.taylor_order; ++j) {
        coeff *= kI * params.eta / double(j);
        pw = (pw * x_rot).eval();
        kernel += coeff * pw;
    }
    const Complex scalar =
        0.5 * omega_carrier * std::exp(-kI * params.delta_omega_l * t) * std::exp(kI * phi);
    return assemble_hybrid(scalar * kernel);
}

CMat lamb_dicke_hamiltonian(double t, const Segment& seg, const LambDickeParams& params,
                            const FockSpace& space, bool rwa_filter) {
    const auto g = sdf_harmonics(seg, params, space);
    CMat gt = CMat::Zero(space.dim, space.dim);
    for (const auto& [k, mat] : g) {
        if (rwa_filter && k != 0) continue;
        gt += std::exp(kI * double(k) * params.omega_r_mode * t) * mat;
    }
    return assemble_hybrid(gt);
}

CVec propagate_lamb_dicke(const Waveform& wf, const LambDickeParams& params,
                          const CVec& psi0, int substeps_per_period) {
    params.validate();
    if (substeps_per_period < 20)
        throw std::invalid_argument("propagate_lamb_dicke: need >= 20 substeps per period");
    const int n = int(psi0.size()) / 2;
    if (2 * n != psi0.size())
        throw DimensionMismatch("propagate_lamb_dicke: state is not a hybrid vector");
    const FockSpace space(n);
    const double h_step = (kTwoPi / params.omega_r_mode) / double(substeps_per_period);

    CVec psi = psi0;
    CVec vt(n), vb(n), wt(n), wb(n);
    double t_global = 0.0;
    for (const auto& seg : wf.segments) {
        const auto g = sdf_harmonics(seg, params, space);
        const int steps = std::max(1, int(std::ceil(seg.dt / h_step)));
        const double h = seg.dt / steps;
        for (int s = 0; s < steps; ++s) {
            const double tm = t_global + (s + 0.5) * h;
            CMat gm = CMat::Zero(n, n);
            for (const auto& [k, mat] : g)
                gm += std::exp(kI * double(k) * params.omega_r_mode * tm) * mat;
            // ψ <- exp(-i H h) ψ with H = σ⁺⊗G + h.c.; Taylor in the two blocks.
            CVec acc_down = psi.head(n), acc_up = psi.tail(n);
            vt = psi.head(n);
            vb = psi.tail(n);
            for (int k = 1; k <= 60; ++k) {
                const Complex c = -kI * h / double(k);
                wt.noalias() = gm.adjoint() * vb;  // σ⁻ part feeds ↓ block
                wb.noalias() = gm * vt;
                vt = c * wt;
                vb = c * wb;
                acc_down += vt;
                acc_up += vb;
                const double tn = std::sqrt(vt.squaredNorm() + vb.squaredNorm());
                if (tn < 1e-16 * std::sqrt(acc_down.squaredNorm() + acc_up.squaredNorm() + 1e-300))
                    break;
                if (k == 60) throw IntegratorError("propagate_lamb_dicke: series did not converge");
            }
            psi.head(n) = acc_down;
            psi.tail(n) = acc_up;
        }
        t_global += seg.dt;
    }
    return psi;
}

}  // namespace bosonforge::dynamics
