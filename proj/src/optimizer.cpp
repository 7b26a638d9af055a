#include "bosonforge/optimizer.hpp"

#include "bosonforge/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <random>

namespace bosonforge::optimizer {

using dynamics::Segment;
using dynamics::SparseOp;
using dynamics::Waveform;

CVec build_target(const TargetSpec& spec, const FockSpace& space) {
    // Working truncations keep tails up to the optimizer's own tolerance, so
    // construct in a padded space and renormalize the head instead of holding
    // targets to the strict constructor threshold.
    const FockSpace inner(space.dim + 64);
    CVec big = std::visit(
        [&](const auto& s) -> CVec {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, targets::SqueezeSpec>)
                return targets::squeezed_vacuum(s, inner);
            else if constexpr (std::is_same_v<T, targets::GkpSpec>)
                return targets::gkp_state(s, inner);
            else
                return targets::binomial_state(s, inner);
        },
        spec);
    if (const auto* bin = std::get_if<targets::BinomialSpec>(&spec))
        if (bin->highest_fock() >= space.dim)
            throw DimensionMismatch("build_target: binomial support exceeds truncation");
    const double tail = big.tail(big.size() - space.dim).squaredNorm();
    if (tail > 8e-3) {
        std::ostringstream os;
        os << "build_target: truncation tail " << tail
           << " exceeds 8e-3 at dim " << space.dim;
        warn(os.str());
    }
    CVec out = big.head(space.dim);
    out.normalize();
    return out;
}

void PulseAnsatz::validate() const {
    if (n_seg_opt < 1 || n_seg_out < n_seg_opt)
        throw std::invalid_argument("PulseAnsatz: need n_seg_out >= n_seg_opt >= 1");
    if (params.size() != 2 * n_seg_opt)
        throw std::invalid_argument("PulseAnsatz: params must have length 2*n_seg_opt");
    if (!(duration > 0)) throw std::invalid_argument("PulseAnsatz: duration must be > 0");
    if (!params.allFinite()) throw std::invalid_argument("PulseAnsatz: params must be finite");
}

namespace {

// Filter-and-resample matrix in normalized time: windowed-sinc kernel of
// angular cutoff `cutoff_times_t`, rows normalized for exact DC gain.
// Depends only on (n_in, n_out, cutoff), so cache it.
RMat filter_matrix(int n_in, int n_out, double cutoff_times_t) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, long long>, RMat> cache;
    const auto key = std::make_tuple(n_in, n_out, llround(cutoff_times_t * 1e9));
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    const double wc = cutoff_times_t;
    const double half_width = 4.0 * kTwoPi / wc;  // four main-lobe widths
    auto kernel = [&](double u) {
        if (std::abs(u) > half_width) return 0.0;
        const double win = 0.5 * (1.0 + std::cos(kPi * u / half_width));
        if (std::abs(u) < 1e-12) return win * wc / kPi;
        return win * std::sin(wc * u) / (kPi * u);
    };

    RMat f = RMat::Zero(n_out, n_in);
    const int sub = 24;
    const double seg_w = 1.0 / double(n_in);
    for (int i = 0; i < n_out; ++i) {
        const double ti = (i + 0.5) / double(n_out);
        for (int j = 0; j < n_in; ++j) {
            double acc = 0.0;
            for (int q = 0; q < sub; ++q) {
                const double s = (j + (q + 0.5) / sub) * seg_w;
                acc += kernel(ti - s);
            }
            f(i, j) = acc * seg_w / double(sub);
        }
        const double row_sum = f.row(i).sum();
        if (row_sum != 0.0) f.row(i) /= row_sum;
    }
    std::lock_guard<std::mutex> lock(mtx);
    cache[key] = f;
    return f;
}

struct ClampChain {
    RVec out;
    RVec gprime;  // g'(d_j) used between elements j-1 and j
};

// Smooth saturation: exact identity below the knee so optimized pulses whose
// steps stay inside the limit export unchanged under the hard clamp; beyond
// the knee a tanh blend keeps the cost differentiable.
constexpr double kClampKnee = 0.75;

ClampChain clamp_channel(const RVec& phi, double step_limit, bool hard) {
    const int n = int(phi.size());
    ClampChain c;
    c.out.resize(n);
    c.gprime = RVec::Ones(n);
    c.out(0) = phi(0);
    const double knee = kClampKnee * step_limit;
    const double span = step_limit - knee;
    for (int j = 1; j < n; ++j) {
        const double d = phi(j) - c.out(j - 1);
        double g, gp;
        if (hard) {
            g = std::clamp(d, -step_limit, step_limit);
            gp = (std::abs(d) < step_limit) ? 1.0 : 0.0;
        } else if (std::abs(d) <= knee) {
            g = d;
            gp = 1.0;
        } else {
            const double sign = d > 0 ? 1.0 : -1.0;
            const double th = std::tanh((std::abs(d) - knee) / span);
            g = sign * (knee + span * th);
            gp = 1.0 - th * th;
        }
        c.out(j) = c.out(j - 1) + g;
        c.gprime(j) = gp;
    }
    return c;
}

RVec clamp_backward(const ClampChain& c, const RVec& grad_out) {
    const int n = int(grad_out.size());
    RVec grad_in = RVec::Zero(n);
    double carry = 0.0;  // sensitivity flowing into clamped value j
    for (int j = n - 1; j >= 1; --j) {
        const double a = grad_out(j) + carry;
        grad_in(j) = a * c.gprime(j);
        carry = a * (1.0 - c.gprime(j));
    }
    grad_in(0) = grad_out(0) + carry;
    return grad_in;
}

struct WaveformBuild {
    Waveform wf;
    ClampChain clamp_r, clamp_b;
    bool constrained;
};

WaveformBuild build_waveform_full(const PulseAnsatz& ansatz,
                                  const ConstraintConfig& constraints, bool hard) {
    ansatz.validate();
    const int n_in = ansatz.n_seg_opt;
    WaveformBuild b;
    b.constrained = constraints.enabled;
    const RVec phi_r_in = ansatz.params.head(n_in);
    const RVec phi_b_in = ansatz.params.tail(n_in);

    RVec phi_r, phi_b;
    int n_out;
    if (constraints.enabled) {
        const double step_limit = constraints.slew_rate_times_t / double(n_in);
        b.clamp_r = clamp_channel(phi_r_in, step_limit, hard);
        b.clamp_b = clamp_channel(phi_b_in, step_limit, hard);
        const RMat f = filter_matrix(n_in, ansatz.n_seg_out, constraints.cutoff_times_t);
        phi_r = f * b.clamp_r.out;
        phi_b = f * b.clamp_b.out;
        n_out = ansatz.n_seg_out;
    } else {
        phi_r = phi_r_in;
        phi_b = phi_b_in;
        n_out = n_in;
    }

    const double dt = ansatz.duration / double(n_out);
    b.wf.segments.resize(n_out);
    for (int i = 0; i < n_out; ++i)
        b.wf.segments[i] = Segment{dt, phi_r(i), phi_b(i), ansatz.omega, ansatz.omega};
    return b;
}

RVec waveform_backward(const WaveformBuild& b, const PulseAnsatz& ansatz,
                       const ConstraintConfig& constraints, const RVec& grad_phi_r_out,
                       const RVec& grad_phi_b_out) {
    const int n_in = ansatz.n_seg_opt;
    RVec grad(2 * n_in);
    if (b.constrained) {
        const RMat f = filter_matrix(n_in, ansatz.n_seg_out, constraints.cutoff_times_t);
        grad.head(n_in) = clamp_backward(b.clamp_r, f.transpose() * grad_phi_r_out);
        grad.tail(n_in) = clamp_backward(b.clamp_b, f.transpose() * grad_phi_b_out);
    } else {
        grad.head(n_in) = grad_phi_r_out;
        grad.tail(n_in) = grad_phi_b_out;
    }
    return grad;
}

// ∂H/∂φ of the two sideband terms, same sparsity as the terms themselves.
SparseOp dH_dphi_r(const Segment& seg, const FockSpace& space) {
    const int n = space.dim;
    SparseOp d(2 * n);
    const Complex c = kI * 0.5 * seg.omega_r * std::exp(kI * seg.phi_r);
    for (int m = 1; m < n; ++m) {
        const Complex v = c * std::sqrt(double(m));
        d.add(n + m - 1, m, v);
        d.add(m, n + m - 1, std::conj(v));
    }
    return d;
}

SparseOp dH_dphi_b(const Segment& seg, const FockSpace& space) {
    const int n = space.dim;
    SparseOp d(2 * n);
    const Complex c = kI * 0.5 * seg.omega_b * std::exp(kI * seg.phi_b);
    for (int m = 0; m + 1 < n; ++m) {
        const Complex v = c * std::sqrt(double(m + 1));
        d.add(n + m + 1, m, v);
        d.add(m, n + m + 1, std::conj(v));
    }
    return d;
}

// Directional propagator derivatives via the block-triangular exponential:
// exp([[A,B],[0,A]]) has ∂U in its off-diagonal block. Returns
// (∂U/∂φ_r)ψ and (∂U/∂φ_b)ψ sharing one Taylor sweep.
void van_loan_pair(const SparseOp& h, const SparseOp& br, const SparseOp& bb, double dt,
                   const CVec& psi, CVec& dpsi_r, CVec& dpsi_b) {
    const int d = h.dim;
    const int substeps = std::max(1, int(std::ceil(h.one_norm() * dt / 2.0)));
    CVec u = psi;
    CVec wr = CVec::Zero(d), wb = CVec::Zero(d);
    CVec tu(d), twr(d), twb(d), hu(d), hwr(d), hwb(d), bu(d);
    for (int s = 0; s < substeps; ++s) {
        tu = u;
        twr = wr;
        twb = wb;
        CVec au = u, awr = wr, awb = wb;
        for (int k = 1; k <= 120; ++k) {
            const Complex scale = -kI * dt / (double(k) * substeps);
            h.apply(twr, hwr);
            br.apply(tu, bu);
            hwr += bu;
            h.apply(twb, hwb);
            bb.apply(tu, bu);
            hwb += bu;
            h.apply(tu, hu);
            tu = scale * hu;
            twr = scale * hwr;
            twb = scale * hwb;
            au += tu;
            awr += twr;
            awb += twb;
            const double tn = tu.norm() + twr.norm() + twb.norm();
            if (tn < 1e-16 * (au.norm() + awr.norm() + awb.norm() + 1e-300)) break;
            if (k == 120) throw IntegratorError("van_loan_pair: series did not converge");
        }
        u.swap(au);
        wr.swap(awr);
        wb.swap(awb);
    }
    dpsi_r = wr;
    dpsi_b = wb;
}

struct CostEval {
    double total = 0.0;
    double f_plain = 0.0;           // fidelity at δ = 0
    std::vector<double> f_k;
    RVec grad;                      // empty unless requested
};

// The drive conserves joint parity σz ⊗ e^{iπ a†a}, so odd-parity targets
// must start from |↑,0> (the |↓,ψ_odd> sector is unreachable from |↓,0>).
int initial_spin(const CVec& target_osc) {
    double parity = 0.0;
    for (Eigen::Index n = 0; n < target_osc.size(); ++n)
        parity += (n % 2 == 0 ? 1.0 : -1.0) * std::norm(target_osc(n));
    return parity >= 0.0 ? 0 : 1;
}

CostEval evaluate_cost(const PulseAnsatz& ansatz, const CVec& target_osc,
                       const CostConfig& cost_cfg, const RobustnessConfig& robust_cfg,
                       const ConstraintConfig& constraints, bool want_grad,
                       const WaveformBuild* prebuilt = nullptr) {
    const WaveformBuild built =
        prebuilt ? *prebuilt : build_waveform_full(ansatz, constraints, false);
    const Waveform& wf = built.wf;
    const int n_osc = int(target_osc.size());
    const FockSpace space(n_osc);
    const int dim = 2 * n_osc;
    const int n_seg = int(wf.segments.size());

    CVec psi0 = CVec::Zero(dim);
    psi0(initial_spin(target_osc) * n_osc) = 1.0;
    CVec target_h = CVec::Zero(dim);
    target_h.head(n_osc) = target_osc;

    const auto offsets = robust_cfg.offsets();
    const auto weights = robust_cfg.weights();

    CostEval out;
    out.total = 0.0;
    out.f_k.assign(offsets.size(), 0.0);
    RVec grad_r = RVec::Zero(n_seg), grad_b = RVec::Zero(n_seg);

    std::vector<CVec> fwd;
    if (want_grad) fwd.resize(n_seg + 1);

    for (size_t ki = 0; ki < offsets.size(); ++ki) {
        std::vector<SparseOp> hams;
        hams.reserve(n_seg);
        for (const auto& seg : wf.segments)
            hams.push_back(dynamics::segment_hamiltonian(seg, space, offsets[ki]));

        CVec psi = psi0;
        if (want_grad) fwd[0] = psi;
        for (int j = 0; j < n_seg; ++j) {
            dynamics::evolve_segment(hams[j], wf.segments[j].dt, psi);
            if (want_grad) fwd[j + 1] = psi;
        }
        const Complex o = target_h.dot(psi);
        const double fid = std::norm(o);
        out.f_k[ki] = fid;
        out.total += weights[ki] * (1.0 - fid);
        if (offsets[ki] == 0.0) out.f_plain = fid;

        if (!want_grad) continue;
        CVec lambda = target_h;
        CVec dpsi_r(dim), dpsi_b(dim);
        for (int j = n_seg - 1; j >= 0; --j) {
            const auto br = dH_dphi_r(wf.segments[j], space);
            const auto bb = dH_dphi_b(wf.segments[j], space);
            van_loan_pair(hams[j], br, bb, wf.segments[j].dt, fwd[j], dpsi_r, dpsi_b);
            const Complex do_r = lambda.dot(dpsi_r);
            const Complex do_b = lambda.dot(dpsi_b);
            const double df_r = 2.0 * std::real(std::conj(o) * do_r);
            const double df_b = 2.0 * std::real(std::conj(o) * do_b);
            grad_r(j) -= weights[ki] * df_r;
            grad_b(j) -= weights[ki] * df_b;
            dynamics::evolve_segment(hams[j], -wf.segments[j].dt, lambda);
        }
    }

    out.total += cost_cfg.epsilon * ansatz.duration / cost_cfg.t_max;
    if (want_grad)
        out.grad = waveform_backward(built, ansatz, constraints, grad_r, grad_b);
    return out;
}

}  // namespace

RVec slew_clamp(const RVec& phi, double step_limit, bool hard) {
    return clamp_channel(phi, step_limit, hard).out;
}

Waveform build_waveform(const PulseAnsatz& ansatz, const ConstraintConfig& constraints,
                        bool hard_clamp) {
    return build_waveform_full(ansatz, constraints, hard_clamp).wf;
}

double cost(const PulseAnsatz& ansatz, const CVec& target_osc, const CostConfig& cost_cfg,
            const RobustnessConfig& robust_cfg, const ConstraintConfig& constraints) {
    return evaluate_cost(ansatz, target_osc, cost_cfg, robust_cfg, constraints, false).total;
}

RVec gradient(const PulseAnsatz& ansatz, const CVec& target_osc, const CostConfig& cost_cfg,
              const RobustnessConfig& robust_cfg, const ConstraintConfig& constraints) {
    return evaluate_cost(ansatz, target_osc, cost_cfg, robust_cfg, constraints, true).grad;
}

namespace {

struct LbfgsOutcome {
    RVec x;
    double f;
    int iterations;
    std::vector<double> trace;  // best-so-far cost per iteration
};

template <typename Fn>
LbfgsOutcome lbfgs_minimize(Fn&& fn, RVec x0, int max_iter, double gtol) {
    const int n = int(x0.size());
    const int mem = 8;
    std::vector<RVec> s_hist, y_hist;
    std::vector<double> rho_hist;

    RVec x = std::move(x0), g(n);
    double f = fn(x, g);
    LbfgsOutcome out;
    out.trace.push_back(f);
    double best_f = f;

    RVec x_new(n), g_new(n);
    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        if (g.lpNorm<Eigen::Infinity>() < gtol) break;

        // Two-loop recursion.
        RVec q = g;
        const int m = int(s_hist.size());
        std::vector<double> alpha(m);
        for (int i = m - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (m > 0) {
            const double gamma =
                s_hist[m - 1].dot(y_hist[m - 1]) / y_hist[m - 1].squaredNorm();
            q *= gamma;
        } else {
            q *= 1.0 / std::max(1.0, g.norm());
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        RVec dir = -q;
        if (dir.dot(g) > -1e-14 * dir.norm() * g.norm()) dir = -g;

        // Armijo backtracking.
        double step = 1.0;
        const double slope = dir.dot(g);
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            x_new = x + step * dir;
            const double f_new = fn(x_new, g_new);
            if (f_new <= f + 1e-4 * step * slope) {
                RVec s = x_new - x;
                RVec y = g_new - g;
                const double sy = s.dot(y);
                if (sy > 1e-12 * s.norm() * y.norm()) {
                    s_hist.push_back(std::move(s));
                    y_hist.push_back(std::move(y));
                    rho_hist.push_back(1.0 / sy);
                    if (int(s_hist.size()) > mem) {
                        s_hist.erase(s_hist.begin());
                        y_hist.erase(y_hist.begin());
                        rho_hist.erase(rho_hist.begin());
                    }
                }
                x = x_new;
                f = f_new;
                g = g_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        best_f = std::min(best_f, f);
        out.trace.push_back(best_f);
        if (!accepted) break;  // line search exhausted
    }
    out.x = x;
    out.f = f;
    return out;
}

}  // namespace

OptimizedPulse optimize(const TargetSpec& target, const FockSpace& space,
                        const OptimizeConfig& cfg, std::uint64_t seed) {
    const CVec target_osc = build_target(target, space);

    std::vector<double> durations = cfg.duration_grid_s;
    if (durations.empty()) {
        const int n_t = 5;
        for (int i = 0; i < n_t; ++i)
            durations.push_back(0.2 * cfg.cost.t_max *
                                std::pow(5.0, double(i) / double(n_t - 1)));
    }
    std::sort(durations.begin(), durations.end());

    struct Candidate {
        LbfgsOutcome outcome;
        double duration;
        int t_index, start_index;
        bool valid = false;
    };

    Candidate best;
    best.outcome.f = std::numeric_limits<double>::infinity();

    for (size_t ti = 0; ti < durations.size(); ++ti) {
        const double t_dur = durations[ti];
        // Even a perfect pulse cannot beat the standing best once the
        // duration penalty alone exceeds it.
        if (best.valid && cfg.cost.epsilon * t_dur / cfg.cost.t_max >= best.outcome.f)
            break;

        std::vector<Candidate> cands(cfg.n_starts);
        parallel_for(cfg.n_starts, [&](int si) {
            std::mt19937_64 rng(seed + 1000003ULL * ti + 7919ULL * si);
            std::uniform_real_distribution<double> uni(-kPi, kPi);
            PulseAnsatz ansatz;
            ansatz.n_seg_opt = cfg.n_seg_opt;
            ansatz.n_seg_out = cfg.n_seg_out;
            ansatz.omega = cfg.omega;
            ansatz.duration = t_dur;
            ansatz.params.resize(2 * cfg.n_seg_opt);
            for (int i = 0; i < ansatz.params.size(); ++i) ansatz.params(i) = uni(rng);

            auto fn = [&](const RVec& x, RVec& grad) {
                PulseAnsatz a = ansatz;
                a.params = x;
                const auto eval = evaluate_cost(a, target_osc, cfg.cost, cfg.robust,
                                                cfg.constraints, true);
                grad = eval.grad;
                return eval.total;
            };
            cands[si].outcome = lbfgs_minimize(fn, ansatz.params, cfg.max_iterations, 1e-7);
            cands[si].duration = t_dur;
            cands[si].t_index = int(ti);
            cands[si].start_index = si;
            cands[si].valid = true;
        });
        for (const auto& c : cands) {
            if (!c.valid) continue;
            const bool better = c.outcome.f < best.outcome.f ||
                                (c.outcome.f == best.outcome.f && c.duration < best.duration);
            if (!best.valid || better) best = c;
        }
    }

    if (!best.valid || !(best.outcome.f < 2.0 * cfg.cost.epsilon))
        throw NonConvergence("optimize: no start reached C < 2*epsilon");

    PulseAnsatz winner;
    winner.n_seg_opt = cfg.n_seg_opt;
    winner.n_seg_out = cfg.n_seg_out;
    winner.omega = cfg.omega;
    winner.duration = best.duration;
    winner.params = best.outcome.x;

    OptimizedPulse pulse;
    pulse.waveform = build_waveform(winner, cfg.constraints, true);
    pulse.seed = seed;
    pulse.iterations = best.outcome.iterations;
    pulse.duration = best.duration;
    pulse.cost_trace = best.outcome.trace;
    pulse.opt_params = winner.params;

    // Reported fidelity against the truncation-extended target.
    const FockSpace report_space(space.dim + cfg.report_dim_margin);
    const CVec target_big = build_target(target, report_space);
    CVec psi0 = CVec::Zero(report_space.hybrid_dim());
    psi0(initial_spin(target_big) * report_space.dim) = 1.0;
    const CVec psi_f = dynamics::propagate_unitary(pulse.waveform, psi0);
    CVec target_h = CVec::Zero(report_space.hybrid_dim());
    target_h.head(report_space.dim) = target_big;
    pulse.f_th = std::norm(target_h.dot(psi_f));

    // Exported-waveform cost and per-offset fidelities at the working dim.
    CVec psi0_w = CVec::Zero(space.hybrid_dim());
    psi0_w(initial_spin(target_osc) * space.dim) = 1.0;
    CVec target_hw = CVec::Zero(space.hybrid_dim());
    target_hw.head(space.dim) = target_osc;
    const auto offsets = cfg.robust.offsets();
    const auto weights = cfg.robust.weights();
    double c_export = cfg.cost.epsilon * best.duration / cfg.cost.t_max;
    for (size_t k = 0; k < offsets.size(); ++k) {
        const CVec psi_k = dynamics::propagate_detuned(pulse.waveform, offsets[k], psi0_w);
        const double fid = std::norm(target_hw.dot(psi_k));
        pulse.delta_offsets.push_back(offsets[k]);
        pulse.per_delta_fidelity.push_back(fid);
        c_export += weights[k] * (1.0 - fid);
    }
    pulse.cost = c_export;
    return pulse;
}

Waveform spline_export(const Waveform& wf, double sample_rate_hz) {
    const int n = int(wf.segments.size());
    if (n < 4) throw std::invalid_argument("spline_export: need at least 4 segments");
    const double t_total = wf.total_duration();

    // Knots at segment midpoints.
    RVec ts(n), phi_r(n), phi_b(n);
    double t_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        ts(i) = t_acc + 0.5 * wf.segments[i].dt;
        t_acc += wf.segments[i].dt;
        phi_r(i) = wf.segments[i].phi_r;
        phi_b(i) = wf.segments[i].phi_b;
    }

    // Natural cubic spline second derivatives (tridiagonal solve).
    auto spline_m = [&](const RVec& y) {
        RVec m = RVec::Zero(n);
        RVec c_diag(n), c_rhs(n);
        c_diag.setZero();
        c_rhs.setZero();
        RVec cp(n), dp(n);
        cp(0) = 0.0;
        dp(0) = 0.0;
        for (int i = 1; i + 1 < n; ++i) {
            const double h0 = ts(i) - ts(i - 1), h1 = ts(i + 1) - ts(i);
            const double a = h0 / 6.0, bdiag = (h0 + h1) / 3.0, c = h1 / 6.0;
            const double rhs = (y(i + 1) - y(i)) / h1 - (y(i) - y(i - 1)) / h0;
            const double denom = bdiag - a * cp(i - 1);
            cp(i) = c / denom;
            dp(i) = (rhs - a * dp(i - 1)) / denom;
        }
        for (int i = n - 2; i >= 1; --i) m(i) = dp(i) - cp(i) * m(i + 1);
        return m;
    };
    const RVec m_r = spline_m(phi_r), m_b = spline_m(phi_b);

    auto eval = [&](const RVec& y, const RVec& m, double t) {
        int i = int(std::upper_bound(ts.data(), ts.data() + n, t) - ts.data()) - 1;
        i = std::clamp(i, 0, n - 2);
        const double h = ts(i + 1) - ts(i);
        const double a = (ts(i + 1) - t) / h, b = (t - ts(i)) / h;
        return a * y(i) + b * y(i + 1) +
               ((a * a * a - a) * m(i) + (b * b * b - b) * m(i + 1)) * h * h / 6.0;
    };

    const int n_dense = std::max(4, int(std::llround(t_total * sample_rate_hz)));
    Waveform out;
    out.segments.resize(n_dense);
    const double dt = t_total / n_dense;
    for (int i = 0; i < n_dense; ++i) {
        const double t = (i + 0.5) * dt;
        out.segments[i] = Segment{dt, eval(phi_r, m_r, t), eval(phi_b, m_b, t),
                                  wf.segments.front().omega_r, wf.segments.front().omega_b};
    }
    return out;
}

}  // namespace bosonforge::optimizer
