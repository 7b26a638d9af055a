#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bosonforge/optimizer.hpp"
#include "bosonforge/fock.hpp"
#include "bosonforge/targets.hpp"
#include "oracles.hpp"

#include <random>

using namespace bosonforge;
using namespace bosonforge::optimizer;

namespace {

PulseAnsatz random_ansatz(int n_seg, double duration, std::uint64_t seed,
                          int n_out = 0) {
    PulseAnsatz a;
    a.n_seg_opt = n_seg;
    a.n_seg_out = n_out > 0 ? n_out : n_seg * 2;
    a.duration = duration;
    a.params.resize(2 * n_seg);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-kPi, kPi);
    for (int i = 0; i < a.params.size(); ++i) a.params(i) = uni(rng);
    return a;
}

}  // namespace

TEST_CASE("build_waveform passes DC exactly") {
    PulseAnsatz a = random_ansatz(30, 8e-4, 1, 90);
    a.params.head(30).setConstant(0.7);
    a.params.tail(30).setConstant(-1.2);
    ConstraintConfig cc;
    const auto wf = build_waveform(a, cc);
    CHECK(int(wf.segments.size()) == 90);
    for (const auto& s : wf.segments) {
        CHECK(s.phi_r == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(s.phi_b == doctest::Approx(-1.2).epsilon(1e-12));
    }
    CHECK(wf.total_duration() == doctest::Approx(8e-4).epsilon(1e-12));
}

TEST_CASE("slew-rate clamp saturates a step exactly") {
    RVec phi = RVec::Zero(20);
    const double step_limit = kTwoPi * 267.0 / 20.0;
    phi(1) = 120.0;  // exceeds the per-step limit
    REQUIRE(120.0 > step_limit);
    const RVec hard = slew_clamp(phi, step_limit, true);
    CHECK(hard(1) - hard(0) == doctest::Approx(step_limit).epsilon(1e-12));

    // within the limit the chain is the identity
    RVec small = 0.1 * RVec::Ones(20);
    small(4) = 0.3;
    CHECK((slew_clamp(small, step_limit, true) - small).cwiseAbs().maxCoeff() < 1e-12);

    // the smooth variant never exceeds the hard limit
    const RVec soft = slew_clamp(phi, step_limit, false);
    for (int i = 1; i < 20; ++i) CHECK(std::abs(soft(i) - soft(i - 1)) <= step_limit);
}

TEST_CASE("filter suppresses content above the cutoff") {
    // white-noise phases in; compare output spectrum at 2 f_c vs 0.2 f_c
    const int n_in = 90, n_out = 240;
    PulseAnsatz a = random_ansatz(n_in, 1e-3, 3, n_out);
    a.params *= 0.2;  // keep steps inside the slew limit
    ConstraintConfig cc;
    const auto wf = build_waveform(a, cc);

    // DFT of the output phi_r sequence at frequency f (cycles per pulse)
    auto spectrum_mag = [&](double cycles) {
        Complex acc = 0.0;
        for (int i = 0; i < n_out; ++i) {
            const double t = (i + 0.5) / n_out;
            acc += wf.segments[i].phi_r * std::exp(-kTwoPi * kI * cycles * t);
        }
        return std::abs(acc) / n_out;
    };
    // f_c×T = 2π·15 → 15 cycles per pulse
    const double low = spectrum_mag(3.0);    // 0.2 f_c
    const double high = spectrum_mag(30.0);  // 2 f_c
    CHECK(high <= 0.05 * low);
}

TEST_CASE("cost basics") {
    FockSpace space(12);
    const CVec vac = fock::vacuum(space);
    CostConfig cost_cfg;
    cost_cfg.epsilon = 0.0;
    RobustnessConfig plain{0.0, 0};
    ConstraintConfig cc;

    // zero-amplitude drive keeps |↓,0>: a vacuum target is prepared perfectly
    PulseAnsatz idle = random_ansatz(10, 3e-4, 4, 20);
    idle.omega = 0.0;
    CHECK(cost(idle, vac, cost_cfg, plain, cc) == doctest::Approx(0.0).epsilon(1e-12));

    // same idle pulse against (|0>+|4>)/√2: C = 1 − 1/2
    const CVec bin = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), space);
    CHECK(cost(idle, bin, cost_cfg, plain, cc) == doctest::Approx(0.5).epsilon(1e-12));

    // ε-term adds ε·T/T_max and has zero phase gradient
    cost_cfg.epsilon = 0.05;
    const double with_eps = cost(idle, bin, cost_cfg, plain, cc);
    CHECK(with_eps == doctest::Approx(0.5 + 0.05 * 3e-4 / cost_cfg.t_max).epsilon(1e-12));
}

TEST_CASE("adjoint gradient matches central finite differences") {
    FockSpace space(20);
    const CVec target = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), space);
    CostConfig cost_cfg;  // ε = 0.05
    ConstraintConfig cc;  // slew + filter enabled: gradient flows through them
    RobustnessConfig robust{kTwoPi * 75.0, 1};

    PulseAnsatz a = random_ansatz(10, 4e-4, 5, 24);
    const RVec g = gradient(a, target, cost_cfg, robust, cc);

    auto f = [&](const RVec& x) {
        PulseAnsatz b = a;
        b.params = x;
        return cost(b, target, cost_cfg, robust, cc);
    };
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> pick(0, int(a.params.size()) - 1);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int i = pick(rng);
        RVec xp = a.params, xm = a.params;
        xp(i) += 1e-6;
        xm(i) -= 1e-6;
        const double fd = (f(xp) - f(xm)) / 2e-6;
        const double scale = std::max({std::abs(fd), std::abs(g(i)), 1e-8});
        worst_rel = std::max(worst_rel, std::abs(fd - g(i)) / scale);
    }
    CHECK(worst_rel < 1e-5);
}

TEST_CASE("optimizer prepares the small binomial code word") {
    FockSpace space(12);
    const targets::BinomialSpec bin(1, 1, targets::BinomialLogical::plus_z);
    OptimizeConfig cfg;
    cfg.robust.n = 0;
    cfg.n_seg_opt = 24;
    cfg.n_seg_out = 64;
    cfg.n_starts = 3;
    cfg.max_iterations = 400;
    cfg.duration_grid_s = {5e-4};
    const auto pulse = optimize(bin, space, cfg, 42);

    CHECK(pulse.f_th > 0.99);
    CHECK(pulse.duration == doctest::Approx(5e-4));
    CHECK(pulse.cost < 2.0 * cfg.cost.epsilon);

    // cost trace is the best-so-far sequence: non-increasing
    for (size_t i = 1; i < pulse.cost_trace.size(); ++i)
        CHECK(pulse.cost_trace[i] <= pulse.cost_trace[i - 1] + 1e-15);

    // duration penalty discipline: converged means 1 − f ≲ ε
    CHECK(1.0 - pulse.f_th <= cfg.cost.epsilon + 1e-3);

    // first-order optimality at the returned parameters
    PulseAnsatz a;
    a.n_seg_opt = cfg.n_seg_opt;
    a.n_seg_out = cfg.n_seg_out;
    a.omega = cfg.omega;
    a.duration = pulse.duration;
    a.params = pulse.opt_params;
    const CVec target = targets::binomial_state(bin, space);
    const RVec g = gradient(a, target, cfg.cost, cfg.robust, cfg.constraints);
    CHECK(g.lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("optimize is deterministic for a fixed seed") {
    FockSpace space(10);
    const targets::BinomialSpec bin(1, 1, targets::BinomialLogical::plus_z);
    OptimizeConfig cfg;
    cfg.robust.n = 0;
    cfg.n_seg_opt = 16;
    cfg.n_seg_out = 32;
    cfg.n_starts = 2;
    cfg.max_iterations = 150;
    cfg.duration_grid_s = {5e-4};
    const auto p1 = optimize(bin, space, cfg, 7);
    const auto p2 = optimize(bin, space, cfg, 7);
    CHECK(p1.f_th == p2.f_th);
    CHECK(p1.cost == p2.cost);
    CHECK(p1.iterations == p2.iterations);
    CHECK((p1.opt_params - p2.opt_params).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("optimize throws NonConvergence when the budget is hopeless") {
    FockSpace space(16);
    const targets::BinomialSpec hard(2, 2, targets::BinomialLogical::plus_z);
    OptimizeConfig cfg;
    cfg.robust.n = 0;
    cfg.n_starts = 1;
    cfg.max_iterations = 2;
    cfg.n_seg_opt = 16;
    cfg.n_seg_out = 32;
    cfg.duration_grid_s = {2e-5};  // far too short to reach |0>+√3|6>
    CHECK_THROWS_AS(optimize(hard, space, cfg, 9), NonConvergence);
}

TEST_CASE("spline export") {
    // constant waveform stays constant
    dynamics::Waveform flat;
    for (int i = 0; i < 8; ++i)
        flat.segments.push_back({1e-5, 0.4, -0.2, kTwoPi * 2000.0, kTwoPi * 2000.0});
    const auto dense_flat = spline_export(flat, 3.0 * 8 / 8e-5);
    for (const auto& s : dense_flat.segments) {
        CHECK(s.phi_r == doctest::Approx(0.4).epsilon(1e-12));
        CHECK(s.phi_b == doctest::Approx(-0.2).epsilon(1e-12));
    }

    // dense samples reproduce the knot values where they coincide
    PulseAnsatz a = random_ansatz(30, 6e-4, 8, 90);
    a.params *= 0.3;
    const auto wf = build_waveform(a, ConstraintConfig{});
    const int n = int(wf.segments.size());
    const auto dense = spline_export(wf, 3.0 * n / wf.total_duration());
    for (int k = 0; k < n; ++k) {
        const int i = 3 * k + 1;  // dense midpoint coinciding with knot k
        CHECK(std::abs(dense.segments[i].phi_r - wf.segments[k].phi_r) < 1e-12);
        CHECK(std::abs(dense.segments[i].phi_b - wf.segments[k].phi_b) < 1e-12);
    }

    // re-simulated fidelity changes negligibly under interpolation
    FockSpace space(14);
    CVec psi0 = fock::hybrid_basis(0, 0, space);
    const CVec orig = dynamics::propagate_unitary(wf, psi0);
    const CVec fine = dynamics::propagate_unitary(dense, psi0);
    CHECK(1.0 - std::norm(orig.dot(fine)) < 1e-3);

    CHECK_THROWS_AS(spline_export(dynamics::Waveform{}, 1e6), std::invalid_argument);
}
