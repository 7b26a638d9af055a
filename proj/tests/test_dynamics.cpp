#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bosonforge/dynamics.hpp"
#include "bosonforge/fock.hpp"
#include "oracles.hpp"

#include <random>

using namespace bosonforge;
using namespace bosonforge::dynamics;

namespace {

Waveform random_waveform(int n_seg, double dt, double omega, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-kPi, kPi);
    Waveform wf;
    for (int i = 0; i < n_seg; ++i)
        wf.segments.push_back({dt, uni(rng), uni(rng), omega, omega});
    return wf;
}

CMat dense_propagator(const Waveform& wf, const FockSpace& space) {
    const int d = space.hybrid_dim();
    CMat u(d, d);
    for (int c = 0; c < d; ++c) {
        CVec e = CVec::Zero(d);
        e(c) = 1.0;
        u.col(c) = propagate_unitary(wf, e);
    }
    return u;
}

}  // namespace

TEST_CASE("control hamiltonian structure") {
    FockSpace space(12);
    const double omega = kTwoPi * 2000.0;
    Segment seg{1e-5, 0.3, -0.8, omega, 0.7 * omega};
    const CMat h = control_hamiltonian(seg, space);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    // <↑,0|H|↓,1> = (Ω_r/2) e^{iφ_r}
    const Complex elem = h(space.dim + 0, 1);
    CHECK(std::abs(elem - 0.5 * omega * std::exp(kI * 0.3)) < 1e-12);

    // zero phases, equal rates: H = (Ω/√2) σx ⊗ x̂
    Segment seg0{1e-5, 0.0, 0.0, omega, omega};
    const CMat expected = (omega / std::sqrt(2.0)) *
                          fock::embed_hybrid(fock::sigma_x(), fock::position_op(space));
    CHECK((control_hamiltonian(seg0, space) - expected).cwiseAbs().maxCoeff() < 1e-12 * omega);

    // commutes with joint parity
    const CMat parity = fock::embed_hybrid(fock::sigma_z(), fock::parity_op(space));
    CHECK((h * parity - parity * h).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("unitary propagation") {
    FockSpace space(10);
    const CVec psi0 = fock::hybrid_basis(0, 1, space);

    Waveform empty;
    CHECK((propagate_unitary(empty, psi0) - psi0).norm() == 0.0);

    // single red-sideband segment: Rabi oscillation on {|↓,1>, |↑,0>}
    const double omega = kTwoPi * 2000.0;
    for (double t : {20e-6, 90e-6, 240e-6}) {
        Waveform wf;
        wf.segments.push_back({t, 0.4, 0.0, omega, 0.0});
        const CVec psi = propagate_unitary(wf, psi0);
        CHECK(std::abs(std::abs(psi(1)) - std::abs(std::cos(0.5 * omega * t))) < 1e-10);
        CHECK(std::abs(psi.norm() - 1.0) < 1e-8);
    }

    // two half-duration segments equal one full segment
    Waveform full, halves;
    full.segments.push_back({80e-6, 1.1, -0.4, omega, omega});
    halves.segments.push_back({40e-6, 1.1, -0.4, omega, omega});
    halves.segments.push_back({40e-6, 1.1, -0.4, omega, omega});
    CHECK((propagate_unitary(full, psi0) - propagate_unitary(halves, psi0)).norm() < 1e-10);
}

TEST_CASE("joint parity is conserved by any waveform") {
    FockSpace space(14);
    const CMat parity = fock::embed_hybrid(fock::sigma_z(), fock::parity_op(space));
    const Waveform wf = random_waveform(24, 6e-6, kTwoPi * 2000.0, 11);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    CVec psi0(space.hybrid_dim());
    // random state supported away from the truncation edge
    for (int i = 0; i < space.hybrid_dim(); ++i)
        psi0(i) = (i % space.dim < 8) ? Complex(gauss(rng), gauss(rng)) : 0.0;
    psi0.normalize();
    const CVec psi = propagate_unitary(wf, psi0);
    const double before = std::real(fock::expectation(parity, psi0));
    const double after = std::real(fock::expectation(parity, psi));
    CHECK(std::abs(after - before) < 1e-8);
}

TEST_CASE("segment propagator is unitary") {
    FockSpace space(8);
    Waveform wf;
    wf.segments.push_back({35e-6, 0.9, 2.1, kTwoPi * 2000.0, kTwoPi * 2000.0});
    const CMat u = dense_propagator(wf, space);
    CHECK((u.adjoint() * u - CMat::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("detuned propagation") {
    FockSpace space(10);
    const Waveform wf = random_waveform(10, 8e-6, kTwoPi * 2000.0, 21);
    const CVec psi0 = fock::hybrid_basis(0, 0, space);
    CHECK((propagate_detuned(wf, 0.0, psi0) - propagate_unitary(wf, psi0)).norm() < 1e-12);

    // zero-amplitude drive: detuning does nothing to |↓,0>
    Waveform silent;
    silent.segments.push_back({50e-6, 0.0, 0.0, 0.0, 0.0});
    const CVec psi = propagate_detuned(silent, kTwoPi * 500.0, psi0);
    CHECK((psi - psi0).norm() < 1e-12);
}

TEST_CASE("master equation: closed-system limit") {
    FockSpace space(8);
    const Waveform wf = random_waveform(6, 10e-6, kTwoPi * 2000.0, 31);
    CVec psi0 = fock::hybrid_basis(0, 0, space);
    const CVec psi = propagate_unitary(wf, psi0);
    const CMat rho =
        propagate_master(wf, NoiseModel(0.0, 0.0, 0.0), psi0 * psi0.adjoint(), space);
    CHECK((rho - psi * psi.adjoint()).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("master equation: pure dephasing channel") {
    FockSpace space(10);
    const double gamma = 25.0;
    const double t = 1.0 / gamma;
    CVec alpha_state(space.dim);
    const Complex alpha(1.1, 0.0);
    for (int n = 0; n < space.dim; ++n)
        alpha_state(n) = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) /
                         std::sqrt(std::tgamma(n + 1.0));
    alpha_state.normalize();
    const CMat rho0 = alpha_state * alpha_state.adjoint();
    Waveform silent;
    silent.segments.push_back({t, 0.0, 0.0, 0.0, 0.0});
    const CMat rho = propagate_master(silent, NoiseModel(gamma, 0.0, 0.0), rho0, space);
    double worst = 0.0;
    for (int m = 0; m < space.dim; ++m)
        for (int n = 0; n < space.dim; ++n)
            worst = std::max(worst, std::abs(rho(m, n) -
                                             rho0(m, n) *
                                                 oracles::dephasing_factor(gamma, m, n, t)));
    CHECK(worst < 1e-10);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-10);
}

TEST_CASE("master equation invariants under drive and noise") {
    FockSpace space(10);
    const Waveform wf = random_waveform(8, 12e-6, kTwoPi * 2000.0, 41);
    const CVec psi0 = fock::hybrid_basis(0, 0, space);
    const NoiseModel noise(40.0, kTwoPi * 30.0, 0.0);
    const CMat rho = propagate_master(wf, noise, psi0 * psi0.adjoint(), space);

    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-7);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::SelfAdjointEigenSolver<CMat> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-6);

    // purity never grows along the trajectory
    double purity_prev = 1.0;
    CMat state = psi0 * psi0.adjoint();
    for (const auto& seg : wf.segments) {
        Waveform one;
        one.segments.push_back(seg);
        state = propagate_master(one, noise, state, space);
        const double purity = std::real((state * state).trace());
        CHECK(purity <= purity_prev + 1e-9);
        purity_prev = purity;
    }
}

TEST_CASE("master equation: sub-step refinement is converged") {
    FockSpace space(8);
    const CVec psi0 = fock::hybrid_basis(0, 0, space);
    const CMat rho0 = psi0 * psi0.adjoint();
    const Waveform wf = random_waveform(4, 15e-6, kTwoPi * 2000.0, 51);
    const NoiseModel noise(30.0, kTwoPi * 20.0, 0.0);
    const CMat coarse = propagate_master(wf, noise, rho0, space);
    Waveform fine;
    for (const auto& seg : wf.segments) {
        Segment h = seg;
        h.dt = seg.dt / 2.0;
        fine.segments.push_back(h);
        fine.segments.push_back(h);
    }
    const CMat refined = propagate_master(fine, noise, rho0, space);
    CHECK((coarse - refined).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("thermal state") {
    FockSpace space(40);
    const CMat ground = thermal_state(0.0, space);
    CHECK(std::abs(ground(0, 0).real() - 1.0) < 1e-15);

    const CMat th = thermal_state(0.05, space);
    CHECK(std::abs(th(0, 0).real() - 1.0 / 1.05) < 1e-10);
    CHECK(std::abs(th.trace().real() - 1.0) < 1e-12);
    double nbar = 0.0;
    for (int n = 0; n < space.dim; ++n) nbar += n * th(n, n).real();
    CHECK(std::abs(nbar - 0.05) < 1e-4);
}

TEST_CASE("beyond-Lamb-Dicke hamiltonian") {
    FockSpace space(12);
    LambDickeParams params;
    params.eta = 0.083;
    params.taylor_order = 4;
    const double omega_sb = kTwoPi * 2000.0;
    Segment seg{5e-6, 0.7, -0.3, omega_sb, omega_sb};

    const CMat h = lamb_dicke_hamiltonian(3.7e-7, seg, params, space);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-9);

    // order-1, stationary harmonic only: equals the control Hamiltonian
    LambDickeParams p1 = params;
    p1.taylor_order = 1;
    const CMat h_rwa = lamb_dicke_hamiltonian(1.3e-6, seg, p1, space, true);
    CHECK((h_rwa - control_hamiltonian(seg, space)).cwiseAbs().maxCoeff() < 1e-12 * omega_sb);

    // η → 0 single tone: pure carrier (Ω/2)(σ⁺ e^{i(φ−Δω_L t)} + h.c.)
    LambDickeParams p0 = params;
    p0.eta = 1e-300;
    p0.delta_omega_l = kTwoPi * 1000.0;
    const double t = 2.3e-6, phi = 0.9, omega_c = kTwoPi * 24000.0;
    const CMat carrier = lamb_dicke_interaction(t, omega_c, phi, p0, space);
    CMat expected = CMat::Zero(space.hybrid_dim(), space.hybrid_dim());
    const Complex c = 0.5 * omega_c * std::exp(kI * (phi - p0.delta_omega_l * t));
    for (int n = 0; n < space.dim; ++n) {
        expected(space.dim + n, n) = c;
        expected(n, space.dim + n) = std::conj(c);
    }
    CHECK((carrier - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("beyond-Lamb-Dicke propagation is step-converged and near-nominal") {
    FockSpace space(10);
    LambDickeParams params;  // η = 0.083, ω_r = 2π × 1.33 MHz, order 4
    const double omega_sb = kTwoPi * 2000.0;
    const Waveform wf = random_waveform(4, 30e-6, omega_sb, 61);

    const CVec psi0 = fock::hybrid_basis(0, 0, space);
    const CVec a = propagate_lamb_dicke(wf, params, psi0, 24);
    const CVec b = propagate_lamb_dicke(wf, params, psi0, 48);
    const CVec c = propagate_lamb_dicke(wf, params, psi0, 96);
    const double err_a = (a - c).norm(), err_b = (b - c).norm();
    CHECK(err_b < 2e-5);
    CHECK(err_a / err_b > 3.0);  // second-order stepping
    CHECK(err_a / err_b < 5.5);

    // the stationary first-order content tracks the nominal sideband dynamics
    const CVec nominal = propagate_unitary(wf, psi0);
    CHECK(std::abs(std::norm(nominal.dot(a)) - 1.0) < 0.05);
}
