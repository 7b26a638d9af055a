#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bosonforge/fock.hpp"
#include "bosonforge/targets.hpp"
#include "bosonforge/tomography.hpp"
#include "oracles.hpp"

#include <random>

using namespace bosonforge;
using namespace bosonforge::tomography;

namespace {

CMat random_density(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    CMat g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
    CMat rho = g * g.adjoint();
    rho /= rho.trace().real();
    return rho;
}

}  // namespace

TEST_CASE("exact characteristic function") {
    FockSpace space(48);
    const CVec vac = fock::vacuum(space);
    for (Complex beta : {Complex(0.5, 0.2), Complex(-1.0, 1.3)}) {
        CHECK(std::abs(chi_exact(vac, beta) - std::exp(-0.5 * std::norm(beta))) < 1e-10);
    }
    const CMat th = 0.5 * (fock::vacuum(space) * fock::vacuum(space).adjoint()) +
                    0.5 * (fock::fock_state(1, space) * fock::fock_state(1, space).adjoint());
    CHECK(std::abs(chi_exact(th, Complex(0, 0)) - 1.0) < 1e-14);
}

TEST_CASE("chi of the squeezed state matches the analytic form") {
    FockSpace space(256);
    const double r = 1.55;
    const CVec sq = targets::squeezed_vacuum(targets::SqueezeSpec(r), space);
    for (Complex beta : {Complex(0.4, 0.0), Complex(0.0, 2.5), Complex(0.3, 1.7),
                         Complex(0.15, 2.9)}) {
        CHECK(std::abs(chi_exact(sq, beta) - oracles::chi_squeezed(r, beta)) < 1e-8);
    }
}

TEST_CASE("chi magnitude never exceeds one") {
    FockSpace space(24);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 3; ++trial) {
        const CMat rho = random_density(space.dim, 100 + trial);
        for (int p = 0; p < 12; ++p) {
            const Complex beta(uni(rng), uni(rng));
            CHECK(std::abs(chi_exact(rho, beta)) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("sdf measurement reproduces Re chi") {
    FockSpace space(60);
    SdfConfig cfg;  // Ω = 2π×2 kHz, no noise, infinite shots

    // β = 0 gives exactly 1 for a |↓>⊗ψ input
    const CVec sq = targets::squeezed_vacuum(targets::SqueezeSpec(0.9), space);
    const auto origin = sdf_measure(sq, Complex(0, 0), cfg, space, 1);
    CHECK(origin.re_chi == 1.0);

    for (Complex beta : {Complex(0.8, 0.0), Complex(0.0, 1.4), Complex(0.9, 0.7)}) {
        const auto pt = sdf_measure(sq, beta, cfg, space, 1);
        CHECK(std::abs(pt.re_chi - std::real(chi_exact(sq, beta))) < 1e-8);
    }
}

TEST_CASE("sdf shot sampling is binomial around the analytic value") {
    FockSpace space(24);
    SdfConfig cfg;
    cfg.shots = 100000;
    const CVec vac = fock::vacuum(space);
    const auto pt = sdf_measure(vac, Complex(1.0, 0.0), cfg, space, 12345);
    REQUIRE(pt.has_shots());
    CHECK(pt.m_total == 100000);
    const double expected = std::exp(-0.5);
    const double p = (1.0 + expected) / 2.0;
    const double sigma = 2.0 * std::sqrt(p * (1.0 - p) / 100000.0);
    CHECK(std::abs(pt.re_chi - expected) < 3.0 * sigma);
    CHECK(pt.re_chi == 2.0 * double(pt.m_bright) / double(pt.m_total) - 1.0);
}

TEST_CASE("symmetrize and restrict") {
    ChiGrid quad = make_quadrant_grid(25, 3.0, 1.0);
    CHECK(int(quad.points.size()) == 625);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& p : quad.points) p.re_chi = uni(rng);

    const ChiGrid full = symmetrize(quad);
    CHECK(int(full.points.size()) == 49 * 49);  // 2401

    // value copied to all four reflections
    const Complex probe(1.25, 2.0);
    double ref = 0.0;
    for (const auto& p : quad.points)
        if (std::abs(p.beta - probe) < 1e-12) ref = p.re_chi;
    int found = 0;
    for (const auto& p : full.points) {
        for (Complex image : {probe, -probe, std::conj(probe), -std::conj(probe)}) {
            if (std::abs(p.beta - image) < 1e-12) {
                CHECK(p.re_chi == ref);
                ++found;
            }
        }
    }
    CHECK(found == 4);

    // symmetrize ∘ restrict is the identity on a symmetric grid
    const ChiGrid back = symmetrize(restrict_quadrant(full));
    REQUIRE(back.points.size() == full.points.size());
    for (size_t i = 0; i < full.points.size(); ++i) {
        CHECK(std::abs(back.points[i].beta - full.points[i].beta) < 1e-12);
        CHECK(back.points[i].re_chi == full.points[i].re_chi);
    }

    ChiGrid flagged = quad;
    flagged.symmetric = false;
    CHECK_THROWS_AS(symmetrize(flagged), SymmetryViolation);
}

TEST_CASE("reconstruction round trips exact data") {
    // vacuum
    {
        FockSpace space(16);
        const CVec vac = fock::vacuum(space);
        ChiGrid grid = symmetrize(exact_grid(vac, make_quadrant_grid(9, 2.5, 1.0)));
        const auto res = reconstruct_density(grid, 12);
        CHECK(fock::state_fidelity(res.rho, fock::vacuum(FockSpace(12))) > 0.9999);
        CHECK(res.residual_rms < 1e-4);
    }
    // binomial (|0>+|4>)/√2
    {
        FockSpace space(24);
        const CVec bin = targets::binomial_state(
            targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), space);
        ChiGrid grid = symmetrize(exact_grid(bin, make_quadrant_grid(13, 3.0, 1.0)));
        const auto res = reconstruct_density(grid, 16);
        const CVec target = targets::binomial_state(
            targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), FockSpace(16));
        CHECK(fock::state_fidelity(res.rho, target) > 0.999);

        // even-parity input: odd-Fock populations stay small
        double odd = 0.0;
        for (int n = 1; n < 16; n += 2) odd += std::real(res.rho(n, n));
        CHECK(odd < 1e-2);
    }
}

TEST_CASE("reconstruction residual does not grow under grid refinement") {
    FockSpace space(20);
    const CVec bin = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), space);
    const ChiGrid coarse = symmetrize(exact_grid(bin, make_quadrant_grid(9, 3.0, 1.0)));
    const ChiGrid fine = symmetrize(exact_grid(bin, make_quadrant_grid(17, 3.0, 1.0)));
    const auto res_c = reconstruct_density(coarse, 12);
    const auto res_f = reconstruct_density(fine, 12);
    CHECK(res_f.residual_rms <= res_c.residual_rms + 1e-6);
}

TEST_CASE("reconstruction guards") {
    FockSpace space(16);
    const CVec vac = fock::vacuum(space);
    const ChiGrid tiny = exact_grid(vac, make_quadrant_grid(3, 1.0, 1.0));
    CHECK_THROWS_AS(reconstruct_density(tiny, 20), IllPosed);
}

TEST_CASE("dimension escalation stabilizes the fidelity") {
    FockSpace space(24);
    const CVec bin = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), space);
    const ChiGrid grid = symmetrize(exact_grid(bin, make_quadrant_grid(13, 3.0, 1.0)));
    const CVec target = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), FockSpace(8));
    const auto res = reconstruct_escalating(grid, target, 8, 4);
    CHECK(res.rho.rows() >= 8);
    const CVec t_final = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z),
        FockSpace(int(res.rho.rows())));
    CHECK(fock::state_fidelity(res.rho, t_final) > 0.995);
}

TEST_CASE("bootstrap") {
    // zero-variance shots: σ = 0
    ChiGrid grid = make_quadrant_grid(3, 1.0, 1.0);
    for (auto& p : grid.points) {
        p.m_bright = 400;
        p.m_total = 400;
        p.re_chi = 1.0;
    }
    const auto flat =
        bootstrap(grid, 50, 400, [](const ChiGrid& g) { return g.points[0].re_chi; }, 1);
    CHECK(flat.sigma == 0.0);

    // p = 1/2 point: σ of re_chi ≈ 2·√(0.25/400) = 0.05
    for (auto& p : grid.points) {
        p.m_bright = 200;
        p.m_total = 400;
        p.re_chi = 0.0;
    }
    const auto half =
        bootstrap(grid, 400, 400, [](const ChiGrid& g) { return g.points[4].re_chi; }, 2);
    CHECK(std::abs(half.sigma - 0.05) < 0.01);

    ChiGrid no_shots = make_quadrant_grid(3, 1.0, 1.0);
    CHECK_THROWS_AS(bootstrap(no_shots, 10, 400,
                              [](const ChiGrid& g) { return g.points[0].re_chi; }, 3),
                    MissingShots);
}

TEST_CASE("bootstrap sigma tracks the spread over independent datasets") {
    FockSpace space(20);
    const CVec bin = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), space);
    const int recon_dim = 10;
    const CVec target = targets::binomial_state(
        targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z), FockSpace(recon_dim));
    const ChiGrid spec_grid = make_quadrant_grid(9, 3.0, 1.0);
    SdfConfig cfg;
    cfg.shots = 500;

    auto fidelity_of = [&](const ChiGrid& quadrant) {
        const auto full = symmetrize(quadrant);
        return fock::state_fidelity(reconstruct_density(full, recon_dim).rho, target);
    };

    // independent synthetic datasets
    std::vector<double> fids;
    for (int k = 0; k < 20; ++k)
        fids.push_back(fidelity_of(measure_grid(bin, space, spec_grid, cfg, 1000 + k)));
    double mean = 0.0;
    for (double f : fids) mean += f;
    mean /= fids.size();
    double var = 0.0;
    for (double f : fids) var += (f - mean) * (f - mean);
    const double spread = std::sqrt(var / (fids.size() - 1));

    // bootstrap from a single dataset
    const ChiGrid one = measure_grid(bin, space, spec_grid, cfg, 77);
    const auto bs = bootstrap(one, 100, 500,
                              [&](const ChiGrid& g) { return fidelity_of(g); }, 5);
    CHECK(bs.sigma > 0.5 * spread);
    CHECK(bs.sigma < 1.5 * spread);
}

TEST_CASE("wigner function") {
    FockSpace space(24);
    RVec xs(41), ps(41);
    for (int i = 0; i < 41; ++i) xs(i) = -4.0 + 0.2 * i;
    ps = xs;

    const CVec vac = fock::vacuum(space);
    const RMat w_vac = wigner(vac * vac.adjoint(), xs, ps);
    CHECK(std::abs(w_vac(20, 20) - 1.0 / kPi) < 1e-6);

    const CVec one = fock::fock_state(1, space);
    const RMat w_one = wigner(one * one.adjoint(), xs, ps);
    CHECK(std::abs(w_one(20, 20) + 1.0 / kPi) < 1e-6);

    // normalization on a wide grid
    double total = 0.0;
    for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 41; ++j) total += w_one(i, j) * 0.2 * 0.2;
    CHECK(std::abs(total - 1.0) < 1e-3);
}

TEST_CASE("gkp wigner marginals peak on the √π grid") {
    FockSpace space(150);
    const targets::GkpSpec spec(targets::GkpLattice::square, 0, 0.301);
    const CVec psi = targets::gkp_state(spec, space);
    const CMat rho = psi * psi.adjoint();

    const double root_pi = std::sqrt(kPi);
    RVec xs(241);
    for (int i = 0; i < 241; ++i) xs(i) = -6.0 + 0.05 * i;
    const RVec px = position_marginal(rho, xs);

    // peaks of P(x) sit at even multiples of √π for the μ = 0 square code
    auto value_at = [&](double x) {
        int best = 0;
        for (int i = 0; i < xs.size(); ++i)
            if (std::abs(xs(i) - x) < std::abs(xs(best) - x)) best = i;
        return px(best);
    };
    const double peak0 = value_at(0.0);
    const double peak2 = value_at(2.0 * root_pi);
    const double valley = value_at(root_pi);
    CHECK(peak0 > 4.0 * valley);
    CHECK(peak2 > 4.0 * valley);

    // the dual marginal comes out of the Wigner function: peaks every √π
    RVec ps(141);
    for (int i = 0; i < 141; ++i) ps(i) = -3.5 + 0.05 * i;
    RVec xw(241);
    xw = xs;
    const RMat w = wigner(rho, xw, ps);
    RVec pp = RVec::Zero(141);
    for (int j = 0; j < 141; ++j) {
        for (int i = 0; i < 241; ++i) pp(j) += w(i, j) * 0.05;
    }
    auto pvalue_at = [&](double p) {
        int best = 0;
        for (int i = 0; i < ps.size(); ++i)
            if (std::abs(ps(i) - p) < std::abs(ps(best) - p)) best = i;
        return pp(best);
    };
    CHECK(pvalue_at(root_pi) > 2.0 * pvalue_at(0.5 * root_pi));
}

TEST_CASE("wigner field is the Fourier dual of the chi field") {
    FockSpace space(60);
    // low-order superposition whose χ support fits the |β| <= 4 window
    CVec psi = CVec::Zero(space.dim);
    psi(0) = 1.0;
    psi(1) = Complex(0.8, 0.2);
    psi(2) = 0.4;
    psi.normalize();
    const CMat rho = psi * psi.adjoint();

    // χ on a symmetric grid |Re β|, |Im β| ≤ 4
    const int nb = 97;
    const double db = 8.0 / (nb - 1);
    CMat chi(nb, nb);
    for (int i = 0; i < nb; ++i)
        for (int j = 0; j < nb; ++j) {
            const Complex beta(-4.0 + i * db, -4.0 + j * db);
            chi(i, j) = chi_exact(psi, beta);
        }

    // W(x,p) = (1/2π²) ∫ d²β χ(β) e^{i√2 (p Re β − x Im β)}
    RVec xs(25), ps(25);
    for (int i = 0; i < 25; ++i) xs(i) = -3.0 + 0.25 * i;
    ps = xs;
    RMat w_from_chi(25, 25);
    for (int a = 0; a < 25; ++a) {
        for (int b = 0; b < 25; ++b) {
            Complex acc = 0.0;
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j) {
                    const double br = -4.0 + i * db, bi = -4.0 + j * db;
                    acc += chi(i, j) *
                           std::exp(kI * std::sqrt(2.0) * (ps(b) * br - xs(a) * bi));
                }
            w_from_chi(a, b) = std::real(acc) * db * db / (2.0 * kPi * kPi);
        }
    }

    const RMat w_direct = wigner(rho, xs, ps);
    const double scale = w_direct.cwiseAbs().maxCoeff();
    double rms = 0.0;
    for (int a = 0; a < 25; ++a)
        for (int b = 0; b < 25; ++b) {
            const double d = w_from_chi(a, b) - w_direct(a, b);
            rms += d * d;
        }
    rms = std::sqrt(rms / (25.0 * 25.0));
    CHECK(rms < 0.02 * scale);
}
