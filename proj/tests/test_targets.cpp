#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bosonforge/fock.hpp"
#include "bosonforge/targets.hpp"

using namespace bosonforge;
using namespace bosonforge::targets;

namespace {

double parity_expectation(const CVec& psi) {
    double p = 0.0;
    for (Eigen::Index n = 0; n < psi.size(); ++n)
        p += (n % 2 == 0 ? 1.0 : -1.0) * std::norm(psi(n));
    return p;
}

}  // namespace

TEST_CASE("squeezed vacuum") {
    FockSpace space(64);
    const CVec vac = squeezed_vacuum(SqueezeSpec(0.0), space);
    CHECK(std::abs(vac(0) - 1.0) < 1e-14);

    CHECK(SqueezeSpec(1.55).squeezing_db() == doctest::Approx(13.46).epsilon(1e-3));

    const CVec s = squeezed_vacuum(SqueezeSpec(0.5), space);
    const double ratio = std::norm(s(2)) / std::norm(s(0));
    CHECK(ratio == doctest::Approx(std::tanh(0.5) * std::tanh(0.5) / 2.0).epsilon(1e-10));
    for (Eigen::Index n = 1; n < space.dim; n += 2) CHECK(std::abs(s(n)) == 0.0);

    CHECK_THROWS_AS(squeezed_vacuum(SqueezeSpec(2.5), FockSpace(12)), TruncationError);
}

TEST_CASE("gkp spec constants") {
    const GkpSpec sq(GkpLattice::square, 0, 0.301);
    CHECK(std::abs(sq.alpha() - std::sqrt(kPi / 2.0)) < 1e-15);
    CHECK(std::abs(sq.beta() - kI * std::sqrt(kPi / 2.0)) < 1e-15);
    CHECK(sq.squeezing_db() == doctest::Approx(10.43).epsilon(1e-3));
    CHECK(GkpSpec(GkpLattice::square, 0, 0.247).squeezing_db() ==
          doctest::Approx(12.15).epsilon(1e-3));

    const GkpSpec hex(GkpLattice::hexagonal, 1, 0.301);
    const Complex comm =
        hex.beta() * std::conj(hex.alpha()) - std::conj(hex.beta()) * hex.alpha();
    CHECK(std::abs(comm - kI * kPi) < 1e-12);
}

TEST_CASE("gkp code words") {
    FockSpace space(150);
    const GkpSpec spec0(GkpLattice::square, 0, 0.247);
    const GkpSpec spec1(GkpLattice::square, 1, 0.247);
    const CVec mu0 = gkp_state(spec0, space);
    const CVec mu1 = gkp_state(spec1, space);
    CHECK(mu0.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mu0.dot(mu1)) < 1e-3);

    // lattice-sum convergence: widening the range must not move the state
    const CVec mu0_wide = gkp_state(spec0, space, 1);
    CHECK((mu0 - mu0_wide).norm() < 1e-10);

    const CVec hex = gkp_state(GkpSpec(GkpLattice::hexagonal, 0, 0.301), space);
    CHECK(hex.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const CVec hex_wide = gkp_state(GkpSpec(GkpLattice::hexagonal, 0, 0.301), space, 1);
    CHECK((hex - hex_wide).norm() < 1e-10);
}

TEST_CASE("binomial code words") {
    FockSpace space(16);
    const CVec pz1 = binomial_state(BinomialSpec(1, 1, BinomialLogical::plus_z), space);
    CHECK(std::abs(pz1(0) - 1.0 / std::sqrt(2.0)) < 1e-14);
    CHECK(std::abs(pz1(4) - 1.0 / std::sqrt(2.0)) < 1e-14);

    const CVec pz2 = binomial_state(BinomialSpec(2, 2, BinomialLogical::plus_z), space);
    CHECK(std::abs(pz2(0) - 0.5) < 1e-14);
    CHECK(std::abs(pz2(6) - std::sqrt(3.0) / 2.0) < 1e-14);

    const CVec mz2 = binomial_state(BinomialSpec(2, 2, BinomialLogical::minus_z), space);
    CHECK(std::abs(mz2(3) - std::sqrt(3.0) / 2.0) < 1e-14);
    CHECK(std::abs(mz2(9) - 0.5) < 1e-14);

    CHECK_THROWS_AS(binomial_state(BinomialSpec(2, 2, BinomialLogical::minus_z), FockSpace(9)),
                    DimensionMismatch);
}

TEST_CASE("every target is a parity eigenstate") {
    FockSpace space(150);
    CHECK(parity_expectation(squeezed_vacuum(SqueezeSpec(1.55), FockSpace(200))) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(parity_expectation(gkp_state(GkpSpec(GkpLattice::square, 0, 0.301), space)) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(parity_expectation(gkp_state(GkpSpec(GkpLattice::square, 1, 0.301), space)) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(parity_expectation(gkp_state(GkpSpec(GkpLattice::hexagonal, 0, 0.301), space)) ==
          doctest::Approx(1.0).epsilon(1e-10));
    FockSpace small(16);
    CHECK(parity_expectation(binomial_state(BinomialSpec(1, 1, BinomialLogical::plus_z),
                                            small)) == doctest::Approx(1.0));
    CHECK(parity_expectation(binomial_state(BinomialSpec(2, 2, BinomialLogical::plus_z),
                                            small)) == doctest::Approx(1.0));
    CHECK(parity_expectation(binomial_state(BinomialSpec(2, 2, BinomialLogical::minus_z),
                                            small)) == doctest::Approx(-1.0));
}

TEST_CASE("stabilizer expectations grow toward 1 as the envelope shrinks") {
    FockSpace space(200);
    double previous = 0.0;
    for (double delta : {0.4, 0.301, 0.247, 0.2}) {
        const GkpSpec spec(GkpLattice::square, 0, delta);
        const CVec psi = gkp_state(spec, space);
        const Complex sx = psi.dot(fock::apply_displacement(2.0 * spec.alpha(), psi));
        const Complex sz = psi.dot(fock::apply_displacement(2.0 * spec.beta(), psi));
        CHECK(std::abs(std::imag(sx)) < 1e-8);
        CHECK(std::real(sx) > 0.0);
        CHECK(std::real(sz) > 0.0);
        CHECK(std::real(sx) > previous);
        CHECK(std::real(sx) < 1.0);
        previous = std::real(sx);
    }
}
