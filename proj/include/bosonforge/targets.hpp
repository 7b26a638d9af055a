#pragma once

#include "bosonforge/common.hpp"

namespace bosonforge::targets {

struct SqueezeSpec {
    double r;  // dimensionless squeezing parameter, r >= 0

    explicit SqueezeSpec(double r_) : r(r_) {
        if (r_ < 0) throw std::invalid_argument("SqueezeSpec: r must be >= 0");
    }
    double squeezing_db() const { return 20.0 * r / std::log(10.0); }
};

enum class GkpLattice { square, hexagonal };
enum class GkpLogical { zero = 0, one = 1 };

struct GkpSpec {
    GkpLattice lattice;
    int mu;        // logical index, 0 or 1
    double delta;  // envelope parameter in (0, 1]

    GkpSpec(GkpLattice lat, int mu_, double delta_);

    Complex alpha() const;  // S_X = D(2α)
    Complex beta() const;   // S_Z = D(2β)
    double squeezing_db() const { return -10.0 * std::log10(delta * delta); }
    // Envelope squeezing of the square-lattice peaks.
    double peak_squeeze_r() const { return std::log(1.0 / delta); }
};

enum class BinomialLogical { plus_z, minus_z };

struct BinomialSpec {
    int spacing;   // S
    int order;     // N
    BinomialLogical logical;

    BinomialSpec(int s, int n, BinomialLogical l);
    int highest_fock() const { return (order + 1) * (spacing + 1); }
};

/// S(r)|0> from the closed-form even-Fock amplitudes.
/// Throws TruncationError if the discarded tail norm exceeds 1e-4.
CVec squeezed_vacuum(const SqueezeSpec& spec, const FockSpace& space);

/// Approximate GKP code word as an envelope-weighted lattice sum of displaced
/// Gaussians; the square lattice displaces S(ln 1/Δ)|0>, the hexagonal one
/// displaces the bare vacuum. `k_extra` widens the lattice range beyond the
/// envelope cutoff (used to verify sum convergence).
CVec gkp_state(const GkpSpec& spec, const FockSpace& space, int k_extra = 0);

/// Binomial code word, exact finite Fock superposition.
CVec binomial_state(const BinomialSpec& spec, const FockSpace& space);

}  // namespace bosonforge::targets
