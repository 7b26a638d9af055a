#include "bosonforge/targets.hpp"

#include "bosonforge/fock.hpp"

#include <cmath>
#include <sstream>

namespace bosonforge::targets {

namespace {

constexpr double kEnvelopeCutoff = 1e-14;
constexpr int kInternalPadding = 64;

void check_tail_and_truncate(CVec& big, const FockSpace& space, const char* what) {
    big.normalize();
    const double tail = big.tail(big.size() - space.dim).squaredNorm();
    if (tail > 1e-4) {
        std::ostringstream os;
        os << what << ": discarded tail norm " << tail << " exceeds 1e-4 at dim "
           << space.dim;
        throw TruncationError(os.str());
    }
    CVec out = big.head(space.dim);
    out.normalize();
    big = out;
}

}  // namespace

GkpSpec::GkpSpec(GkpLattice lat, int mu_, double delta_)
    : lattice(lat), mu(mu_), delta(delta_) {
    if (mu_ != 0 && mu_ != 1) throw std::invalid_argument("GkpSpec: mu must be 0 or 1");
    if (!(delta_ > 0.0 && delta_ <= 1.0))
        throw std::invalid_argument("GkpSpec: delta must be in (0, 1]");
    const Complex a = alpha(), b = beta();
    const Complex comm = b * std::conj(a) - std::conj(b) * a;
    if (std::abs(comm - kI * kPi) > 1e-12)
        throw std::logic_error("GkpSpec: lattice constants violate beta*alpha^* - beta^**alpha = i*pi");
}

Complex GkpSpec::alpha() const {
    if (lattice == GkpLattice::square) return std::sqrt(kPi / 2.0);
    return std::exp(-kI * kPi / 3.0) * beta();
}

Complex GkpSpec::beta() const {
    if (lattice == GkpLattice::square) return kI * std::sqrt(kPi / 2.0);
    return kI * std::sqrt(kPi / std::sqrt(3.0));
}

BinomialSpec::BinomialSpec(int s, int n, BinomialLogical l)
    : spacing(s), order(n), logical(l) {
    if (s < 0) throw std::invalid_argument("BinomialSpec: spacing must be >= 0");
    if (n < 1) throw std::invalid_argument("BinomialSpec: order must be >= 1");
}

CVec squeezed_vacuum(const SqueezeSpec& spec, const FockSpace& space) {
    // S(r)|0> = (cosh r)^{-1/2} sum_m (-tanh r)^m sqrt((2m)!)/(2^m m!) |2m>.
    const double th = std::tanh(spec.r);
    CVec big = CVec::Zero(space.dim + kInternalPadding);
    double amp = 1.0 / std::sqrt(std::cosh(spec.r));
    double total = 0.0;
    for (int m = 0; 2 * m < big.size(); ++m) {
        big(2 * m) = amp;
        total += amp * amp;
        amp *= -th * std::sqrt((2.0 * m + 1.0) / (2.0 * m + 2.0));
    }
    // The analytic norm is 1; anything missing at dim is discarded tail.
    const double tail = 1.0 - big.head(space.dim).squaredNorm();
    if (tail > 1e-4) {
        std::ostringstream os;
        os << "squeezed_vacuum: tail norm " << tail << " exceeds 1e-4 at dim " << space.dim;
        throw TruncationError(os.str());
    }
    (void)total;
    CVec out = big.head(space.dim);
    out.normalize();
    return out;
}

CVec gkp_state(const GkpSpec& spec, const FockSpace& space, int k_extra) {
    const int n_big = space.dim + kInternalPadding;
    const double d2 = spec.delta * spec.delta;
    // Terms displaced far beyond the truncated space contribute nothing.
    const double c_max = std::sqrt(double(n_big)) + 8.0;
    CVec acc = CVec::Zero(n_big);

    if (spec.lattice == GkpLattice::square) {
        const Complex alpha = spec.alpha();
        const double r = spec.peak_squeeze_r();
        CVec core = CVec::Zero(n_big);
        core(0) = 1.0;
        core = fock::apply_squeeze(r, core);
        int k_range = 0;
        while (std::exp(-d2 * std::norm(alpha * double(2 * (k_range + 1) + spec.mu))) >
               kEnvelopeCutoff)
            ++k_range;
        k_range += k_extra;
        for (int k = -k_range; k <= k_range; ++k) {
            const Complex c = double(2 * k + spec.mu) * alpha;
            const double w = std::exp(-d2 * std::norm(c));
            if (w <= kEnvelopeCutoff && k_extra == 0) continue;
            if (std::abs(c) > c_max) continue;
            acc += w * fock::apply_displacement(c, core);
        }
    } else {
        const Complex alpha = spec.alpha();
        const Complex beta = spec.beta();
        CVec vac = CVec::Zero(n_big);
        vac(0) = 1.0;
        // The k/l axes are 60° apart, so the box must overshoot the envelope
        // radius; the per-term weight cut discards the excess.
        const double r_env = std::sqrt(-std::log(kEnvelopeCutoff)) / spec.delta;
        const int range = int(std::ceil(r_env / std::abs(alpha))) + 2 + k_extra;
        for (int k = -range; k <= range; ++k) {
            for (int l = -range; l <= range; ++l) {
                const Complex c = double(2 * k + spec.mu) * alpha + double(l) * beta;
                const double w = std::exp(-d2 * std::norm(c));
                if (w <= kEnvelopeCutoff) continue;
                if (std::abs(c) > c_max) continue;
                const Complex phase =
                    std::exp(-kI * kPi * (double(k * l) + 0.5 * spec.mu * double(l)));
                acc += w * phase * fock::apply_displacement(c, vac);
            }
        }
    }

    check_tail_and_truncate(acc, space, "gkp_state");
    return acc;
}

CVec binomial_state(const BinomialSpec& spec, const FockSpace& space) {
    if (spec.highest_fock() >= space.dim)
        throw DimensionMismatch("binomial_state: highest Fock index exceeds truncation");
    CVec v = CVec::Zero(space.dim);
    const int n = spec.order;
    const bool even = spec.logical == BinomialLogical::plus_z;
    for (int p = 0; p <= n + 1; ++p) {
        if ((p % 2 == 0) != even) continue;
        double binom = 1.0;
        for (int j = 0; j < p; ++j) binom *= double(n + 1 - j) / double(j + 1);
        v(p * (spec.spacing + 1)) = std::sqrt(binom);
    }
    v /= std::sqrt(std::pow(2.0, n));
    const double norm = v.norm();
    v /= norm;
    return v;
}

}  // namespace bosonforge::targets
