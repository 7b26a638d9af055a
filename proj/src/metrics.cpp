#include "bosonforge/metrics.hpp"

#include "bosonforge/fock.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>

namespace bosonforge::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// χ evaluations use the faithful projected elements of the ideal D(β); the
// finite-energy operator algebra below builds unitaries instead.
CMat displacement_dense(Complex beta, int dim) {
    return fock::projected_displacement(beta, FockSpace(dim));
}

CMat displacement_unitary(Complex beta, int dim) {
    CMat a = CMat::Zero(dim, dim);
    for (int m = 1; m < dim; ++m) a(m - 1, m) = std::sqrt(double(m));
    const CMat h = kI * (beta * a.adjoint() - std::conj(beta) * a);
    return fock::expm_hermitian(h, 1.0);
}

struct GridLookup {
    std::map<std::pair<long, long>, double> table;

    explicit GridLookup(const ChiGrid& grid) {
        for (const auto& p : grid.points)
            table[{llround(std::real(p.beta) * 1e9), llround(std::imag(p.beta) * 1e9)}] =
                p.re_chi;
    }
    double at(Complex beta) const {
        const auto it =
            table.find({llround(std::real(beta) * 1e9), llround(std::imag(beta) * 1e9)});
        if (it == table.end())
            throw MissingPoint("grid lacks a required lattice point");
        return it->second;
    }
};

double delta_from_expectation(double mag, double lattice_len) {
    if (mag < 1e-12) return kInf;
    const double arg = -std::log(std::min(mag * mag, 1.0));
    const double delta = std::sqrt(std::max(arg, 0.0)) / (2.0 * lattice_len);
    // Such small expectations occur for fully scrambled states (a truncated
    // maximally mixed state keeps a trace artifact of order 1e-2); the
    // estimate is outside the physical envelope range and carries no
    // squeezing information.
    if (delta > 1.2) return kInf;
    return delta;
}

double delta_to_db(double delta) {
    if (delta == 0.0) return kInf;
    if (std::isinf(delta)) return -kInf;
    return -10.0 * std::log10(delta * delta);
}

// Golden-section minimization on [lo, hi].
template <typename F>
double golden_min(F f, double lo, double hi, double tol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double pseudo_fidelity(const ChiGrid& exp_grid, const ChiGrid& th_grid) {
    if (exp_grid.points.size() != th_grid.points.size())
        throw GridMismatch("pseudo_fidelity: point counts differ");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < exp_grid.points.size(); ++i) {
        const auto& pe = exp_grid.points[i];
        const auto& pt = th_grid.points[i];
        if (std::abs(pe.beta - pt.beta) > 1e-9 * std::max(1.0, std::abs(pt.beta)))
            throw GridMismatch("pseudo_fidelity: point sets differ");
        num += pe.re_chi * pt.re_chi;
        den += pt.re_chi * pt.re_chi;
    }
    if (den == 0.0) throw GridMismatch("pseudo_fidelity: theory grid is identically zero");
    return num / den;
}

StabilizerSqueezing stabilizer_squeezing(const CMat& rho, const targets::GkpSpec& spec) {
    const int dim = int(rho.rows());
    StabilizerSqueezing out;
    out.s_x = (rho * displacement_dense(2.0 * spec.alpha(), dim)).trace();
    out.s_z = (rho * displacement_dense(2.0 * spec.beta(), dim)).trace();
    out.delta_x = delta_from_expectation(std::abs(out.s_x), std::abs(spec.alpha()));
    out.delta_z = delta_from_expectation(std::abs(out.s_z), std::abs(spec.beta()));
    out.db_x = delta_to_db(out.delta_x);
    out.db_z = delta_to_db(out.delta_z);
    return out;
}

StabilizerSqueezing stabilizer_squeezing(const ChiGrid& grid, const targets::GkpSpec& spec) {
    const GridLookup lookup(grid);
    StabilizerSqueezing out;
    out.s_x = lookup.at(2.0 * spec.alpha());
    out.s_z = lookup.at(2.0 * spec.beta());
    out.delta_x = delta_from_expectation(std::abs(out.s_x), std::abs(spec.alpha()));
    out.delta_z = delta_from_expectation(std::abs(out.s_z), std::abs(spec.beta()));
    out.db_x = delta_to_db(out.delta_x);
    out.db_z = delta_to_db(out.delta_z);
    return out;
}

EffectiveSqueezing effective_squeezing(const CMat& rho, const targets::GkpSpec& spec,
                                       int build_dim, double delta_lo, double delta_hi) {
    const int dim = std::max(build_dim, int(rho.rows()));
    CMat rho_big = CMat::Zero(dim, dim);
    rho_big.block(0, 0, rho.rows(), rho.cols()) = rho;

    // The fictitious Hamiltonian is the similarity transform E_Δ A E_Δ⁻¹ of
    // A = −D(2α) − D(2β) − D(β). Diagonalizing the bounded A side and mapping
    // its ground vector through E_Δ gives the same code words without the
    // e^{+Δ²n} amplification that wrecks the naive dense eigensolve.
    CVec g_plus, g_minus_raw;
    {
        const CMat a = -displacement_unitary(2.0 * spec.alpha(), dim) -
                       displacement_unitary(2.0 * spec.beta(), dim) -
                       displacement_unitary(spec.beta(), dim);
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (a + a.adjoint()));
        g_plus = es.eigenvectors().col(0);
        g_minus_raw = displacement_unitary(spec.alpha(), dim) * g_plus;
    }

    auto overlap = [&](double delta) {
        auto envelope = [&](const CVec& v) {
            CVec out(dim);
            for (int n = 0; n < dim; ++n)
                out(n) = v(n) * std::exp(-delta * delta * double(n));
            return out;
        };
        CVec plus = envelope(g_plus);
        plus.normalize();
        CVec minus = envelope(g_minus_raw);
        minus -= plus.dot(minus) * plus;
        const double nm = minus.norm();
        if (nm > 1e-12) minus /= nm;
        else minus.setZero();
        return std::real(plus.dot(rho_big * plus)) + std::real(minus.dot(rho_big * minus));
    };

    // Coarse scan then golden-section refinement of the best bracket.
    double best_delta = delta_lo, best_val = -1.0;
    for (double d = delta_lo; d <= delta_hi + 1e-12; d += 0.025) {
        const double v = overlap(d);
        if (v > best_val) {
            best_val = v;
            best_delta = d;
        }
    }
    const double lo = std::max(delta_lo, best_delta - 0.03);
    const double hi = std::min(delta_hi, best_delta + 0.03);
    const double refined = golden_min([&](double d) { return -overlap(d); }, lo, hi, 1e-4);
    EffectiveSqueezing out;
    out.delta_star = refined;
    out.projector_overlap = overlap(refined);
    out.db = delta_to_db(refined);
    return out;
}

namespace {

struct DecoderTerm {
    Complex point;
    double coeff;
};

struct DecoderSums {
    std::vector<DecoderTerm> x, y, z;
};

double hex_f(int m, int n) {
    return std::pow(-1.0, m) * std::cos(kPi / 3.0 * double(m + n - 1)) /
           ((double(m + n) + 0.5) * (double(m - 2 * n) + 0.5));
}

DecoderSums decoder_sums(const targets::GkpSpec& spec, int trunc) {
    DecoderSums s;
    const double root2pi = std::sqrt(kTwoPi);
    if (spec.lattice == targets::GkpLattice::square) {
        for (int n = -trunc; n < trunc; ++n) {
            const double c = std::pow(-1.0, n) / (double(n) + 0.5) / kPi;
            s.x.push_back({Complex(root2pi * (n + 0.5), 0.0), c});
            s.z.push_back({Complex(0.0, root2pi * (n + 0.5)), c});
        }
        for (int m = -trunc; m < trunc; ++m)
            for (int n = -trunc; n < trunc; ++n)
                s.y.push_back({Complex(root2pi * (m + 0.5), root2pi * (n + 0.5)),
                               1.0 / (kPi * kPi * (m + 0.5) * (n + 0.5))});
    } else {
        const double a = std::abs(spec.alpha());
        const double pref = 3.0 / (kPi * kPi);
        for (int m = -trunc; m < trunc; ++m) {
            for (int n = -trunc; n < trunc; ++n) {
                s.x.push_back({Complex((m + 0.5) * std::sqrt(3.0) * a,
                                       (double(m + 2 * n) + 0.5) * a),
                               pref * hex_f(m, n)});
                s.y.push_back({Complex((m + 0.5) * std::sqrt(3.0) * a,
                                       (double(m + 2 * n) + 1.5) * a),
                               pref * hex_f(n, n - m)});
                s.z.push_back({Complex(double(m) * std::sqrt(3.0) * a,
                                       double(m + 2 * n + 1) * a),
                               pref * hex_f(n, m)});
            }
        }
    }
    return s;
}

LogicalFidelity assemble_logical(const DecoderSums& sums,
                                 const std::function<Complex(Complex)>& chi) {
    auto total = [&](const std::vector<DecoderTerm>& terms) {
        Complex acc = 0.0;
        for (const auto& t : terms) acc += t.coeff * chi(t.point);
        return std::real(acc);
    };
    LogicalFidelity out;
    out.bloch_x = total(sums.x);
    out.bloch_y = total(sums.y);
    out.bloch_z = total(sums.z);
    out.f_bar = 0.5 * (1.0 + out.bloch_z);
    const double len2 = out.bloch_x * out.bloch_x + out.bloch_y * out.bloch_y +
                        out.bloch_z * out.bloch_z;
    out.bloch_exceeds_unit = len2 > 1.0 + 1e-9;
    return out;
}

}  // namespace

std::vector<Complex> decoder_points(const targets::GkpSpec& spec, int trunc) {
    const auto sums = decoder_sums(spec, trunc);
    std::vector<Complex> pts;
    for (const auto& t : sums.x) pts.push_back(t.point);
    for (const auto& t : sums.y) pts.push_back(t.point);
    for (const auto& t : sums.z) pts.push_back(t.point);
    return pts;
}

LogicalFidelity logical_fidelity(const CMat& rho, const targets::GkpSpec& spec, int trunc) {
    const int dim = int(rho.rows());
    const auto sums = decoder_sums(spec, trunc);
    return assemble_logical(sums, [&](Complex pt) {
        return (rho * displacement_dense(pt, dim)).trace();
    });
}

LogicalFidelity logical_fidelity(const ChiGrid& grid, const targets::GkpSpec& spec,
                                 int trunc) {
    const GridLookup lookup(grid);
    const auto sums = decoder_sums(spec, trunc);
    return assemble_logical(sums, [&](Complex pt) { return Complex(lookup.at(pt), 0.0); });
}

SqueezedFit fit_squeezed(const ChiGrid& grid, double a_scale) {
    auto model = [&](double r, Complex beta) {
        const Complex arg = beta * std::cosh(r) + std::conj(beta) * std::sinh(r);
        return a_scale * std::exp(-0.5 * std::norm(arg));
    };
    auto sse_over = [&](const std::vector<const tomography::ChiPoint*>& pts) {
        return [&, pts](double r) {
            double sse = 0.0;
            for (const auto* p : pts) {
                const double d = model(r, p->beta) - p->re_chi;
                sse += d * d;
            }
            return sse;
        };
    };

    std::vector<const tomography::ChiPoint*> all, re_axis, im_axis;
    for (const auto& p : grid.points) {
        all.push_back(&p);
        if (std::abs(std::imag(p.beta)) < 1e-12) re_axis.push_back(&p);
        if (std::abs(std::real(p.beta)) < 1e-12) im_axis.push_back(&p);
    }

    SqueezedFit out;
    const double r_hi = 3.0;
    out.r = golden_min(sse_over(all), 0.0, r_hi, 1e-6);
    if (!std::isfinite(out.r) || out.r > r_hi - 1e-3)
        throw FitDivergence("fit_squeezed: fit ran into the parameter bound");
    out.db = 20.0 * out.r / std::log(10.0);
    if (re_axis.size() >= 3) {
        out.r_re = golden_min(sse_over(re_axis), 0.0, r_hi, 1e-6);
        out.db_re = 20.0 * (*out.r_re) / std::log(10.0);
    }
    if (im_axis.size() >= 3) {
        out.r_im = golden_min(sse_over(im_axis), 0.0, r_hi, 1e-6);
        out.db_im = -20.0 * (*out.r_im) / std::log(10.0);
    }
    return out;
}

KlReport kl_check(const CVec& w0, const CVec& w1, const std::vector<CMat>& errors) {
    const std::array<const CVec*, 2> w{&w0, &w1};
    double violation = 0.0;
    for (const auto& el : errors) {
        for (const auto& ek : errors) {
            const CMat op = el.adjoint() * ek;
            Complex diag[2];
            for (int s = 0; s < 2; ++s) diag[s] = w[s]->dot(op * (*w[s]));
            const Complex avg = 0.5 * (diag[0] + diag[1]);
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) {
                    const Complex m = w[s]->dot(op * (*w[t]));
                    const Complex want = (s == t) ? avg : Complex(0.0, 0.0);
                    violation = std::max(violation, std::abs(m - want));
                }
        }
    }
    return {violation};
}

double squeezing_from_density(const CMat& rho) {
    const int dim = int(rho.rows());
    const double span = std::sqrt(2.0 * dim) + 4.0;
    const int n_pts = 801;
    RVec xs(n_pts);
    for (int i = 0; i < n_pts; ++i) xs(i) = -span + 2.0 * span * i / double(n_pts - 1);
    const RVec p = tomography::position_marginal(rho, xs);

    auto sse = [&](double sigma) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n_pts; ++i) {
            const double g = std::exp(-xs(i) * xs(i) / (2.0 * sigma * sigma));
            num += p(i) * g;
            den += g * g;
        }
        const double c = den > 0 ? num / den : 0.0;
        double acc = 0.0;
        for (int i = 0; i < n_pts; ++i) {
            const double d = c * std::exp(-xs(i) * xs(i) / (2.0 * sigma * sigma)) - p(i);
            acc += d * d;
        }
        return acc;
    };
    const double sigma = golden_min(sse, 0.02, 4.0, 1e-7);
    return -10.0 * std::log10(2.0 * sigma * sigma);
}

}  // namespace bosonforge::metrics
