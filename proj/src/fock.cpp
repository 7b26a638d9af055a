#include "bosonforge/fock.hpp"

#include <cmath>
#include <sstream>

namespace bosonforge::fock {

CMat annihilation(const FockSpace& space) {
    const int n = space.dim;
    CMat a = CMat::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

CMat creation(const FockSpace& space) {
    return annihilation(space).adjoint();
}

CMat number_op(const FockSpace& space) {
    const int n = space.dim;
    CMat m = CMat::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = double(k);
    return m;
}

CMat position_op(const FockSpace& space) {
    const CMat a = annihilation(space);
    return (a + a.adjoint()) / std::sqrt(2.0);
}

CMat momentum_op(const FockSpace& space) {
    const CMat a = annihilation(space);
    return -kI * (a - a.adjoint()) / std::sqrt(2.0);
}

CMat parity_op(const FockSpace& space) {
    const int n = space.dim;
    CMat m = CMat::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return m;
}

CMat identity(const FockSpace& space) {
    return CMat::Identity(space.dim, space.dim);
}

CMat expm_hermitian(const CMat& hermitian, double scale) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian);
    const RVec& eval = es.eigenvalues();
    const CMat& evec = es.eigenvectors();
    CVec phases(eval.size());
    for (Eigen::Index k = 0; k < eval.size(); ++k)
        phases(k) = std::exp(-kI * scale * eval(k));
    return evec * phases.asDiagonal() * evec.adjoint();
}

namespace {

CMat displacement_core(Complex beta, const FockSpace& space) {
    const CMat a = annihilation(space);
    // β a† − β* a = −i H with Hermitian H = i(β a† − β* a).
    const CMat h = kI * (beta * a.adjoint() - std::conj(beta) * a);
    return expm_hermitian(h, 1.0);
}

}  // namespace

CMat displacement(Complex beta, const FockSpace& space) {
    if (std::norm(beta) > space.dim / 4.0) {
        std::ostringstream os;
        os << "displacement: |beta|^2 = " << std::norm(beta)
           << " exceeds dim/4 = " << space.dim / 4.0
           << "; truncation artifacts likely";
        warn(os.str());
    }
    return displacement_core(beta, space);
}

CMat projected_displacement(Complex beta, const FockSpace& space) {
    const int n = space.dim;
    if (std::abs(beta) == 0.0) return CMat::Identity(n, n);
    // Build the unitary in a space large enough that truncation cannot reach
    // the requested block, then project.
    const double reach = std::norm(beta) + 6.0 * std::abs(beta) + 16.0;
    const int n_big = std::max(n, int(std::ceil(reach)));
    if (n_big == n) return displacement_core(beta, space);
    return displacement_core(beta, FockSpace(n_big)).topLeftCorner(n, n);
}

CMat squeeze(double r, const FockSpace& space) {
    if (std::exp(2.0 * r) > space.dim / 6.0) {
        std::ostringstream os;
        os << "squeeze: e^{2r} = " << std::exp(2.0 * r)
           << " exceeds dim/6 = " << space.dim / 6.0
           << "; truncation artifacts likely";
        warn(os.str());
    }
    const CMat a = annihilation(space);
    const CMat a2 = a * a;
    const CMat gen = 0.5 * (r * a2 - r * a2.adjoint());  // anti-Hermitian for real r
    const CMat h = kI * gen;
    return expm_hermitian(h, 1.0);
}

CMat sigma_x() {
    CMat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

CMat sigma_y() {
    CMat m(2, 2);
    m << 0, kI, -kI, 0;
    return m;
}

CMat sigma_z() {
    CMat m(2, 2);
    m << -1, 0, 0, 1;
    return m;
}

CMat sigma_plus() {
    CMat m(2, 2);
    m << 0, 0, 1, 0;
    return m;
}

CMat sigma_minus() {
    CMat m(2, 2);
    m << 0, 1, 0, 0;
    return m;
}

CMat qubit_identity() { return CMat::Identity(2, 2); }

CMat embed_hybrid(const CMat& spin_op, const CMat& osc_op) {
    if (spin_op.rows() != spin_op.cols() || osc_op.rows() != osc_op.cols())
        throw DimensionMismatch("embed_hybrid: operators must be square");
    const Eigen::Index s = spin_op.rows();
    const Eigen::Index n = osc_op.rows();
    CMat out(s * n, s * n);
    for (Eigen::Index i = 0; i < s; ++i)
        for (Eigen::Index j = 0; j < s; ++j)
            out.block(i * n, j * n, n, n) = spin_op(i, j) * osc_op;
    return out;
}

CVec fock_state(int n, const FockSpace& space) {
    if (n < 0 || n >= space.dim)
        throw DimensionMismatch("fock_state: level outside truncation");
    CVec v = CVec::Zero(space.dim);
    v(n) = 1.0;
    return v;
}

CVec vacuum(const FockSpace& space) { return fock_state(0, space); }

CVec hybrid_basis(int spin, int n, const FockSpace& space) {
    if (spin < 0 || spin > 1) throw DimensionMismatch("hybrid_basis: spin must be 0 or 1");
    if (n < 0 || n >= space.dim)
        throw DimensionMismatch("hybrid_basis: level outside truncation");
    CVec v = CVec::Zero(space.hybrid_dim());
    v(spin * space.dim + n) = 1.0;
    return v;
}

namespace {

// w <- exp(G) v for the tridiagonal-action generator given by apply_gen,
// using substeps sized so the scaled norm stays within the Taylor radius.
CVec exp_action(const std::function<void(const CVec&, CVec&)>& apply_gen,
                double norm_estimate, const CVec& v) {
    const int substeps = std::max(1, int(std::ceil(norm_estimate / 2.0)));
    CVec w = v;
    CVec term(v.size()), next(v.size());
    for (int s = 0; s < substeps; ++s) {
        term = w;
        CVec acc = w;
        for (int k = 1; k <= 120; ++k) {
            apply_gen(term, next);
            term = next / (double(k) * substeps);
            acc += term;
            if (term.norm() < 1e-18 * (acc.norm() + 1e-300)) break;
            if (k == 120)
                throw IntegratorError("exp_action: Taylor series failed to converge");
        }
        w.swap(acc);
    }
    return w;
}

}  // namespace

CVec apply_displacement(Complex beta, const CVec& v) {
    const int n = int(v.size());
    const Complex bc = std::conj(beta);
    auto gen = [&](const CVec& x, CVec& out) {
        for (int m = 0; m < n; ++m) {
            Complex val = 0.0;
            if (m > 0) val += beta * std::sqrt(double(m)) * x(m - 1);
            if (m + 1 < n) val -= bc * std::sqrt(double(m + 1)) * x(m + 1);
            out(m) = val;
        }
    };
    return exp_action(gen, 2.0 * std::abs(beta) * std::sqrt(double(n)), v);
}

CVec apply_squeeze(double r, const CVec& v) {
    const int n = int(v.size());
    auto gen = [&](const CVec& x, CVec& out) {
        for (int m = 0; m < n; ++m) {
            Complex val = 0.0;
            if (m + 2 < n) val += 0.5 * r * std::sqrt(double((m + 1) * (m + 2))) * x(m + 2);
            if (m >= 2) val -= 0.5 * r * std::sqrt(double(m * (m - 1))) * x(m - 2);
            out(m) = val;
        }
    };
    return exp_action(gen, std::abs(r) * double(n), v);
}

Complex expectation(const CMat& op, const CVec& psi) {
    if (op.rows() != psi.size())
        throw DimensionMismatch("expectation: operator/state dimensions differ");
    return psi.dot(op * psi);
}

Complex expectation(const CMat& op, const CMat& rho) {
    if (op.rows() != rho.rows())
        throw DimensionMismatch("expectation: operator/state dimensions differ");
    return (op * rho).trace();
}

double state_fidelity(const CMat& rho, const CVec& psi) {
    if (rho.rows() != psi.size())
        throw DimensionMismatch("state_fidelity: dimensions differ");
    double f = std::real(psi.dot(rho * psi));
    if (f < -1e-9) {
        std::ostringstream os;
        os << "state_fidelity: clipping negative value " << f;
        warn(os.str());
    }
    if (f < 0.0) f = 0.0;
    return f;
}

double overlap_fidelity(const CVec& a, const CVec& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("overlap_fidelity: dimensions differ");
    return std::norm(a.dot(b));
}

CMat partial_trace_qubit(const CVec& hybrid_psi) {
    const Eigen::Index n = hybrid_psi.size() / 2;
    if (2 * n != hybrid_psi.size())
        throw DimensionMismatch("partial_trace_qubit: state is not a hybrid vector");
    CMat rho = CMat::Zero(n, n);
    for (int s = 0; s < 2; ++s) {
        const CVec block = hybrid_psi.segment(s * n, n);
        rho.noalias() += block * block.adjoint();
    }
    return rho;
}

CMat partial_trace_qubit(const CMat& hybrid_rho) {
    const Eigen::Index n = hybrid_rho.rows() / 2;
    if (2 * n != hybrid_rho.rows() || hybrid_rho.rows() != hybrid_rho.cols())
        throw DimensionMismatch("partial_trace_qubit: matrix is not a hybrid density matrix");
    return hybrid_rho.block(0, 0, n, n) + hybrid_rho.block(n, n, n, n);
}

}  // namespace bosonforge::fock
