#include "bosonforge/tomography.hpp"

#include "bosonforge/fock.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace bosonforge::tomography {

namespace {

constexpr double kPointTol = 1e-9;

// True Fock-basis elements of D(β): the faithful χ model at any truncation.
CMat displacement_matrix(Complex beta, int dim) {
    return fock::projected_displacement(beta, FockSpace(dim));
}

bool same_point(Complex a, Complex b) {
    return std::abs(a - b) <= kPointTol * std::max(1.0, std::abs(a));
}

struct PointKey {
    long re, im;
    bool operator<(const PointKey& o) const {
        return re != o.re ? re < o.re : im < o.im;
    }
};

PointKey key_of(Complex beta) {
    return {llround(std::real(beta) * 1e9), llround(std::imag(beta) * 1e9)};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void sort_canonical(std::vector<ChiPoint>& pts) {
    std::sort(pts.begin(), pts.end(), [](const ChiPoint& a, const ChiPoint& b) {
        const auto ka = key_of(a.beta), kb = key_of(b.beta);
        return ka.im != kb.im ? ka.im < kb.im : ka.re < kb.re;
    });
}

long sample_binomial(std::mt19937_64& rng, long n, double p) {
    std::binomial_distribution<long> dist(n, std::clamp(p, 0.0, 1.0));
    return dist(rng);
}

}  // namespace

void ChiGrid::validate() const {
    for (const auto& p : points) {
        if (std::abs(p.re_chi) > 1.0 + 1e-9)
            throw std::invalid_argument("ChiGrid: |re_chi| exceeds 1");
        if (p.has_shots()) {
            const double implied = 2.0 * double(p.m_bright) / double(p.m_total) - 1.0;
            if (std::abs(implied - p.re_chi) > 1e-9)
                throw std::invalid_argument("ChiGrid: re_chi inconsistent with shot record");
        }
    }
}

ChiGrid make_quadrant_grid(int side, double extent, double beta_scale) {
    if (side < 2) throw std::invalid_argument("make_quadrant_grid: side must be >= 2");
    ChiGrid g;
    g.beta_scale = beta_scale;
    g.extent = extent;
    g.side = side;
    g.symmetric = true;
    const double h = extent / double(side - 1);
    for (int j = 0; j < side; ++j) {
        for (int i = 0; i < side; ++i) {
            ChiPoint p;
            p.beta = beta_scale * Complex(i * h, j * h);
            p.re_chi = 0.0;
            g.points.push_back(p);
        }
    }
    return g;
}

Complex chi_exact(const CVec& psi, Complex beta) {
    const int n = int(psi.size());
    if (std::norm(beta) > n / 4.0)
        warn("chi_exact: |beta|^2 exceeds dim/4; support may be clipped");
    return psi.dot(displacement_matrix(beta, n) * psi);
}

Complex chi_exact(const CMat& rho, Complex beta) {
    const int n = int(rho.rows());
    if (std::norm(beta) > n / 4.0)
        warn("chi_exact: |beta|^2 exceeds dim/4; support may be clipped");
    return (rho * displacement_matrix(beta, n)).trace();
}

namespace {

// SDF drive segment realizing the conditional displacement D(β σx/2) after
// time t = |β|/Ω: φ_s = 0 selects the σx axis, φ_m fixes the ray direction.
dynamics::Segment sdf_segment(Complex beta, double omega, double duration) {
    const double phi_m = -std::arg(beta) - kPi / 2.0;
    return dynamics::Segment{duration, phi_m, -phi_m, omega, omega};
}

ChiPoint finish_point(Complex beta, double p_bright, long shots, std::uint64_t rng_seed) {
    ChiPoint out;
    out.beta = beta;
    if (shots > 0) {
        std::mt19937_64 rng(rng_seed);
        out.m_bright = sample_binomial(rng, shots, p_bright);
        out.m_total = shots;
        out.re_chi = 2.0 * double(out.m_bright) / double(out.m_total) - 1.0;
    } else {
        out.re_chi = 2.0 * p_bright - 1.0;
    }
    return out;
}

}  // namespace

ChiPoint sdf_measure(const CVec& state, Complex beta, const SdfConfig& cfg,
                     const FockSpace& space, std::uint64_t rng_seed) {
    const bool noisy = cfg.noise.gamma > 0.0 || cfg.noise.delta != 0.0;
    if (noisy) {
        const CMat rho = state * state.adjoint();
        return sdf_measure(rho, beta, cfg, space, rng_seed);
    }
    const int n = space.dim;
    CVec psi;
    if (state.size() == 2 * n) {
        psi = state;
    } else if (state.size() == n) {
        psi = CVec::Zero(2 * n);
        psi.head(n) = state;
    } else {
        throw DimensionMismatch("sdf_measure: state is neither N nor 2N long");
    }
    double p_bright;
    if (std::abs(beta) == 0.0) {
        p_bright = psi.head(n).squaredNorm();
    } else {
        const double t = std::abs(beta) / cfg.omega_sdf;
        const auto h = dynamics::segment_hamiltonian(sdf_segment(beta, cfg.omega_sdf, t), space);
        dynamics::evolve_segment(h, t, psi);
        p_bright = psi.head(n).squaredNorm();
    }
    return finish_point(beta, p_bright, cfg.shots, rng_seed);
}

ChiPoint sdf_measure(const CMat& rho, Complex beta, const SdfConfig& cfg,
                     const FockSpace& space, std::uint64_t rng_seed) {
    const int n = space.dim;
    CMat rho_h;
    if (rho.rows() == 2 * n) {
        rho_h = rho;
    } else if (rho.rows() == n) {
        rho_h = CMat::Zero(2 * n, 2 * n);
        rho_h.block(0, 0, n, n) = rho;
    } else {
        throw DimensionMismatch("sdf_measure: rho is neither N x N nor 2N x 2N");
    }
    double p_bright;
    if (std::abs(beta) == 0.0) {
        p_bright = std::real(rho_h.block(0, 0, n, n).trace());
    } else {
        const double t = std::abs(beta) / cfg.omega_sdf;
        dynamics::Waveform wf;
        wf.segments.push_back(sdf_segment(beta, cfg.omega_sdf, t));
        const CMat rho_f = dynamics::propagate_master(wf, cfg.noise, rho_h, space);
        p_bright = std::real(rho_f.block(0, 0, n, n).trace());
    }
    return finish_point(beta, p_bright, cfg.shots, rng_seed);
}

namespace {

struct Ray {
    std::vector<int> point_indices;  // sorted by radius
};

std::map<PointKey, Ray> group_rays(const ChiGrid& grid_spec) {
    std::map<PointKey, Ray> rays;
    for (size_t i = 0; i < grid_spec.points.size(); ++i) {
        const Complex beta = grid_spec.points[i].beta;
        if (std::abs(beta) == 0.0) continue;
        const Complex dir = beta / std::abs(beta);
        rays[key_of(dir)].point_indices.push_back(int(i));
    }
    for (auto& [k, ray] : rays) {
        std::sort(ray.point_indices.begin(), ray.point_indices.end(),
                  [&](int a, int b) {
                      return std::abs(grid_spec.points[a].beta) <
                             std::abs(grid_spec.points[b].beta);
                  });
    }
    return rays;
}

}  // namespace

ChiGrid measure_grid(const CMat& rho, const FockSpace& space, const ChiGrid& grid_spec,
                     const SdfConfig& cfg, std::uint64_t seed) {
    const int n = space.dim;
    CMat rho_h;
    if (rho.rows() == 2 * n) {
        rho_h = rho;
    } else if (rho.rows() == n) {
        rho_h = CMat::Zero(2 * n, 2 * n);
        rho_h.block(0, 0, n, n) = rho;
    } else {
        throw DimensionMismatch("measure_grid: rho is neither N x N nor 2N x 2N");
    }

    ChiGrid out = grid_spec;
    auto rays = group_rays(grid_spec);
    std::vector<const Ray*> ray_list;
    for (auto& [k, ray] : rays) ray_list.push_back(&ray);

    parallel_for(int(ray_list.size()), [&](int r) {
        const Ray& ray = *ray_list[r];
        const Complex beta0 = grid_spec.points[ray.point_indices.front()].beta;
        auto seg = sdf_segment(beta0, cfg.omega_sdf, 1.0);
        dynamics::SparseOp h = dynamics::segment_hamiltonian(seg, space, cfg.noise.delta);
        std::vector<double> times;
        for (int idx : ray.point_indices)
            times.push_back(std::abs(grid_spec.points[idx].beta) / cfg.omega_sdf);
        const auto snaps = dynamics::master_evolve_constant(h, cfg.noise.gamma, rho_h, times);
        for (size_t j = 0; j < times.size(); ++j) {
            const int idx = ray.point_indices[j];
            const double p = std::real(snaps[j].block(0, 0, n, n).trace());
            out.points[idx] =
                finish_point(grid_spec.points[idx].beta, p, cfg.shots, mix_seed(seed, idx));
        }
    });

    for (size_t i = 0; i < out.points.size(); ++i) {
        if (std::abs(grid_spec.points[i].beta) == 0.0) {
            const double p = std::real(rho_h.block(0, 0, n, n).trace());
            out.points[i] = finish_point(Complex(0, 0), p, cfg.shots, mix_seed(seed, i));
        }
    }
    return out;
}

ChiGrid measure_grid(const CVec& psi, const FockSpace& space, const ChiGrid& grid_spec,
                     const SdfConfig& cfg, std::uint64_t seed) {
    if (cfg.noise.gamma > 0.0) {
        const CVec lifted = psi.size() == 2 * space.dim
                                ? psi
                                : [&] {
                                      CVec v = CVec::Zero(2 * space.dim);
                                      v.head(space.dim) = psi;
                                      return v;
                                  }();
        return measure_grid(CMat(lifted * lifted.adjoint()), space, grid_spec, cfg, seed);
    }
    const int n = space.dim;
    CVec psi_h;
    if (psi.size() == 2 * n) {
        psi_h = psi;
    } else if (psi.size() == n) {
        psi_h = CVec::Zero(2 * n);
        psi_h.head(n) = psi;
    } else {
        throw DimensionMismatch("measure_grid: psi is neither N nor 2N long");
    }

    ChiGrid out = grid_spec;
    auto rays = group_rays(grid_spec);
    std::vector<const Ray*> ray_list;
    for (auto& [k, ray] : rays) ray_list.push_back(&ray);

    parallel_for(int(ray_list.size()), [&](int r) {
        const Ray& ray = *ray_list[r];
        const Complex beta0 = grid_spec.points[ray.point_indices.front()].beta;
        auto seg = sdf_segment(beta0, cfg.omega_sdf, 1.0);
        dynamics::SparseOp h = dynamics::segment_hamiltonian(seg, space, cfg.noise.delta);
        CVec state = psi_h;
        double t_now = 0.0;
        for (int idx : ray.point_indices) {
            const double t = std::abs(grid_spec.points[idx].beta) / cfg.omega_sdf;
            if (t > t_now) dynamics::evolve_segment(h, t - t_now, state);
            t_now = std::max(t_now, t);
            const double p = state.head(n).squaredNorm();
            out.points[idx] =
                finish_point(grid_spec.points[idx].beta, p, cfg.shots, mix_seed(seed, idx));
        }
    });

    for (size_t i = 0; i < out.points.size(); ++i) {
        if (std::abs(grid_spec.points[i].beta) == 0.0) {
            const double p = psi_h.head(n).squaredNorm();
            out.points[i] = finish_point(Complex(0, 0), p, cfg.shots, mix_seed(seed, i));
        }
    }
    return out;
}

ChiGrid exact_grid(const CVec& psi, const ChiGrid& grid_spec) {
    ChiGrid out = grid_spec;
    const int n = int(psi.size());
    bool warned = false;
    for (auto& p : out.points)
        if (std::norm(p.beta) > n / 4.0 && !warned) {
            warn("exact_grid: grid reaches beyond dim/4; truncation artifacts likely");
            warned = true;
        }
    parallel_for(int(out.points.size()), [&](int i) {
        auto& p = out.points[i];
        p.re_chi = std::real(psi.dot(displacement_matrix(p.beta, n) * psi));
        p.m_bright = p.m_total = -1;
    });
    return out;
}

ChiGrid exact_grid(const CMat& rho_osc, const ChiGrid& grid_spec) {
    ChiGrid out = grid_spec;
    const int n = int(rho_osc.rows());
    bool warned = false;
    for (auto& p : out.points)
        if (std::norm(p.beta) > n / 4.0 && !warned) {
            warn("exact_grid: grid reaches beyond dim/4; truncation artifacts likely");
            warned = true;
        }
    parallel_for(int(out.points.size()), [&](int i) {
        auto& p = out.points[i];
        p.re_chi = std::real((rho_osc * displacement_matrix(p.beta, n)).trace());
        p.m_bright = p.m_total = -1;
    });
    return out;
}

ChiGrid symmetrize(const ChiGrid& quadrant) {
    if (!quadrant.symmetric)
        throw SymmetryViolation("symmetrize: grid is flagged asymmetric");
    std::map<PointKey, ChiPoint> full;
    for (const auto& p : quadrant.points) {
        if (std::real(p.beta) < -kPointTol || std::imag(p.beta) < -kPointTol)
            throw SymmetryViolation("symmetrize: input must be a positive quadrant");
        const double re = std::real(p.beta), im = std::imag(p.beta);
        for (double sr : {1.0, -1.0}) {
            for (double si : {1.0, -1.0}) {
                ChiPoint q = p;
                q.beta = Complex(sr * re, si * im);
                full[key_of(q.beta)] = q;
            }
        }
    }
    ChiGrid out;
    out.beta_scale = quadrant.beta_scale;
    out.extent = quadrant.extent;
    out.side = quadrant.side > 0 ? 2 * quadrant.side - 1 : 0;
    out.symmetric = true;
    for (auto& [k, p] : full) out.points.push_back(p);
    sort_canonical(out.points);
    return out;
}

ChiGrid restrict_quadrant(const ChiGrid& full) {
    ChiGrid out;
    out.beta_scale = full.beta_scale;
    out.extent = full.extent;
    out.side = full.side > 0 ? (full.side + 1) / 2 : 0;
    out.symmetric = full.symmetric;
    for (const auto& p : full.points)
        if (std::real(p.beta) >= -kPointTol && std::imag(p.beta) >= -kPointTol)
            out.points.push_back(p);
    sort_canonical(out.points);
    return out;
}

namespace {

// Projection of a Hermitian matrix onto {ρ ⪰ 0, Tr ρ = 1} (eigenvalue
// simplex projection).
CMat project_density(const CMat& herm) {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (herm + herm.adjoint()));
    RVec lam = es.eigenvalues();
    std::vector<double> sorted(lam.data(), lam.data() + lam.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int k = 0;
    for (size_t i = 0; i < sorted.size(); ++i) {
        cum += sorted[i];
        const double t = (cum - 1.0) / double(i + 1);
        if (sorted[i] - t > 0) {
            theta = t;
            k = int(i + 1);
        }
    }
    (void)k;
    RVec proj = (lam.array() - theta).cwiseMax(0.0);
    return es.eigenvectors() * proj.asDiagonal() * es.eigenvectors().adjoint();
}

struct DesignMatrix {
    CMat a;       // n_pts × dim², row i = vec(D_i^T)
    RVec b;       // measured re_chi
    int dim;

    Complex predict_entry(const CVec& v, int i) const { return a.row(i).dot(v); }
};

CVec vec_rowmajor(const CMat& m) {
    const int d = int(m.rows());
    CVec v(d * d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) v(r * d + c) = m(r, c);
    return v;
}

CMat unvec_rowmajor(const CVec& v, int d) {
    CMat m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = v(r * d + c);
    return m;
}

DesignMatrix build_design(const ChiGrid& grid, int dim) {
    DesignMatrix dm;
    dm.dim = dim;
    const int n_pts = int(grid.points.size());
    dm.a.resize(n_pts, dim * dim);
    dm.b.resize(n_pts);

    // Quadrant representatives: D(-β) = D(β)†, D(β*) = conj D(β).
    std::map<PointKey, int> rep_index;
    std::vector<Complex> rep_beta;
    for (int i = 0; i < n_pts; ++i) {
        const Complex beta = grid.points[i].beta;
        const Complex rep(std::abs(std::real(beta)), std::abs(std::imag(beta)));
        if (rep_index.try_emplace(key_of(rep), int(rep_beta.size())).second)
            rep_beta.push_back(rep);
    }
    std::vector<CMat> rep_d(rep_beta.size());
    parallel_for(int(rep_beta.size()), [&](int i) {
        rep_d[i] = displacement_matrix(rep_beta[i], dim);
    });

    for (int i = 0; i < n_pts; ++i) {
        const Complex beta = grid.points[i].beta;
        const Complex rep(std::abs(std::real(beta)), std::abs(std::imag(beta)));
        const CMat& d0 = rep_d[rep_index.at(key_of(rep))];
        CMat d;
        const bool flip_re = std::real(beta) < -kPointTol;
        const bool flip_im = std::imag(beta) < -kPointTol;
        // β = (±re, ±im): conjugate for im flip, adjoint for full negation.
        if (!flip_re && !flip_im) d = d0;
        else if (flip_re && flip_im) d = d0.adjoint();
        else if (flip_im) d = d0.conjugate();
        else d = d0.transpose();  // adjoint of the conjugate
        // χ_i = Tr(ρ D_i) = Σ_{mn} ρ(m,n) D_i(n,m)
        for (int m = 0; m < dim; ++m)
            for (int c = 0; c < dim; ++c) dm.a(i, m * dim + c) = d(c, m);
        dm.b(i) = grid.points[i].re_chi;
    }
    return dm;
}

}  // namespace

ReconstructResult reconstruct_density(const ChiGrid& grid, int dim,
                                      const ReconstructOptions& opts) {
    grid.validate();
    const int n_pts = int(grid.points.size());
    if (n_pts < dim * dim / 4)
        throw IllPosed("reconstruct_density: fewer grid points than dim^2/4");

    const DesignMatrix dm = build_design(grid, dim);
    const CVec bc = dm.b.cast<Complex>();

    // Frame-operator initialization: ρ₀ ∝ Σ_i χ_i D(β_i)†, projected.
    CMat rho0 = CMat::Zero(dim, dim);
    {
        const CVec coeff = dm.a.adjoint() * bc;  // unvec gives Σ_i χ_i D_i†
        const CMat m = unvec_rowmajor(coeff, dim);
        rho0 = project_density(0.5 * (m + m.adjoint()));
    }

    // Unconstrained least-squares warm start: conjugate gradients on the
    // normal equations A†A v = A†b, matrix-free.
    int used_iters = 0;
    {
        CVec v = vec_rowmajor(rho0);
        const CVec rhs = dm.a.adjoint() * bc;
        CVec resid = rhs - dm.a.adjoint() * (dm.a * v);
        CVec dir = resid;
        double rr = resid.squaredNorm();
        const double rr0 = std::max(rr, 1e-300);
        for (int it = 0; it < std::min(opts.max_iterations, 800); ++it) {
            ++used_iters;
            const CVec ad = dm.a.adjoint() * (dm.a * dir);
            const Complex denom = dir.dot(ad);
            if (std::abs(denom) < 1e-300) break;
            const Complex alpha = rr / denom;
            v += alpha * dir;
            resid -= alpha * ad;
            const double rr_new = resid.squaredNorm();
            if (rr_new < 1e-24 * rr0) break;
            dir = resid + (rr_new / rr) * dir;
            rr = rr_new;
        }
        CMat m = unvec_rowmajor(v, dim);
        rho0 = project_density(0.5 * (m + m.adjoint()));
    }

    // Lipschitz constant of ∇f via power iteration on A†A.
    double lips = 0.0;
    {
        CVec v = CVec::Ones(dim * dim);
        v.normalize();
        for (int it = 0; it < 30; ++it) {
            CVec w = dm.a.adjoint() * (dm.a * v);
            lips = w.norm();
            if (lips == 0.0) break;
            v = w / lips;
        }
        lips = std::max(lips * 2.0, 1e-12);
    }

    auto hermitian_grad = [&](const CMat& point) {
        const CVec resid = dm.a * vec_rowmajor(point) - bc;
        const CVec g = dm.a.adjoint() * resid;
        const CMat grad = unvec_rowmajor(g, dim);
        return CMat(grad + grad.adjoint());
    };

    // FISTA with gradient-scheme restarts and movement-based stopping.
    CMat x = rho0, y = rho0;
    double t_mom = 1.0;
    int calm = 0;
    for (int it = 0; it < opts.max_iterations; ++it) {
        ++used_iters;
        CMat x_next = project_density(y - hermitian_grad(y) / lips);
        const double overshoot = std::real(((y - x_next).adjoint() * (x_next - x)).trace());
        if (overshoot > 0.0) {  // momentum points uphill: restart from x
            t_mom = 1.0;
            y = x;
            x_next = project_density(y - hermitian_grad(y) / lips);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        const double move = (x_next - x).norm();
        y = x_next + ((t_mom - 1.0) / t_next) * (x_next - x);
        x = x_next;
        t_mom = t_next;
        if (move < opts.tol * std::max(1.0, x.norm())) {
            if (++calm >= 5) break;
        } else {
            calm = 0;
        }
    }

    ReconstructResult out;
    out.rho = 0.5 * (x + x.adjoint());
    out.rho /= out.rho.trace().real();
    out.residual_rms = std::sqrt((dm.a * vec_rowmajor(out.rho) - bc).squaredNorm() /
                                 double(n_pts));
    out.iterations = used_iters;
    if (out.residual_rms > opts.illposed_residual)
        throw IllPosed("reconstruct_density: residual plateau exceeds threshold");
    return out;
}

ReconstructResult reconstruct_escalating(const ChiGrid& grid, const CVec& target,
                                         int start_dim, int step,
                                         const ReconstructOptions& opts) {
    const int n_pts = int(grid.points.size());
    const int dim_cap = int(std::floor(2.0 * std::sqrt(double(n_pts))));
    int dim = std::min(start_dim, dim_cap);
    ReconstructResult cur = reconstruct_density(grid, dim, opts);
    auto fid = [&](const ReconstructResult& r, int d) {
        CVec t = CVec::Zero(d);
        const int ncopy = std::min<int>(d, int(target.size()));
        t.head(ncopy) = target.head(ncopy);
        t.normalize();
        return fock::state_fidelity(r.rho, t);
    };
    double f_cur = fid(cur, dim);
    while (dim + step <= dim_cap) {
        const int dim_next = dim + step;
        ReconstructResult next = reconstruct_density(grid, dim_next, opts);
        const double f_next = fid(next, dim_next);
        cur = std::move(next);
        dim = dim_next;
        if (std::abs(f_next - f_cur) < 1e-3) {
            f_cur = f_next;
            break;
        }
        f_cur = f_next;
    }
    return cur;
}

BootstrapResult bootstrap(const ChiGrid& grid, int n_resamples, int resample_size,
                          const std::function<double(const ChiGrid&)>& metric_fn,
                          std::uint64_t seed) {
    for (const auto& p : grid.points)
        if (!p.has_shots())
            throw MissingShots("bootstrap: grid lacks shot records");

    BootstrapResult out;
    out.samples.resize(n_resamples);
    std::vector<ChiGrid> resampled(n_resamples, grid);
    parallel_for(n_resamples, [&](int r) {
        std::mt19937_64 rng(mix_seed(seed, r));
        ChiGrid& g = resampled[r];
        for (auto& p : g.points) {
            const double frac = double(p.m_bright) / double(p.m_total);
            p.m_bright = sample_binomial(rng, resample_size, frac);
            p.m_total = resample_size;
            p.re_chi = 2.0 * double(p.m_bright) / double(p.m_total) - 1.0;
        }
        out.samples[r] = metric_fn(g);
    });
    double mean = 0.0;
    for (double v : out.samples) mean += v;
    mean /= double(n_resamples);
    double var = 0.0;
    for (double v : out.samples) var += (v - mean) * (v - mean);
    out.mean = mean;
    out.sigma = n_resamples > 1 ? std::sqrt(var / double(n_resamples - 1)) : 0.0;
    return out;
}

RMat hermite_table(int dim, const RVec& xs) {
    RMat psi(dim, xs.size());
    for (Eigen::Index j = 0; j < xs.size(); ++j) {
        const double x = xs(j);
        psi(0, j) = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
        if (dim > 1) psi(1, j) = std::sqrt(2.0) * x * psi(0, j);
        for (int n = 1; n + 1 < dim; ++n)
            psi(n + 1, j) = std::sqrt(2.0 / double(n + 1)) * x * psi(n, j) -
                            std::sqrt(double(n) / double(n + 1)) * psi(n - 1, j);
    }
    return psi;
}

RVec position_marginal(const CMat& rho, const RVec& xs) {
    const int dim = int(rho.rows());
    const RMat psi = hermite_table(dim, xs);
    RVec out(xs.size());
    for (Eigen::Index j = 0; j < xs.size(); ++j) {
        const CVec u = psi.col(j).cast<Complex>();
        out(j) = std::real(u.dot(rho * u));
    }
    return out;
}

RMat wigner(const CMat& rho, const RVec& xs, const RVec& ps) {
    const int dim = int(rho.rows());
    if (xs.size() < 2) throw std::invalid_argument("wigner: need at least two x samples");
    const double dx = xs(1) - xs(0);
    for (Eigen::Index i = 1; i < xs.size(); ++i)
        if (std::abs((xs(i) - xs(i - 1)) - dx) > 1e-9 * std::max(1.0, std::abs(dx)))
            throw std::invalid_argument("wigner: x grid must be uniform");

    // Common z-grid holding every x ± y combination.
    const double support = std::sqrt(2.0 * dim) + 6.0;
    const int sub = std::max(1, int(std::ceil(dx / 0.02)));
    const double dz = dx / double(sub);
    const double z_lo = xs(0) - support, z_hi = xs(xs.size() - 1) + support;
    const int n_z = int(std::ceil((z_hi - z_lo) / dz)) + 1;
    RVec zs(n_z);
    for (int i = 0; i < n_z; ++i) zs(i) = z_lo + i * dz;

    const RMat psi = hermite_table(dim, zs);
    const CMat v = rho * psi.cast<Complex>();  // dim × n_z

    // y runs over multiples of dz in [-support, support].
    const int n_y_half = int(std::floor(support / dz));
    const int n_y = 2 * n_y_half + 1;

    RMat w(xs.size(), ps.size());
    w.setZero();
    std::vector<double> f_re(n_y), f_im(n_y);
    for (Eigen::Index ix = 0; ix < xs.size(); ++ix) {
        const long base = lround((xs(ix) - z_lo) / dz);
        for (int iy = 0; iy < n_y; ++iy) {
            const long off = iy - n_y_half;
            const long i_minus = base - off;  // index of x - y
            const long i_plus = base + off;   // index of x + y
            Complex f = 0.0;
            if (i_minus >= 0 && i_minus < n_z && i_plus >= 0 && i_plus < n_z) {
                for (int m = 0; m < dim; ++m) f += psi(m, i_minus) * v(m, i_plus);
            }
            f_re[iy] = std::real(f);
            f_im[iy] = std::imag(f);
        }
        for (Eigen::Index ip = 0; ip < ps.size(); ++ip) {
            double acc = 0.0;
            const double p = ps(ip);
            for (int iy = 0; iy < n_y; ++iy) {
                const double y = (iy - n_y_half) * dz;
                acc += f_re[iy] * std::cos(2.0 * p * y) - f_im[iy] * std::sin(2.0 * p * y);
            }
            w(ix, ip) = acc * dz / kPi;
        }
    }
    return w;
}

}  // namespace bosonforge::tomography
