#include "bosonforge/runner.hpp"

#include "bosonforge/fock.hpp"
#include "bosonforge/gatebased.hpp"
#include "bosonforge/metrics.hpp"
#include "bosonforge/targets.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

namespace bosonforge::runner {

using io::json;
using optimizer::TargetSpec;

namespace {

std::string target_name(const TargetSpec& t) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            char buf[64];
            if constexpr (std::is_same_v<T, targets::SqueezeSpec>) {
                std::snprintf(buf, sizeof(buf), "squeezed_r%.3g", s.r);
            } else if constexpr (std::is_same_v<T, targets::GkpSpec>) {
                std::snprintf(buf, sizeof(buf), "gkp_%s_mu%d_delta%.3g",
                              s.lattice == targets::GkpLattice::square ? "square" : "hex",
                              s.mu, s.delta);
            } else {
                std::snprintf(buf, sizeof(buf), "binomial_%s_S%d_N%d",
                              s.logical == targets::BinomialLogical::plus_z ? "pZ" : "mZ",
                              s.spacing, s.order);
            }
            return buf;
        },
        t);
}

int parity_spin(const CVec& target) {
    double parity = 0.0;
    for (Eigen::Index n = 0; n < target.size(); ++n)
        parity += (n % 2 == 0 ? 1.0 : -1.0) * std::norm(target(n));
    return parity >= 0.0 ? 0 : 1;
}

CVec hybrid_target(const CVec& osc) {
    CVec t = CVec::Zero(2 * osc.size());
    t.head(osc.size()) = osc;
    return t;
}

CVec hybrid_start(int spin, int dim) {
    CVec v = CVec::Zero(2 * dim);
    v(spin * dim) = 1.0;
    return v;
}

double max_raw_beta(const tomography::ChiGrid& grid) {
    double m = 0.0;
    for (const auto& p : grid.points) m = std::max(m, std::abs(p.beta));
    return m;
}

int derive_sim_dim(int state_dim, double max_beta) {
    const double reach = std::sqrt(double(state_dim)) + 0.55 * max_beta;
    return std::min(int(std::ceil(reach * reach)), state_dim + 45);
}

json meta_block(const json& raw) {
    return {{"version", kVersion}, {"config_hash", io::config_hash(raw)}};
}

std::string meta_comment(const json& raw) {
    return std::string("bosonforge ") + kVersion + " config " + io::config_hash(raw);
}

}  // namespace

TargetDefaults target_defaults(const TargetSpec& target) {
    return std::visit(
        [](const auto& s) -> TargetDefaults {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, targets::SqueezeSpec>) {
                return {60, 60, 1.0, 3.5};
            } else if constexpr (std::is_same_v<T, targets::GkpSpec>) {
                const double scale = s.lattice == targets::GkpLattice::square
                                         ? std::sqrt(kTwoPi)
                                         : std::sqrt(std::sqrt(3.0) * kPi);
                return {44, 43, scale, 3.0};
            } else {
                return {4 * (s.highest_fock() / 4) + 8, 43, 1.0, 3.0};
            }
        },
        target);
}

TargetSpec parse_target(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "squeezed") return targets::SqueezeSpec(j.at("r").get<double>());
    if (kind == "gkp") {
        const std::string lat = j.at("lattice").get<std::string>();
        return targets::GkpSpec(lat == "square" ? targets::GkpLattice::square
                                                : targets::GkpLattice::hexagonal,
                                j.value("mu", 0), j.at("delta").get<double>());
    }
    if (kind == "binomial") {
        const std::string logical = j.value("logical", "+Z");
        return targets::BinomialSpec(j.at("spacing").get<int>(), j.at("order").get<int>(),
                                     logical == "+Z" ? targets::BinomialLogical::plus_z
                                                     : targets::BinomialLogical::minus_z);
    }
    throw std::invalid_argument("unknown target kind: " + kind);
}

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    cfg.raw = j;
    const std::string task = j.at("task").get<std::string>();
    static const std::map<std::string, Task> kTasks = {
        {"optimize", Task::optimize},         {"propagate", Task::propagate},
        {"tomography", Task::tomography},     {"reconstruct", Task::reconstruct},
        {"analyze", Task::analyze},           {"compare-gates", Task::compare_gates},
        {"error-budget", Task::error_budget}};
    const auto it = kTasks.find(task);
    if (it == kTasks.end()) throw std::invalid_argument("unknown task: " + task);
    cfg.task = it->second;

    if (j.contains("target")) cfg.target = parse_target(j.at("target"));
    if (j.contains("space")) {
        const auto& s = j.at("space");
        cfg.dim = s.value("dim", 0);
        cfg.sim_dim = s.value("sim_dim", 0);
        cfg.reconstruct_dim = s.value("reconstruct_dim", 0);
    }
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        cfg.opt.cost.epsilon = o.value("epsilon", cfg.opt.cost.epsilon);
        cfg.opt.cost.t_max = o.value("t_max_s", cfg.opt.cost.t_max);
        cfg.opt.n_seg_opt = o.value("n_seg_opt", cfg.opt.n_seg_opt);
        cfg.opt.n_seg_out = o.value("n_seg_out", cfg.opt.n_seg_out);
        cfg.opt.omega = kTwoPi * o.value("omega_hz", cfg.opt.omega / kTwoPi);
        cfg.opt.constraints.slew_rate_times_t =
            kTwoPi * o.value("slew_rate_t_2pi",
                             cfg.opt.constraints.slew_rate_times_t / kTwoPi);
        cfg.opt.constraints.cutoff_times_t =
            kTwoPi * o.value("cutoff_t_2pi", cfg.opt.constraints.cutoff_times_t / kTwoPi);
        cfg.opt.constraints.enabled = o.value("constraints", cfg.opt.constraints.enabled);
        cfg.opt.robust.n = o.value("robust_n", cfg.opt.robust.n);
        cfg.opt.robust.sigma = kTwoPi * o.value("robust_sigma_hz",
                                                cfg.opt.robust.sigma / kTwoPi);
        cfg.opt.n_starts = o.value("n_starts", cfg.opt.n_starts);
        cfg.opt.max_iterations = o.value("max_iterations", cfg.opt.max_iterations);
        cfg.opt.report_dim_margin = o.value("report_dim_margin", cfg.opt.report_dim_margin);
        if (o.contains("durations_us"))
            for (double us : o.at("durations_us")) cfg.opt.duration_grid_s.push_back(us * 1e-6);
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        cfg.noise = dynamics::NoiseModel(n.value("gamma_hz", 0.0),
                                         kTwoPi * n.value("delta_2pi_hz", 0.0),
                                         n.value("nbar", 0.0));
    }
    if (j.contains("sdf")) {
        const auto& s = j.at("sdf");
        cfg.sdf_omega = kTwoPi * s.value("omega_hz", cfg.sdf_omega / kTwoPi);
        cfg.shots = s.value("shots", cfg.shots);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        cfg.grid.side = g.value("side", cfg.grid.side);
        cfg.grid.extent = g.value("extent", cfg.grid.extent);
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.waveform_path = j.value("waveform", "");
    cfg.chi_path = j.value("chi", "");
    cfg.rho_path = j.value("rho", "");
    cfg.hastrup_path = j.value("hastrup", "");
    cfg.source = j.value("source", cfg.source);
    cfg.escalate = j.value("escalate", cfg.escalate);
    cfg.analyze_reconstruct = j.value("analyze_reconstruct", cfg.analyze_reconstruct);
    if (j.contains("compare_db")) {
        cfg.compare_db.clear();
        for (double v : j.at("compare_db")) cfg.compare_db.push_back(v);
    }
    return cfg;
}

namespace {

struct Paths {
    std::filesystem::path dir;
    std::string str(const std::string& name) const { return (dir / name).string(); }
};

Paths make_out_dir(const RunConfig& cfg) {
    Paths p{cfg.out_dir};
    std::filesystem::create_directories(p.dir);
    return p;
}

tomography::ChiGrid grid_for_target(const RunConfig& cfg, const TargetSpec& target) {
    const auto defs = target_defaults(target);
    const double extent = cfg.grid.extent > 0 ? cfg.grid.extent : defs.extent;
    tomography::ChiGrid grid =
        tomography::make_quadrant_grid(cfg.grid.side, extent, defs.beta_scale);
    // GKP analysis needs χ at the stabilizer and decoder lattice points; fold
    // their quadrant representatives into the measurement set.
    if (std::holds_alternative<targets::GkpSpec>(target)) {
        const auto& spec = std::get<targets::GkpSpec>(target);
        std::set<std::pair<long, long>> have;
        for (const auto& p : grid.points)
            have.insert({llround(std::real(p.beta) * 1e9), llround(std::imag(p.beta) * 1e9)});
        auto add_point = [&](Complex pt) {
            const Complex rep(std::abs(std::real(pt)), std::abs(std::imag(pt)));
            const auto key = std::make_pair(llround(std::real(rep) * 1e9),
                                            llround(std::imag(rep) * 1e9));
            if (have.insert(key).second) grid.points.push_back({rep, 0.0, -1, -1});
        };
        for (const auto& pt : metrics::decoder_points(spec)) add_point(pt);
        add_point(2.0 * spec.alpha());
        add_point(2.0 * spec.beta());
    }
    return grid;
}

int run_optimize(const RunConfig& cfg, const Paths& out) {
    if (!cfg.target) throw std::invalid_argument("optimize: config needs a target");
    if (!cfg.seed) throw std::invalid_argument("optimize: stochastic task needs a seed");
    const auto defs = target_defaults(*cfg.target);
    const FockSpace space(cfg.dim > 0 ? cfg.dim : defs.dim);
    const auto pulse = optimizer::optimize(*cfg.target, space, cfg.opt, *cfg.seed);

    io::save_waveform(pulse.waveform, out.str("waveform.json"));
    // Round-trip and recompute the stored fidelity before reporting.
    const auto wf_back = io::load_waveform(out.str("waveform.json"));
    {
        const FockSpace rspace(space.dim + cfg.opt.report_dim_margin);
        const CVec target_big = optimizer::build_target(*cfg.target, rspace);
        const CVec psi =
            dynamics::propagate_unitary(wf_back, hybrid_start(parity_spin(target_big), rspace.dim));
        const double f_redo = std::norm(hybrid_target(target_big).dot(psi));
        if (std::abs(f_redo - pulse.f_th) > 1e-9)
            throw Error("optimize: stored f_th does not match the saved waveform");
    }

    json report;
    report["target"] = target_name(*cfg.target);
    report["f_th"] = pulse.f_th;
    report["cost"] = pulse.cost;
    report["duration_s"] = pulse.duration;
    report["iterations"] = pulse.iterations;
    report["seed"] = pulse.seed;
    report["cost_trace"] = pulse.cost_trace;
    report["delta_offsets_rad_s"] = pulse.delta_offsets;
    report["per_delta_fidelity"] = pulse.per_delta_fidelity;
    report["space_dim"] = space.dim;
    report["_meta"] = meta_block(cfg.raw);
    io::write_json_file(report, out.str("optimizer_report.json"));
    std::cout << "optimize " << report["target"] << ": f_th = " << pulse.f_th
              << ", duration = " << pulse.duration * 1e6 << " us\n";
    return 0;
}

int run_propagate(const RunConfig& cfg, const Paths& out) {
    if (!cfg.target) throw std::invalid_argument("propagate: config needs a target");
    if (cfg.waveform_path.empty())
        throw std::invalid_argument("propagate: config needs a waveform path");
    const auto wf = io::load_waveform(cfg.waveform_path);
    const auto defs = target_defaults(*cfg.target);
    const FockSpace space(cfg.dim > 0 ? cfg.dim : defs.dim);
    const CVec target = optimizer::build_target(*cfg.target, space);
    const int spin0 = parity_spin(target);

    const CVec psi0 = hybrid_start(spin0, space.dim);
    const CVec psi = dynamics::propagate_unitary(wf, psi0);
    const double fid = std::norm(hybrid_target(target).dot(psi));

    const CMat parity =
        fock::embed_hybrid(fock::sigma_z(), fock::parity_op(space));
    const double parity_drift = std::abs(std::real(fock::expectation(parity, psi)) -
                                         std::real(fock::expectation(parity, psi0)));

    json report;
    report["target"] = target_name(*cfg.target);
    report["fidelity"] = fid;
    report["duration_s"] = wf.total_duration();
    report["joint_parity_drift"] = parity_drift;
    if (cfg.noise.gamma > 0 || cfg.noise.delta != 0 || cfg.noise.nbar > 0) {
        CMat rho0 = CMat::Zero(space.hybrid_dim(), space.hybrid_dim());
        const CMat th = dynamics::thermal_state(cfg.noise.nbar, space);
        rho0.block(spin0 * space.dim, spin0 * space.dim, space.dim, space.dim) = th;
        const CMat rho = dynamics::propagate_master(wf, cfg.noise, rho0, space);
        report["fidelity_noisy"] = fock::state_fidelity(rho, hybrid_target(target));
    }
    report["_meta"] = meta_block(cfg.raw);
    io::write_json_file(report, out.str("propagate_report.json"));
    std::cout << "propagate: fidelity = " << fid << "\n";
    return 0;
}

int run_tomography(const RunConfig& cfg, const Paths& out) {
    if (!cfg.target) throw std::invalid_argument("tomography: config needs a target");
    const bool stochastic = cfg.shots > 0;
    if (stochastic && !cfg.seed)
        throw std::invalid_argument("tomography: shots > 0 needs a seed");
    const auto defs = target_defaults(*cfg.target);
    const int state_dim = cfg.dim > 0 ? cfg.dim : defs.dim;

    tomography::ChiGrid grid_spec = grid_for_target(cfg, *cfg.target);
    const int sim_dim = cfg.sim_dim > 0 ? cfg.sim_dim
                                        : derive_sim_dim(state_dim, max_raw_beta(grid_spec));
    const FockSpace sim_space(sim_dim);

    tomography::SdfConfig sdf;
    sdf.omega_sdf = cfg.sdf_omega;
    sdf.noise = cfg.noise;
    sdf.shots = cfg.shots;
    const std::uint64_t seed = cfg.seed.value_or(0);

    tomography::ChiGrid quadrant;
    if (cfg.source == "pulse") {
        if (cfg.waveform_path.empty())
            throw std::invalid_argument("tomography: source=pulse needs a waveform");
        const auto wf = io::load_waveform(cfg.waveform_path);
        const CVec target = optimizer::build_target(*cfg.target, sim_space);
        const CVec psi0 = hybrid_start(parity_spin(target), sim_dim);
        if (cfg.noise.gamma > 0 || cfg.noise.nbar > 0) {
            CMat rho0 = CMat::Zero(2 * sim_dim, 2 * sim_dim);
            const CMat th = dynamics::thermal_state(cfg.noise.nbar, sim_space);
            const int s0 = parity_spin(target);
            rho0.block(s0 * sim_dim, s0 * sim_dim, sim_dim, sim_dim) = th;
            const CMat rho = dynamics::propagate_master(wf, cfg.noise, rho0, sim_space);
            quadrant = tomography::measure_grid(rho, sim_space, grid_spec, sdf, seed);
        } else {
            const CVec psi = dynamics::propagate_detuned(wf, cfg.noise.delta, psi0);
            quadrant = tomography::measure_grid(psi, sim_space, grid_spec, sdf, seed);
        }
    } else {
        const CVec target = optimizer::build_target(*cfg.target, sim_space);
        if (cfg.noise.gamma > 0) {
            const CMat rho = target * target.adjoint();
            quadrant = tomography::measure_grid(rho, sim_space, grid_spec, sdf, seed);
        } else {
            quadrant = tomography::measure_grid(target, sim_space, grid_spec, sdf, seed);
        }
    }

    io::save_chi_csv(quadrant, out.str("chi_quadrant.csv"), meta_comment(cfg.raw));
    io::save_chi_csv(tomography::symmetrize(quadrant), out.str("chi_full.csv"),
                     meta_comment(cfg.raw));
    std::cout << "tomography: " << quadrant.points.size() << " quadrant points\n";
    return 0;
}

json metrics_from_density(const CMat& rho, const TargetSpec& target, int dim) {
    json m;
    const FockSpace space(dim);
    const CVec psi_t = optimizer::build_target(target, space);
    m["fidelity"] = fock::state_fidelity(rho, psi_t);
    if (std::holds_alternative<targets::GkpSpec>(target)) {
        const auto& spec = std::get<targets::GkpSpec>(target);
        const auto st = metrics::stabilizer_squeezing(rho, spec);
        m["squeezing_x_db"] = st.db_x;
        m["squeezing_z_db"] = st.db_z;
        m["delta_x"] = st.delta_x;
        m["delta_z"] = st.delta_z;
        const auto eff = metrics::effective_squeezing(rho, spec);
        m["effective_squeezing_db"] = eff.db;
        m["effective_delta"] = eff.delta_star;
        const auto lf = metrics::logical_fidelity(rho, spec);
        m["logical_fidelity"] = lf.f_bar;
        m["bloch"] = {lf.bloch_x, lf.bloch_y, lf.bloch_z};
        m["bloch_exceeds_unit"] = lf.bloch_exceeds_unit;
    }
    if (std::holds_alternative<targets::SqueezeSpec>(target))
        m["squeezing_db_density"] = metrics::squeezing_from_density(rho);
    return m;
}

int run_reconstruct(const RunConfig& cfg, const Paths& out) {
    if (cfg.chi_path.empty())
        throw std::invalid_argument("reconstruct: config needs a chi path");
    tomography::ChiGrid grid = io::load_chi_csv(cfg.chi_path);
    // Quadrant files are symmetrized before solving.
    bool quadrant_only = true;
    for (const auto& p : grid.points)
        if (std::real(p.beta) < -1e-12 || std::imag(p.beta) < -1e-12) quadrant_only = false;
    if (quadrant_only && grid.symmetric) grid = tomography::symmetrize(grid);

    int dim = cfg.reconstruct_dim;
    if (dim == 0 && cfg.target) dim = target_defaults(*cfg.target).reconstruct_dim;
    if (dim == 0) dim = 43;

    tomography::ReconstructResult res;
    if (cfg.escalate) {
        if (!cfg.target)
            throw std::invalid_argument("reconstruct: escalation needs a target");
        const CVec t = optimizer::build_target(*cfg.target, FockSpace(dim));
        res = tomography::reconstruct_escalating(grid, t, dim);
    } else {
        res = tomography::reconstruct_density(grid, dim);
    }

    io::save_density_csv(res.rho, out.str("rho.csv"), meta_comment(cfg.raw));
    json report;
    report["dim"] = int(res.rho.rows());
    report["residual_rms"] = res.residual_rms;
    report["iterations"] = res.iterations;
    if (cfg.target)
        report["metrics"] = metrics_from_density(res.rho, *cfg.target, int(res.rho.rows()));
    report["_meta"] = meta_block(cfg.raw);
    io::write_json_file(report, out.str("reconstruct_report.json"));
    std::cout << "reconstruct: dim " << res.rho.rows() << ", residual "
              << res.residual_rms << "\n";
    return 0;
}

int run_analyze(const RunConfig& cfg, const Paths& out) {
    if (!cfg.target) throw std::invalid_argument("analyze: config needs a target");
    json report;
    report["target"] = target_name(*cfg.target);

    tomography::ChiGrid grid;
    bool have_grid = false;
    if (!cfg.chi_path.empty()) {
        grid = io::load_chi_csv(cfg.chi_path);
        bool quadrant_only = true;
        for (const auto& p : grid.points)
            if (std::real(p.beta) < -1e-12 || std::imag(p.beta) < -1e-12)
                quadrant_only = false;
        if (quadrant_only && grid.symmetric) grid = tomography::symmetrize(grid);
        have_grid = true;
    }

    if (have_grid) {
        // Pseudo-fidelity against the exact characteristic function of the
        // target on the same point set.
        const auto defs = target_defaults(*cfg.target);
        const int dim_th = derive_sim_dim(cfg.dim > 0 ? cfg.dim : defs.dim,
                                          max_raw_beta(grid));
        const CVec psi_t = optimizer::build_target(*cfg.target, FockSpace(dim_th));
        const auto th = tomography::exact_grid(psi_t, grid);
        report["pseudo_fidelity"] = metrics::pseudo_fidelity(grid, th);
        if (std::holds_alternative<targets::GkpSpec>(*cfg.target)) {
            const auto& spec = std::get<targets::GkpSpec>(*cfg.target);
            try {
                const auto st = metrics::stabilizer_squeezing(grid, spec);
                report["squeezing_x_db"] = st.db_x;
                report["squeezing_z_db"] = st.db_z;
            } catch (const MissingPoint&) {
                report["squeezing_note"] = "grid lacks stabilizer points";
            }
            try {
                const auto lf = metrics::logical_fidelity(grid, spec);
                report["logical_fidelity"] = lf.f_bar;
                report["bloch"] = {lf.bloch_x, lf.bloch_y, lf.bloch_z};
            } catch (const MissingPoint&) {
                report["logical_note"] = "grid lacks decoder points";
            }
        }
        if (std::holds_alternative<targets::SqueezeSpec>(*cfg.target)) {
            double a_scale = 1.0;
            for (const auto& p : grid.points)
                if (std::abs(p.beta) == 0.0) a_scale = p.re_chi;
            const auto fit = metrics::fit_squeezed(grid, a_scale);
            report["squeezing_fit_db"] = fit.db;
            if (fit.db_re) report["squeezing_fit_re_axis_db"] = *fit.db_re;
            if (fit.db_im) report["squeezing_fit_im_axis_db"] = *fit.db_im;
        }
    }

    CMat rho;
    bool have_rho = false;
    if (!cfg.rho_path.empty()) {
        rho = io::load_density_csv(cfg.rho_path);
        have_rho = true;
    } else if (have_grid && cfg.analyze_reconstruct) {
        int dim = cfg.reconstruct_dim ? cfg.reconstruct_dim
                                      : target_defaults(*cfg.target).reconstruct_dim;
        rho = tomography::reconstruct_density(grid, dim).rho;
        have_rho = true;
    }
    if (have_rho) report["density"] = metrics_from_density(rho, *cfg.target, int(rho.rows()));

    if (have_grid && cfg.analyze_reconstruct) {
        bool shots_ok = true;
        for (const auto& p : grid.points)
            if (!p.has_shots()) shots_ok = false;
        if (shots_ok && cfg.target) {
            const int dim = cfg.reconstruct_dim ? cfg.reconstruct_dim
                                                : target_defaults(*cfg.target).reconstruct_dim;
            const CVec psi_t = optimizer::build_target(*cfg.target, FockSpace(dim));
            const auto bs = tomography::bootstrap(
                grid, 100, 400,
                [&](const tomography::ChiGrid& g) {
                    return fock::state_fidelity(tomography::reconstruct_density(g, dim).rho,
                                                psi_t);
                },
                cfg.seed.value_or(0));
            report["fidelity_bootstrap_mean"] = bs.mean;
            report["fidelity_bootstrap_sigma"] = bs.sigma;
        }
    }

    report["_meta"] = meta_block(cfg.raw);
    io::write_json_file(report, out.str("metrics_report.json"));
    std::cout << "analyze: report written\n";
    return 0;
}

int run_compare_gates(const RunConfig& cfg, const Paths& out) {
    if (!cfg.seed) throw std::invalid_argument("compare-gates: needs a seed");
    const int eval_dim = cfg.sim_dim > 0 ? cfg.sim_dim : 150;
    const FockSpace eval_space(eval_dim);
    gatebased::DurationModel model;  // η = 0.1, ηΩ = 2π×2 kHz

    std::vector<std::array<double, 3>> hastrup_params;  // u, w, v per round
    double hastrup_r = 0.0;
    if (!cfg.hastrup_path.empty()) {
        const json h = io::read_json_file(cfg.hastrup_path);
        if (!h.contains("u") || h.at("u").empty())
            throw MissingParams("compare-gates: hastrup parameter file has no values");
        const auto &u = h.at("u"), &w = h.at("w"), &v = h.at("v");
        for (size_t i = 0; i < u.size(); ++i)
            hastrup_params.push_back({u[i].get<double>(), w[i].get<double>(),
                                      v[i].get<double>()});
        hastrup_r = h.value("squeeze_r", 0.0);
    }

    std::ofstream csv(out.str("comparison.csv"));
    csv << "# " << meta_comment(cfg.raw) << "\n";
    csv << "method,target_delta_db,infidelity,duration_us\n";
    for (double db : cfg.compare_db) {
        const double delta = std::pow(10.0, -db / 20.0);
        const targets::GkpSpec spec(targets::GkpLattice::square, 1, delta);
        const double r = std::log(1.0 / delta);

        const auto deneve = gatebased::deneve_sequence(r);
        const auto ev = gatebased::evaluate_sequence(deneve, spec, eval_space, model);
        csv << "deneve," << db << ',' << ev.infidelity << ',' << ev.duration_s * 1e6 << "\n";

        if (!hastrup_params.empty()) {
            std::vector<double> u, w, v;
            for (const auto& p : hastrup_params) {
                u.push_back(p[0]);
                w.push_back(p[1]);
                v.push_back(p[2]);
            }
            const auto seq = gatebased::hastrup_sequence(u, w, v,
                                                         hastrup_r > 0 ? hastrup_r : r);
            const auto evh = gatebased::evaluate_sequence(seq, spec, eval_space, model);
            csv << "hastrup," << db << ',' << evh.infidelity << ',' << evh.duration_s * 1e6
                << "\n";
        }

        // Optimized pulse at the relaxed settings: ε = 1e-2, no slew/filter
        // constraints, fewer segments.
        optimizer::OptimizeConfig oc = cfg.opt;
        oc.cost.epsilon = 1e-2;
        oc.constraints.enabled = false;
        oc.n_seg_opt = std::min(oc.n_seg_opt, 80);
        oc.n_seg_out = oc.n_seg_opt;
        oc.robust.n = 0;
        const FockSpace opt_space(cfg.dim > 0 ? cfg.dim : 44);
        const auto pulse = optimizer::optimize(spec, opt_space, oc, *cfg.seed);
        csv << "optimized," << db << ',' << 1.0 - pulse.f_th << ','
            << pulse.duration * 1e6 << "\n";
    }
    std::cout << "compare-gates: comparison.csv written\n";
    return 0;
}

}  // namespace

ErrorBudgetRow error_budget_state(const TargetSpec& target,
                                  const optimizer::OptimizedPulse& pulse,
                                  const FockSpace& space,
                                  const ErrorBudgetSettings& settings) {
    const auto& wf = pulse.waveform;
    const CVec target_osc = optimizer::build_target(target, space);
    const CVec target_h = hybrid_target(target_osc);
    const int spin0 = parity_spin(target_osc);

    // (i) pulse imperfection, no decoherence
    const CVec psi_pulse = dynamics::propagate_unitary(wf, hybrid_start(spin0, space.dim));
    const double f_pulse = std::norm(target_h.dot(psi_pulse));

    // (ii) finite temperature, unitary evolution of the thermal mixture
    const double nbar = settings.noise.nbar;
    double f_thermal = 0.0;
    {
        const double q = nbar / (1.0 + nbar);
        double w = 1.0 / (1.0 + nbar);
        for (int n = 0; n <= 8; ++n) {
            CVec psi0 = CVec::Zero(space.hybrid_dim());
            psi0(spin0 * space.dim + n) = 1.0;
            const CVec psi = dynamics::propagate_unitary(wf, psi0);
            f_thermal += w * std::norm(target_h.dot(psi));
            w *= q;
        }
    }

    // (iii) + motional dephasing during preparation
    double f_deph;
    {
        CMat rho0 = CMat::Zero(space.hybrid_dim(), space.hybrid_dim());
        rho0.block(spin0 * space.dim, spin0 * space.dim, space.dim, space.dim) =
            dynamics::thermal_state(nbar, space);
        const CMat rho = dynamics::propagate_master(wf, settings.noise, rho0, space);
        f_deph = fock::state_fidelity(rho, target_h);
    }

    // (iv) dephasing during reconstruction, isolated: ideal state in, noisy
    // SDF grid out, constrained reconstruction back.
    double f_recon;
    {
        const auto defs = target_defaults(target);
        const int recon_dim =
            settings.reconstruct_dim > 0 ? settings.reconstruct_dim : defs.reconstruct_dim;
        tomography::ChiGrid grid_spec =
            tomography::make_quadrant_grid(settings.grid_side, defs.extent, defs.beta_scale);
        const int sim_dim = settings.sim_dim > 0
                                ? settings.sim_dim
                                : derive_sim_dim(space.dim, max_raw_beta(grid_spec));
        const FockSpace sim_space(sim_dim);
        const CVec ideal = optimizer::build_target(target, sim_space);
        tomography::SdfConfig sdf;
        sdf.omega_sdf = settings.sdf_omega;
        sdf.noise = dynamics::NoiseModel(settings.noise.gamma, settings.noise.delta, 0.0);
        sdf.shots = 0;
        const auto quadrant =
            tomography::measure_grid(CMat(ideal * ideal.adjoint()), sim_space, grid_spec,
                                     sdf, 0);
        const auto full = tomography::symmetrize(quadrant);
        const auto rec = tomography::reconstruct_density(full, recon_dim);
        const CVec t_small = optimizer::build_target(target, FockSpace(recon_dim));
        f_recon = fock::state_fidelity(rec.rho, t_small);
    }

    // (v) beyond-Lamb-Dicke propagation, no decoherence
    double f_ld;
    {
        const CVec psi =
            dynamics::propagate_lamb_dicke(wf, settings.lamb_dicke,
                                           hybrid_start(spin0, space.dim));
        f_ld = std::norm(target_h.dot(psi));
    }

    ErrorBudgetRow row;
    row.state = target_name(target);
    row.pulse = 1.0 - f_pulse;
    row.thermal = std::max(0.0, f_pulse - f_thermal);
    row.dephasing_prep = std::max(0.0, f_thermal - f_deph);
    row.dephasing_recon = std::max(0.0, 1.0 - f_recon);
    row.lamb_dicke = std::max(0.0, f_pulse - f_ld);
    return row;
}

SqueezedStudy squeezed_reconstruction_study(double r, const dynamics::NoiseModel& noise,
                                            double sdf_omega, int sim_dim,
                                            int reconstruct_dim, int grid_side,
                                            double extent) {
    const FockSpace sim_space(sim_dim);
    const optimizer::TargetSpec spec = targets::SqueezeSpec(r);
    const CVec ideal = optimizer::build_target(spec, sim_space);
    tomography::ChiGrid grid_spec = tomography::make_quadrant_grid(grid_side, extent, 1.0);
    tomography::SdfConfig sdf;
    sdf.omega_sdf = sdf_omega;
    sdf.noise = dynamics::NoiseModel(noise.gamma, noise.delta, 0.0);
    sdf.shots = 0;
    const auto quadrant = tomography::measure_grid(CMat(ideal * ideal.adjoint()), sim_space,
                                                   grid_spec, sdf, 0);
    const auto full = tomography::symmetrize(quadrant);

    SqueezedStudy study;
    study.fit_db = metrics::fit_squeezed(full, 1.0).db;
    const auto rec = tomography::reconstruct_density(full, reconstruct_dim);
    const CVec t_small = optimizer::build_target(spec, FockSpace(reconstruct_dim));
    study.recon_fidelity = fock::state_fidelity(rec.rho, t_small);
    study.recon_db = metrics::squeezing_from_density(rec.rho);
    return study;
}

namespace {

int run_error_budget(const RunConfig& cfg, const Paths& out) {
    if (!cfg.seed) throw std::invalid_argument("error-budget: needs a seed");
    std::vector<TargetSpec> states;
    if (cfg.target) {
        states.push_back(*cfg.target);
    } else {
        states.push_back(targets::SqueezeSpec(1.55));
        states.push_back(targets::GkpSpec(targets::GkpLattice::square, 0, 0.247));
        states.push_back(targets::GkpSpec(targets::GkpLattice::square, 0, 0.301));
        states.push_back(targets::GkpSpec(targets::GkpLattice::hexagonal, 0, 0.301));
        states.push_back(targets::BinomialSpec(1, 1, targets::BinomialLogical::plus_z));
        states.push_back(targets::BinomialSpec(2, 2, targets::BinomialLogical::plus_z));
        states.push_back(targets::BinomialSpec(2, 2, targets::BinomialLogical::minus_z));
    }

    ErrorBudgetSettings settings;
    settings.noise = cfg.noise.gamma > 0 || cfg.noise.nbar > 0
                         ? cfg.noise
                         : dynamics::NoiseModel(18.0, kTwoPi * 18.0, 0.05);
    settings.sdf_omega = cfg.sdf_omega;
    if (cfg.grid.side > 0) settings.grid_side = std::min(cfg.grid.side, 25);

    std::ofstream csv(out.str("error_budget.csv"));
    csv << "# " << meta_comment(cfg.raw) << "\n";
    csv << "state,pulse,thermal,dephasing_prep,dephasing_recon,lamb_dicke,total\n";
    for (const auto& state : states) {
        const auto defs = target_defaults(state);
        const FockSpace space(cfg.dim > 0 ? cfg.dim : defs.dim);
        optimizer::OptimizedPulse pulse;
        if (!cfg.waveform_path.empty() && states.size() == 1) {
            pulse.waveform = io::load_waveform(cfg.waveform_path);
            pulse.duration = pulse.waveform.total_duration();
        } else {
            pulse = optimizer::optimize(state, space, cfg.opt, *cfg.seed);
        }
        const auto row = error_budget_state(state, pulse, space, settings);
        csv << row.state << ',' << row.pulse << ',' << row.thermal << ','
            << row.dephasing_prep << ',' << row.dephasing_recon << ',' << row.lamb_dicke
            << ',' << row.total() << "\n";
        csv.flush();
        std::cout << "error-budget " << row.state << ": total " << row.total() << "\n";
    }
    return 0;
}

}  // namespace

int run(const RunConfig& cfg) {
    try {
        const Paths out = make_out_dir(cfg);
        switch (cfg.task) {
            case Task::optimize: return run_optimize(cfg, out);
            case Task::propagate: return run_propagate(cfg, out);
            case Task::tomography: return run_tomography(cfg, out);
            case Task::reconstruct: return run_reconstruct(cfg, out);
            case Task::analyze: return run_analyze(cfg, out);
            case Task::compare_gates: return run_compare_gates(cfg, out);
            case Task::error_budget: return run_error_budget(cfg, out);
        }
        return 3;
    } catch (const NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const io::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const MissingParams& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace bosonforge::runner
