#include "bosonforge/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bosonforge::io {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open file: " + path);
    return f;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write file: " + path);
    return f;
}

}  // namespace

json waveform_to_json(const dynamics::Waveform& wf) {
    if (!wf.constant_amplitude())
        throw std::invalid_argument("waveform_to_json: file format assumes constant rates");
    json j;
    const double omega_r = wf.segments.empty() ? 0.0 : wf.segments.front().omega_r;
    const double omega_b = wf.segments.empty() ? 0.0 : wf.segments.front().omega_b;
    j["omega_r_hz"] = omega_r / kTwoPi;
    j["omega_b_hz"] = omega_b / kTwoPi;
    j["segments"] = json::array();
    for (const auto& s : wf.segments) {
        j["segments"].push_back(
            {{"dt_s", s.dt}, {"phi_r_rad", s.phi_r}, {"phi_b_rad", s.phi_b}});
    }
    return j;
}

dynamics::Waveform waveform_from_json(const json& j) {
    dynamics::Waveform wf;
    const double omega_r = kTwoPi * j.at("omega_r_hz").get<double>();
    const double omega_b = kTwoPi * j.at("omega_b_hz").get<double>();
    for (const auto& s : j.at("segments")) {
        wf.segments.push_back({s.at("dt_s").get<double>(), s.at("phi_r_rad").get<double>(),
                               s.at("phi_b_rad").get<double>(), omega_r, omega_b});
    }
    return wf;
}

void save_waveform(const dynamics::Waveform& wf, const std::string& path) {
    write_json_file(waveform_to_json(wf), path);
}

dynamics::Waveform load_waveform(const std::string& path) {
    return waveform_from_json(read_json_file(path));
}

void save_chi_csv(const tomography::ChiGrid& grid, const std::string& path,
                  const std::string& meta_comment) {
    auto f = open_out(path);
    if (!meta_comment.empty()) f << "# " << meta_comment << "\n";
    f << "# beta_scale=" << fmt17(grid.beta_scale) << " extent=" << fmt17(grid.extent)
      << " side=" << grid.side << " symmetric=" << (grid.symmetric ? 1 : 0) << "\n";
    f << "re_beta,im_beta,re_chi,m_bright,m_total\n";
    for (const auto& p : grid.points) {
        f << fmt17(std::real(p.beta)) << ',' << fmt17(std::imag(p.beta)) << ','
          << fmt17(p.re_chi) << ',' << (p.has_shots() ? std::to_string(p.m_bright) : "0")
          << ',' << (p.has_shots() ? std::to_string(p.m_total) : "0") << "\n";
    }
}

tomography::ChiGrid load_chi_csv(const std::string& path) {
    auto f = open_in(path);
    tomography::ChiGrid grid;
    grid.side = 0;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string tok;
            while (meta >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "beta_scale") grid.beta_scale = std::stod(val);
                else if (key == "extent") grid.extent = std::stod(val);
                else if (key == "side") grid.side = std::stoi(val);
                else if (key == "symmetric") grid.symmetric = std::stoi(val) != 0;
            }
            continue;
        }
        if (!header_seen) {  // column header
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) throw Error("chi csv: malformed row: " + line);
        tomography::ChiPoint p;
        p.beta = Complex(std::stod(cells[0]), std::stod(cells[1]));
        p.re_chi = std::stod(cells[2]);
        const long mb = std::stol(cells[3]), mt = std::stol(cells[4]);
        if (mt > 0) {
            p.m_bright = mb;
            p.m_total = mt;
        }
        grid.points.push_back(p);
    }
    grid.validate();
    return grid;
}

void save_wigner_csv(const RVec& xs, const RVec& ps, const RMat& w,
                     const std::string& path, const std::string& meta_comment) {
    auto f = open_out(path);
    if (!meta_comment.empty()) f << "# " << meta_comment << "\n";
    f << "x,p,w\n";
    for (Eigen::Index i = 0; i < xs.size(); ++i)
        for (Eigen::Index j = 0; j < ps.size(); ++j)
            f << fmt17(xs(i)) << ',' << fmt17(ps(j)) << ',' << fmt17(w(i, j)) << "\n";
}

void save_density_csv(const CMat& rho, const std::string& path,
                      const std::string& meta_comment) {
    auto f = open_out(path);
    if (!meta_comment.empty()) f << "# " << meta_comment << "\n";
    f << "# dim=" << rho.rows() << "\n";
    f << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < rho.rows(); ++i)
        for (Eigen::Index j = 0; j < rho.cols(); ++j)
            f << i << ',' << j << ',' << fmt17(std::real(rho(i, j))) << ','
              << fmt17(std::imag(rho(i, j))) << "\n";
}

CMat load_density_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    int dim = 0;
    std::vector<std::tuple<int, int, Complex>> entries;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("dim=");
            if (pos != std::string::npos) dim = std::stoi(line.substr(pos + 4));
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 4) throw Error("density csv: malformed row: " + line);
        entries.emplace_back(std::stoi(cells[0]), std::stoi(cells[1]),
                             Complex(std::stod(cells[2]), std::stod(cells[3])));
    }
    for (const auto& [r, c, v] : entries) dim = std::max({dim, r + 1, c + 1});
    CMat rho = CMat::Zero(dim, dim);
    for (const auto& [r, c, v] : entries) rho(r, c) = v;
    return rho;
}

void write_json_file(const json& j, const std::string& path) {
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
    auto f = open_in(path);
    json j;
    f >> j;
    return j;
}

std::string config_hash(const json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bosonforge::io
