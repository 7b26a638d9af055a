#pragma once

#include "bosonforge/common.hpp"
#include "bosonforge/dynamics.hpp"
#include "bosonforge/tomography.hpp"

#include <json.hpp>

#include <string>

namespace bosonforge::io {

using nlohmann::json;

/// Shared waveform schema: {"omega_r_hz", "omega_b_hz",
/// "segments": [{"dt_s", "phi_r_rad", "phi_b_rad"}]}. Rates are ordinary
/// frequencies (rad/s = 2π·Hz). Doubles round-trip bit-exactly.
json waveform_to_json(const dynamics::Waveform& wf);
dynamics::Waveform waveform_from_json(const json& j);
void save_waveform(const dynamics::Waveform& wf, const std::string& path);
dynamics::Waveform load_waveform(const std::string& path);

/// ChiGrid CSV, header `re_beta,im_beta,re_chi,m_bright,m_total`, raw β.
/// Rows with m_total <= 0 carry no shot record.
void save_chi_csv(const tomography::ChiGrid& grid, const std::string& path,
                  const std::string& meta_comment = "");
tomography::ChiGrid load_chi_csv(const std::string& path);

/// Wigner CSV, header `x,p,w`.
void save_wigner_csv(const RVec& xs, const RVec& ps, const RMat& w,
                     const std::string& path, const std::string& meta_comment = "");

/// Density matrix CSV, header `row,col,re,im`.
void save_density_csv(const CMat& rho, const std::string& path,
                      const std::string& meta_comment = "");
CMat load_density_csv(const std::string& path);

void write_json_file(const json& j, const std::string& path);
json read_json_file(const std::string& path);

/// FNV-1a hash of the canonical dump, hex-encoded.
std::string config_hash(const json& config);

}  // namespace bosonforge::io
