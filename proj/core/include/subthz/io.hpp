#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "subthz/experiment.hpp"

namespace subthz {

// --- sweep configuration files -------------------------------------------
//
// Key-value text, one `key = value` per line, `#` comments, with optional
// [estimator] and [sweep] sections. Keys mirror the system-parameter names
// (f_c, B, K_o, L, L_cm, N_r, N_t, G_sub_r, G_sub_t, M, K_p, Q_p, T_p,
// frame_duration, subframe_duration, tau_min, tau_max, ...). Array sizes are
// written VxH, e.g. `N_r = 8x8`. Unknown keys are errors.

ExperimentSpec desk_scale_defaults();
ExperimentSpec paper_scale_defaults();
ExperimentSpec parse_spec_file(const std::string& path, ExperimentSpec defaults);
void write_spec_file(const std::string& path, const ExperimentSpec& spec);

// --- channel / observation artifacts -------------------------------------

std::uint64_t config_hash(const SystemConfig& cfg, const GridSpec& grids);

void save_channel_frames(const std::string& path, const SystemConfig& cfg,
                         const GridSpec& grids,
                         const std::vector<ChannelRealization>& frames,
                         std::uint64_t seed);
// Loaded realizations point at *grids, which must outlive them.
std::vector<ChannelRealization> load_channel_frames(const std::string& path,
                                                    SystemConfig* cfg, GridSpec* grids,
                                                    std::uint64_t* seed = nullptr);

void save_observations(const std::string& path, const std::vector<Observation>& frames);
std::vector<Observation> load_observations(const std::string& path);

// --- plots ----------------------------------------------------------------

// Mean metric vs axis value per estimator, one SVG per metric. NMSE plots use
// a log10 vertical scale.
void write_sweep_plots(const std::string& out_dir,
                       const std::vector<MetricRecord>& records);

}  // namespace subthz
