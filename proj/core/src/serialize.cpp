#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "subthz/io.hpp"

namespace subthz {
namespace {

using nlohmann::json;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t fnv_mix(std::uint64_t h, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  return fnv_mix(h, bits);
}

json mat_to_json(const CMat& m) {
  json data = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      data.push_back(m(r, c).real());
      data.push_back(m(r, c).imag());
    }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMat mat_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != 2 * rows * cols)
    throw std::invalid_argument("matrix data length mismatch");
  CMat m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      double re = data[i++].get<double>();
      double im = data[i++].get<double>();
      m(r, c) = {re, im};
    }
  return m;
}

json system_to_json(const SystemConfig& s) {
  return json{{"f_c", s.f_c},
              {"B", s.bandwidth},
              {"K_o", s.n_subcarriers},
              {"N_r", {s.n_rx.v, s.n_rx.h}},
              {"N_t", {s.n_tx.v, s.n_tx.h}},
              {"L", s.n_paths},
              {"L_cm", s.n_common},
              {"sigma_alpha2", s.sigma_alpha2},
              {"tau_min", s.tau_min},
              {"tau_max", s.tau_max},
              {"frame_duration", s.frame_duration},
              {"subframe_duration", s.subframe_duration},
              {"gain_model", s.gain_model == GainModel::kApproximate ? "approximate" : "physical"},
              {"angle_prior",
               s.angle_prior == AnglePrior::kUniformPhysical ? "physical" : "spatial"},
              {"on_grid", s.on_grid},
              {"refractive_index", {s.refractive_index.real(), s.refractive_index.imag()}},
              {"surface_roughness", s.surface_roughness},
              {"absorption_coeff", s.absorption_coeff}};
}

SystemConfig system_from_json(const json& j) {
  SystemConfig s;
  s.f_c = j.at("f_c").get<double>();
  s.bandwidth = j.at("B").get<double>();
  s.n_subcarriers = j.at("K_o").get<int>();
  s.n_rx = {j.at("N_r")[0].get<int>(), j.at("N_r")[1].get<int>()};
  s.n_tx = {j.at("N_t")[0].get<int>(), j.at("N_t")[1].get<int>()};
  s.n_paths = j.at("L").get<int>();
  s.n_common = j.at("L_cm").get<int>();
  s.sigma_alpha2 = j.at("sigma_alpha2").get<double>();
  s.tau_min = j.at("tau_min").get<double>();
  s.tau_max = j.at("tau_max").get<double>();
  s.frame_duration = j.at("frame_duration").get<double>();
  s.subframe_duration = j.at("subframe_duration").get<double>();
  s.gain_model = j.at("gain_model").get<std::string>() == "physical" ? GainModel::kPhysical
                                                                     : GainModel::kApproximate;
  s.angle_prior = j.at("angle_prior").get<std::string>() == "spatial"
                      ? AnglePrior::kUniformSpatial
                      : AnglePrior::kUniformPhysical;
  s.on_grid = j.at("on_grid").get<bool>();
  s.refractive_index = {j.at("refractive_index")[0].get<double>(),
                        j.at("refractive_index")[1].get<double>()};
  s.surface_roughness = j.at("surface_roughness").get<double>();
  s.absorption_coeff = j.at("absorption_coeff").get<double>();
  return s;
}

void dump_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << j.dump(1, '\t') << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

json load_json(const std::string& path, const char* format) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  json j = json::parse(in);
  if (j.value("format", std::string()) != format)
    throw std::invalid_argument(path + ": not a " + std::string(format) + " file");
  if (j.value("version", 0) != 1)
    throw std::invalid_argument(path + ": unsupported version");
  return j;
}

}  // namespace

std::uint64_t config_hash(const SystemConfig& cfg, const GridSpec& grids) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv_mix(h, cfg.f_c);
  h = fnv_mix(h, cfg.bandwidth);
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.n_subcarriers));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.n_rx.v));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.n_rx.h));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.n_tx.v));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.n_tx.h));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.n_paths));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.n_common));
  h = fnv_mix(h, cfg.sigma_alpha2);
  h = fnv_mix(h, cfg.tau_min);
  h = fnv_mix(h, cfg.tau_max);
  h = fnv_mix(h, cfg.frame_duration);
  h = fnv_mix(h, cfg.subframe_duration);
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.gain_model));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.angle_prior));
  h = fnv_mix(h, static_cast<std::uint64_t>(cfg.on_grid ? 1 : 0));
  h = fnv_mix(h, cfg.refractive_index.real());
  h = fnv_mix(h, cfg.refractive_index.imag());
  h = fnv_mix(h, cfg.surface_roughness);
  h = fnv_mix(h, cfg.absorption_coeff);
  h = fnv_mix(h, static_cast<std::uint64_t>(grids.g_sub_r));
  h = fnv_mix(h, static_cast<std::uint64_t>(grids.g_sub_t));
  h = fnv_mix(h, static_cast<std::uint64_t>(grids.levels));
  return h;
}

void save_channel_frames(const std::string& path, const SystemConfig& cfg,
                         const GridSpec& grids,
                         const std::vector<ChannelRealization>& frames,
                         std::uint64_t seed) {
  json j;
  j["format"] = "subthz-channel";
  j["version"] = 1;
  j["seed"] = seed;
  j["config_hash"] = config_hash(cfg, grids);
  j["system"] = system_to_json(cfg);
  j["grid"] = json{{"G_sub_r", grids.g_sub_r}, {"G_sub_t", grids.g_sub_t}, {"M", grids.levels}};
  json jframes = json::array();
  for (const ChannelRealization& ch : frames) {
    json jpaths = json::array();
    for (const ChannelPath& p : ch.paths) {
      json jp{{"alpha_ref", {p.alpha_ref.real(), p.alpha_ref.imag()}},
              {"tau", p.tau},
              {"angles", {p.angles.aod_h, p.angles.aod_v, p.angles.aoa_h, p.angles.aoa_v}}};
      if (p.physical) {
        jp["physical"] = json{
            {"line_of_sight", p.physical->line_of_sight},
            {"distance", p.physical->distance},
            {"incidence", p.physical->incidence},
            {"roughness", p.physical->roughness},
            {"refractive_index",
             {p.physical->refractive_index.real(), p.physical->refractive_index.imag()}}};
      }
      jpaths.push_back(std::move(jp));
    }
    json jsupport = json::array();
    for (const auto& [ir, it] : ch.support) jsupport.push_back(json::array({ir, it}));
    jframes.push_back(json{{"paths", std::move(jpaths)}, {"support", std::move(jsupport)}});
  }
  j["frames"] = std::move(jframes);
  dump_json(path, j);
}

std::vector<ChannelRealization> load_channel_frames(const std::string& path,
                                                    SystemConfig* cfg, GridSpec* grids,
                                                    std::uint64_t* seed) {
  json j = load_json(path, "subthz-channel");
  SystemConfig sys = system_from_json(j.at("system"));
  GridSpec g;
  g.g_sub_r = j.at("grid").at("G_sub_r").get<int>();
  g.g_sub_t = j.at("grid").at("G_sub_t").get<int>();
  g.levels = j.at("grid").at("M").get<int>();
  if (config_hash(sys, g) != j.at("config_hash").get<std::uint64_t>())
    throw std::invalid_argument(path + ": config hash mismatch (corrupted file?)");
  if (cfg) *cfg = sys;
  if (!grids) throw std::invalid_argument("load_channel_frames needs a GridSpec to fill");
  *grids = g;
  if (seed) *seed = j.value("seed", std::uint64_t{0});

  std::vector<ChannelRealization> frames;
  for (const json& jf : j.at("frames")) {
    ChannelRealization ch;
    for (const json& jp : jf.at("paths")) {
      ChannelPath p;
      p.alpha_ref = {jp.at("alpha_ref")[0].get<double>(), jp.at("alpha_ref")[1].get<double>()};
      p.tau = jp.at("tau").get<double>();
      const json& a = jp.at("angles");
      p.angles = {a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>()};
      if (jp.contains("physical")) {
        const json& ph = jp.at("physical");
        PhysicalPath pp;
        pp.line_of_sight = ph.at("line_of_sight").get<bool>();
        pp.distance = ph.at("distance").get<double>();
        pp.incidence = ph.at("incidence").get<double>();
        pp.roughness = ph.at("roughness").get<double>();
        pp.refractive_index = {ph.at("refractive_index")[0].get<double>(),
                               ph.at("refractive_index")[1].get<double>()};
        p.physical = pp;
      }
      ch.paths.push_back(std::move(p));
    }
    for (const json& js : jf.at("support"))
      ch.support.emplace_back(js[0].get<long long>(), js[1].get<long long>());
    ch.grids = grids;
    frames.push_back(std::move(ch));
  }
  return frames;
}

void save_observations(const std::string& path, const std::vector<Observation>& frames) {
  json j;
  j["format"] = "subthz-observation";
  j["version"] = 1;
  json jframes = json::array();
  for (const Observation& obs : frames) {
    json jf;
    jf["pilots"] = obs.pilots;
    jf["sigma_n2"] = obs.sigma_n2;
    jf["realized_snr_db"] = obs.realized_snr_db;
    json jy = json::array(), jw = json::array(), jx = json::array();
    for (const CMat& m : obs.y) jy.push_back(mat_to_json(m));
    for (const CMat& m : obs.beams.w) jw.push_back(mat_to_json(m));
    for (const CMat& m : obs.beams.x) jx.push_back(mat_to_json(m));
    jf["y"] = std::move(jy);
    jf["w"] = std::move(jw);
    jf["x"] = std::move(jx);
    jframes.push_back(std::move(jf));
  }
  j["frames"] = std::move(jframes);
  dump_json(path, j);
}

std::vector<Observation> load_observations(const std::string& path) {
  json j = load_json(path, "subthz-observation");
  std::vector<Observation> frames;
  for (const json& jf : j.at("frames")) {
    Observation obs;
    obs.pilots = jf.at("pilots").get<std::vector<int>>();
    obs.sigma_n2 = jf.at("sigma_n2").get<double>();
    obs.realized_snr_db = jf.at("realized_snr_db").get<double>();
    for (const json& jm : jf.at("y")) obs.y.push_back(mat_from_json(jm));
    for (const json& jm : jf.at("w")) obs.beams.w.push_back(mat_from_json(jm));
    for (const json& jm : jf.at("x")) obs.beams.x.push_back(mat_from_json(jm));
    obs.beams.pilots = obs.pilots;
    if (obs.y.size() != obs.pilots.size() || obs.beams.w.size() != obs.pilots.size() ||
        obs.beams.x.size() != obs.pilots.size())
      throw std::invalid_argument(path + ": per-pilot array length mismatch");
    frames.push_back(std::move(obs));
  }
  return frames;
}

}  // namespace subthz
