#include "subthz/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace subthz {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}

double parse_num(const std::string& v, const std::string& path, int line) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    fail(path, line, "expected a number, got '" + v + "'");
  }
  if (used != v.size()) fail(path, line, "trailing characters in number '" + v + "'");
  return x;
}

int parse_int(const std::string& v, const std::string& path, int line) {
  double x = parse_num(v, path, line);
  int i = static_cast<int>(x);
  if (static_cast<double>(i) != x) fail(path, line, "expected an integer, got '" + v + "'");
  return i;
}

bool parse_bool(const std::string& v, const std::string& path, int line) {
  std::string s = lower(v);
  if (s == "true" || s == "on" || s == "1") return true;
  if (s == "false" || s == "off" || s == "0") return false;
  fail(path, line, "expected a boolean, got '" + v + "'");
}

// "VxH", e.g. 16x16.
UpaDims parse_dims(const std::string& v, const std::string& path, int line) {
  std::size_t x = v.find_first_of("xX");
  if (x == std::string::npos || x == 0 || x + 1 == v.size())
    fail(path, line, "expected VxH array dims, got '" + v + "'");
  UpaDims d;
  d.v = parse_int(trim(v.substr(0, x)), path, line);
  d.h = parse_int(trim(v.substr(x + 1)), path, line);
  return d;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

ExperimentSpec desk_scale_defaults() {
  ExperimentSpec spec;  // SystemConfig/TrainingConfig defaults are desk scale
  spec.grids.g_sub_r = 8;
  spec.grids.g_sub_t = 4;
  spec.grids.levels = 2;
  spec.values = {-10, -5, 0, 5, 10, 15, 20};
  spec.estimators = {EstimatorKind::kTs, EstimatorKind::kMFista, EstimatorKind::kGsomp,
                     EstimatorKind::kGenieLs};
  return spec;
}

ExperimentSpec paper_scale_defaults() {
  ExperimentSpec spec = desk_scale_defaults();
  spec.sys.bandwidth = 8e9;
  spec.sys.n_subcarriers = 1024;
  spec.sys.n_rx = {16, 16};
  spec.sys.n_tx = {4, 4};
  spec.sys.tau_min = 45e-9;
  spec.sys.tau_max = 55e-9;
  spec.grids.g_sub_r = 16;
  spec.grids.g_sub_t = 4;
  spec.grids.levels = 3;
  spec.train.q_p = 25;
  spec.train.t_p = 25;
  spec.train.k_p = 10;
  spec.est.disambiguate_delay = true;  // delays exceed the principal-root range
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path, ExperimentSpec defaults) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file: " + path);

  ExperimentSpec spec = std::move(defaults);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(path, line, "unterminated section header");
      std::string sec = lower(trim(s.substr(1, s.size() - 2)));
      if (sec != "system" && sec != "estimator" && sec != "sweep")
        fail(path, line, "unknown section [" + sec + "]");
      continue;  // sections are organizational; keys are globally unique
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(path, line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty() || val.empty()) fail(path, line, "expected key = value");

    auto& sys = spec.sys;
    auto& tr = spec.train;
    auto& est = spec.est;
    if (key == "f_c") {
      sys.f_c = parse_num(val, path, line);
    } else if (key == "B") {
      sys.bandwidth = parse_num(val, path, line);
    } else if (key == "K_o") {
      sys.n_subcarriers = parse_int(val, path, line);
    } else if (key == "N_r") {
      sys.n_rx = parse_dims(val, path, line);
    } else if (key == "N_t") {
      sys.n_tx = parse_dims(val, path, line);
    } else if (key == "L") {
      sys.n_paths = parse_int(val, path, line);
    } else if (key == "L_cm") {
      sys.n_common = parse_int(val, path, line);
    } else if (key == "sigma_alpha2") {
      sys.sigma_alpha2 = parse_num(val, path, line);
    } else if (key == "tau_min") {
      sys.tau_min = parse_num(val, path, line);
    } else if (key == "tau_max") {
      sys.tau_max = parse_num(val, path, line);
    } else if (key == "frame_duration") {
      sys.frame_duration = parse_num(val, path, line);
    } else if (key == "subframe_duration") {
      sys.subframe_duration = parse_num(val, path, line);
    } else if (key == "gain_model") {
      std::string m = lower(val);
      if (m == "approximate") sys.gain_model = GainModel::kApproximate;
      else if (m == "physical") sys.gain_model = GainModel::kPhysical;
      else fail(path, line, "gain_model must be approximate or physical");
    } else if (key == "angle_prior") {
      std::string m = lower(val);
      if (m == "physical") sys.angle_prior = AnglePrior::kUniformPhysical;
      else if (m == "spatial") sys.angle_prior = AnglePrior::kUniformSpatial;
      else fail(path, line, "angle_prior must be physical or spatial");
    } else if (key == "on_grid") {
      sys.on_grid = parse_bool(val, path, line);
    } else if (key == "refractive_index") {
      auto parts = split_list(val);
      if (parts.size() != 2) fail(path, line, "refractive_index needs two numbers (re im)");
      sys.refractive_index = {parse_num(parts[0], path, line), parse_num(parts[1], path, line)};
    } else if (key == "surface_roughness") {
      sys.surface_roughness = parse_num(val, path, line);
    } else if (key == "absorption_coeff") {
      sys.absorption_coeff = parse_num(val, path, line);
    } else if (key == "G_sub_r") {
      spec.grids.g_sub_r = parse_int(val, path, line);
    } else if (key == "G_sub_t") {
      spec.grids.g_sub_t = parse_int(val, path, line);
    } else if (key == "M") {
      spec.grids.levels = parse_int(val, path, line);
    } else if (key == "Q_p") {
      tr.q_p = parse_int(val, path, line);
    } else if (key == "T_p") {
      tr.t_p = parse_int(val, path, line);
    } else if (key == "K_p") {
      tr.k_p = parse_int(val, path, line);
    } else if (key == "hybrid") {
      tr.hybrid = parse_bool(val, path, line);
    } else if (key == "n_rf_r") {
      tr.n_rf_r = parse_int(val, path, line);
    } else if (key == "n_rf_t") {
      tr.n_rf_t = parse_int(val, path, line);
    } else if (key == "l_cm") {
      est.l_cm = parse_int(val, path, line);
    } else if (key == "l_prime_mult") {
      est.l_prime_mult = parse_num(val, path, line);
    } else if (key == "somp_t_max") {
      est.somp_t_max = parse_int(val, path, line);
    } else if (key == "somp_eps_rel") {
      est.somp_eps_rel = parse_num(val, path, line);
    } else if (key == "fista_max_iter") {
      est.fista_max_iter = parse_int(val, path, line);
    } else if (key == "fista_tol_rel") {
      est.fista_tol_rel = parse_num(val, path, line);
    } else if (key == "lambda_scale") {
      est.lambda_scale = parse_num(val, path, line);
    } else if (key == "refine") {
      est.refine = parse_bool(val, path, line);
    } else if (key == "disambiguate_delay") {
      est.disambiguate_delay = parse_bool(val, path, line);
    } else if (key == "reset_margin") {
      est.reset_margin = parse_num(val, path, line);
    } else if (key == "axis") {
      if (!axis_from_name(lower(val), &spec.axis))
        fail(path, line, "unknown sweep axis '" + val + "'");
    } else if (key == "values") {
      spec.values.clear();
      for (const std::string& p : split_list(val))
        spec.values.push_back(parse_num(p, path, line));
      if (spec.values.empty()) fail(path, line, "values list is empty");
    } else if (key == "trials") {
      spec.trials = parse_int(val, path, line);
    } else if (key == "frames") {
      spec.frames = parse_int(val, path, line);
    } else if (key == "estimators") {
      spec.estimators.clear();
      for (const std::string& p : split_list(val)) {
        EstimatorKind kind;
        if (!estimator_from_name(lower(p), &kind))
          fail(path, line, "unknown estimator '" + p + "'");
        spec.estimators.push_back(kind);
      }
      if (spec.estimators.empty()) fail(path, line, "estimators list is empty");
    } else if (key == "seed") {
      double x = parse_num(val, path, line);
      spec.seed = static_cast<std::uint64_t>(x);
    } else if (key == "snr_db") {
      spec.base_snr_db = parse_num(val, path, line);
    } else if (key == "compute_se") {
      spec.compute_se = parse_bool(val, path, line);
    } else if (key == "n_s") {
      spec.se.n_s = parse_int(val, path, line);
    } else if (key == "p_t") {
      spec.se.p_t = parse_num(val, path, line);
    } else if (key == "timing") {
      spec.timing = parse_bool(val, path, line);
    } else if (key == "threads") {
      spec.threads = parse_int(val, path, line);
    } else {
      fail(path, line, "unknown key '" + key + "'");
    }
  }
  return spec;
}

void write_spec_file(const std::string& path, const ExperimentSpec& spec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write spec file: " + path);
  char buf[256];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  auto onoff = [](bool b) { return b ? "true" : "false"; };

  const auto& sys = spec.sys;
  out << "[system]\n";
  out << "f_c = " << num(sys.f_c) << "\n";
  out << "B = " << num(sys.bandwidth) << "\n";
  out << "K_o = " << sys.n_subcarriers << "\n";
  out << "N_r = " << sys.n_rx.v << "x" << sys.n_rx.h << "\n";
  out << "N_t = " << sys.n_tx.v << "x" << sys.n_tx.h << "\n";
  out << "L = " << sys.n_paths << "\n";
  out << "L_cm = " << sys.n_common << "\n";
  out << "sigma_alpha2 = " << num(sys.sigma_alpha2) << "\n";
  out << "tau_min = " << num(sys.tau_min) << "\n";
  out << "tau_max = " << num(sys.tau_max) << "\n";
  out << "frame_duration = " << num(sys.frame_duration) << "\n";
  out << "subframe_duration = " << num(sys.subframe_duration) << "\n";
  out << "gain_model = "
      << (sys.gain_model == GainModel::kApproximate ? "approximate" : "physical") << "\n";
  out << "angle_prior = "
      << (sys.angle_prior == AnglePrior::kUniformPhysical ? "physical" : "spatial") << "\n";
  out << "on_grid = " << onoff(sys.on_grid) << "\n";
  out << "refractive_index = " << num(sys.refractive_index.real()) << " "
      << num(sys.refractive_index.imag()) << "\n";
  out << "surface_roughness = " << num(sys.surface_roughness) << "\n";
  out << "absorption_coeff = " << num(sys.absorption_coeff) << "\n";
  out << "G_sub_r = " << spec.grids.g_sub_r << "\n";
  out << "G_sub_t = " << spec.grids.g_sub_t << "\n";
  out << "M = " << spec.grids.levels << "\n";
  out << "Q_p = " << spec.train.q_p << "\n";
  out << "T_p = " << spec.train.t_p << "\n";
  out << "K_p = " << spec.train.k_p << "\n";
  out << "hybrid = " << onoff(spec.train.hybrid) << "\n";
  out << "n_rf_r = " << spec.train.n_rf_r << "\n";
  out << "n_rf_t = " << spec.train.n_rf_t << "\n";

  const auto& est = spec.est;
  out << "\n[estimator]\n";
  out << "l_cm = " << est.l_cm << "\n";
  out << "l_prime_mult = " << num(est.l_prime_mult) << "\n";
  out << "somp_t_max = " << est.somp_t_max << "\n";
  out << "somp_eps_rel = " << num(est.somp_eps_rel) << "\n";
  out << "fista_max_iter = " << est.fista_max_iter << "\n";
  out << "fista_tol_rel = " << num(est.fista_tol_rel) << "\n";
  out << "lambda_scale = " << num(est.lambda_scale) << "\n";
  out << "refine = " << onoff(est.refine) << "\n";
  out << "disambiguate_delay = " << onoff(est.disambiguate_delay) << "\n";
  out << "reset_margin = " << num(est.reset_margin) << "\n";

  out << "\n[sweep]\n";
  out << "axis = " << axis_name(spec.axis) << "\n";
  out << "values =";
  for (double v : spec.values) out << " " << num(v);
  out << "\n";
  out << "trials = " << spec.trials << "\n";
  out << "frames = " << spec.frames << "\n";
  out << "estimators =";
  for (EstimatorKind k : spec.estimators) out << " " << estimator_name(k);
  out << "\n";
  out << "seed = " << spec.seed << "\n";
  out << "snr_db = " << num(spec.base_snr_db) << "\n";
  out << "compute_se = " << onoff(spec.compute_se) << "\n";
  out << "n_s = " << spec.se.n_s << "\n";
  out << "p_t = " << num(spec.se.p_t) << "\n";
  out << "timing = " << onoff(spec.timing) << "\n";
  out << "threads = " << spec.threads << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace subthz
