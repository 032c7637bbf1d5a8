#include "eitnsim/config.hpp"

#include "eitnsim/error.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace eitnsim {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Every key present must be known and every known key must be present.
const Json& object_at(const Json& parent, const std::string& path,
                      const std::string& key,
                      std::initializer_list<const char*> keys) {
  const std::string here = join(path, key);
  if (!parent.contains(key)) throw ConfigError("missing key '" + here + "'");
  const Json& obj = parent.at(key);
  if (!obj.is_object()) throw ConfigError("'" + here + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + join(here, k) + "'");
  for (const char* k : keys)
    if (!obj.contains(k)) throw ConfigError("missing key '" + join(here, k) + "'");
  return obj;
}

double number(const Json& obj, const std::string& path, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("'" + join(path, key) + "' must be a number");
  return v.get<double>();
}

int integer(const Json& obj, const std::string& path, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError("'" + join(path, key) + "' must be an integer");
  return v.get<int>();
}

std::string text(const Json& obj, const std::string& path, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("'" + join(path, key) + "' must be a string");
  return v.get<std::string>();
}

bool boolean(const Json& obj, const std::string& path, const std::string& key) {
  const Json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError("'" + join(path, key) + "' must be true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const Json& obj, const std::string& path,
                            const std::string& key, int expected = -1) {
  const Json& v = obj.at(key);
  const std::string here = join(path, key);
  if (!v.is_array()) throw ConfigError("'" + here + "' must be an array");
  if (expected >= 0 && static_cast<int>(v.size()) != expected)
    throw ConfigError("'" + here + "' must have " + std::to_string(expected) + " entries");
  std::vector<double> out;
  for (const Json& x : v) {
    if (!x.is_number()) throw ConfigError("'" + here + "' must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Json laser_json(const LaserField& f) {
  Json pol;
  pol["re"] = {f.polarization[0].real(), f.polarization[1].real(), f.polarization[2].real()};
  pol["im"] = {f.polarization[0].imag(), f.polarization[1].imag(), f.polarization[2].imag()};
  return {{"detuning_MHz", f.carrier_detuning_MHz},
          {"intensity", f.intensity},
          {"polarization", pol},
          {"linewidth_MHz", f.linewidth_MHz}};
}

LaserField laser_from(const Json& root, const std::string& key, Laser laser) {
  const Json& o = object_at(root, "", key,
                            {"detuning_MHz", "intensity", "polarization", "linewidth_MHz"});
  const Json& p = object_at(o, key, "polarization", {"re", "im"});
  const auto re = numbers(p, key + ".polarization", "re", 3);
  const auto im = numbers(p, key + ".polarization", "im", 3);
  Eigen::Vector3cd pol;
  for (int i = 0; i < 3; ++i) pol[i] = {re[i], im[i]};
  try {
    return make_field(laser, number(o, key, "detuning_MHz"), number(o, key, "intensity"),
                      pol, number(o, key, "linewidth_MHz"));
  } catch (const ValidationError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

Laser laser_from_string(const std::string& name) {
  if (name == "laser1") return Laser::Laser1;
  if (name == "laser2") return Laser::Laser2;
  throw ConfigError("modulation.laser must be 'laser1' or 'laser2', got '" + name + "'");
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

} // namespace

Json to_json(const RunConfig& rc) {
  const Scenario& s = rc.scenario;
  const LevelSchemeConfig& sc = s.scheme;
  const ScanConfig& c = s.scan;
  Json j;
  j["scenario"] = s.name;
  j["scheme"] = {
      {"mode", to_string(sc.mode)},
      {"gamma_MHz", sc.gamma_MHz},
      {"intervals",
       {{"ground_1_2", sc.intervals.ground_1_2},
        {"excited_0_1", sc.intervals.excited_0_1},
        {"excited_1_2", sc.intervals.excited_1_2},
        {"excited_2_3", sc.intervals.excited_2_3}}},
      {"g_factors",
       {{"ground_F1", sc.g_factors.ground_F1},
        {"ground_F2", sc.g_factors.ground_F2},
        {"excited_F1", sc.g_factors.excited_F1},
        {"excited_F2", sc.g_factors.excited_F2},
        {"excited_F3", sc.g_factors.excited_F3}}},
      {"branching_e1", {sc.branching_e1[0], sc.branching_e1[1]}},
      {"branching_e2", {sc.branching_e2[0], sc.branching_e2[1]}}};
  j["doppler"] = {{"temperature_C", s.doppler.temperature_C},
                  {"atomic_mass_kg", s.doppler.atomic_mass_kg},
                  {"n_velocity", s.doppler.n_velocity}};
  j["optics"] = {{"wavelength_nm", c.fields.wavelength_nm},
                 {"saturation_intensity", c.fields.saturation_intensity}};
  j["laser1"] = laser_json(c.fields.laser1);
  j["laser2"] = laser_json(c.fields.laser2);
  j["modulation"] = {{"laser", to_string(c.modulation.laser)},
                     {"frequency_MHz", c.modulation.frequency_MHz},
                     {"ratio", c.modulation.ratio}};
  j["magnetic_field"] = {{"B_gauss", {c.B_gauss[0], c.B_gauss[1], c.B_gauss[2]}}};
  j["relaxation"] = {{"gamma_t_MHz", c.relaxation.gamma_t_MHz},
                     {"gamma_L_MHz", c.relaxation.gamma_L_MHz},
                     {"optical_dephasing", c.relaxation.optical_dephasing}};
  Json segments = Json::array();
  for (const Segment& g : c.segments)
    segments.push_back({{"start", g.start}, {"stop", g.stop}, {"step", g.step}});
  Json windows = Json::array();
  for (const auto& [lo, hi] : c.floquet_windows) windows.push_back({lo, hi});
  j["scan"] = {{"name", c.name},
               {"axis", to_string(c.axis)},
               {"origin", to_string(c.origin)},
               {"segments", segments},
               {"solver_mode", to_string(c.solver_mode)},
               {"floquet_windows", windows},
               {"optical_depth_scale",
                c.optical_depth_scale > 0.0 ? Json(c.optical_depth_scale) : Json("auto")},
               {"baseline_fraction", c.baseline_fraction}};
  j["sweep"] = {{"parameter", to_string(s.sweep.parameter)},
                {"values", s.sweep.values}};
  j["output"] = {{"csv", rc.output_csv}};
  j["seed"] = rc.seed;
  j["threads"] = rc.threads;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  static const std::set<std::string> top = {
      "scenario", "scheme", "doppler", "optics", "laser1", "laser2", "modulation",
      "magnetic_field", "relaxation", "scan", "sweep", "output", "seed", "threads"};
  for (const auto& [k, v] : j.items())
    if (!top.count(k)) throw ConfigError("unknown key '" + k + "'");
  for (const auto& k : top)
    if (!j.contains(k)) throw ConfigError("missing key '" + k + "'");

  RunConfig rc;
  Scenario& s = rc.scenario;
  s.name = text(j, "", "scenario");

  const Json& sc = object_at(j, "", "scheme",
                             {"mode", "gamma_MHz", "intervals", "g_factors",
                              "branching_e1", "branching_e2"});
  s.scheme.mode = scheme_mode_from_string(text(sc, "scheme", "mode"));
  s.scheme.gamma_MHz = number(sc, "scheme", "gamma_MHz");
  const Json& iv = object_at(sc, "scheme", "intervals",
                             {"ground_1_2", "excited_0_1", "excited_1_2", "excited_2_3"});
  s.scheme.intervals = {number(iv, "scheme.intervals", "ground_1_2"),
                        number(iv, "scheme.intervals", "excited_0_1"),
                        number(iv, "scheme.intervals", "excited_1_2"),
                        number(iv, "scheme.intervals", "excited_2_3")};
  const Json& gf = object_at(sc, "scheme", "g_factors",
                             {"ground_F1", "ground_F2", "excited_F1", "excited_F2",
                              "excited_F3"});
  s.scheme.g_factors = {number(gf, "scheme.g_factors", "ground_F1"),
                        number(gf, "scheme.g_factors", "ground_F2"),
                        number(gf, "scheme.g_factors", "excited_F1"),
                        number(gf, "scheme.g_factors", "excited_F2"),
                        number(gf, "scheme.g_factors", "excited_F3")};
  const auto b1 = numbers(sc, "scheme", "branching_e1", 2);
  const auto b2 = numbers(sc, "scheme", "branching_e2", 2);
  s.scheme.branching_e1 = {b1[0], b1[1]};
  s.scheme.branching_e2 = {b2[0], b2[1]};

  const Json& dp = object_at(j, "", "doppler",
                             {"temperature_C", "atomic_mass_kg", "n_velocity"});
  s.doppler.temperature_C = number(dp, "doppler", "temperature_C");
  s.doppler.atomic_mass_kg = number(dp, "doppler", "atomic_mass_kg");
  s.doppler.n_velocity = integer(dp, "doppler", "n_velocity");

  ScanConfig& c = s.scan;
  const Json& op = object_at(j, "", "optics", {"wavelength_nm", "saturation_intensity"});
  c.fields.wavelength_nm = number(op, "optics", "wavelength_nm");
  c.fields.saturation_intensity = number(op, "optics", "saturation_intensity");
  s.doppler.wavelength_nm = c.fields.wavelength_nm;
  c.fields.laser1 = laser_from(j, "laser1", Laser::Laser1);
  c.fields.laser2 = laser_from(j, "laser2", Laser::Laser2);

  const Json& md = object_at(j, "", "modulation", {"laser", "frequency_MHz", "ratio"});
  c.modulation.laser = laser_from_string(text(md, "modulation", "laser"));
  c.modulation.frequency_MHz = number(md, "modulation", "frequency_MHz");
  c.modulation.ratio = number(md, "modulation", "ratio");
  if (!(c.modulation.ratio >= 0.0 && c.modulation.ratio <= 1.0))
    throw ConfigError("'modulation.ratio' must lie in [0, 1]");
  if (!(c.modulation.frequency_MHz >= 0.0))
    throw ConfigError("'modulation.frequency_MHz' must be non-negative");

  const Json& mf = object_at(j, "", "magnetic_field", {"B_gauss"});
  const auto B = numbers(mf, "magnetic_field", "B_gauss", 3);
  c.B_gauss = {B[0], B[1], B[2]};

  const Json& rl = object_at(j, "", "relaxation",
                             {"gamma_t_MHz", "gamma_L_MHz", "optical_dephasing"});
  c.relaxation.gamma_t_MHz = number(rl, "relaxation", "gamma_t_MHz");
  c.relaxation.gamma_L_MHz = number(rl, "relaxation", "gamma_L_MHz");
  c.relaxation.optical_dephasing = boolean(rl, "relaxation", "optical_dephasing");
  if (!(c.relaxation.gamma_t_MHz > 0.0))
    throw ConfigError("'relaxation.gamma_t_MHz' must be positive");
  if (!(c.relaxation.gamma_L_MHz >= 0.0))
    throw ConfigError("'relaxation.gamma_L_MHz' must be non-negative");

  const Json& sn = object_at(j, "", "scan",
                             {"name", "axis", "origin", "segments", "solver_mode",
                              "floquet_windows", "optical_depth_scale",
                              "baseline_fraction"});
  c.name = text(sn, "scan", "name");
  c.axis = scan_axis_from_string(text(sn, "scan", "axis"));
  c.origin = axis_origin_from_string(text(sn, "scan", "origin"));
  c.solver_mode = frame_mode_from_string(text(sn, "scan", "solver_mode"));
  const Json& segs = sn.at("segments");
  if (!segs.is_array() || segs.empty())
    throw ConfigError("'scan.segments' must be a non-empty array");
  c.segments.clear();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string path = "scan.segments." + std::to_string(i);
    if (!segs[i].is_object()) throw ConfigError("'" + path + "' must be an object");
    for (const auto& [k, v] : segs[i].items())
      if (k != "start" && k != "stop" && k != "step")
        throw ConfigError("unknown key '" + join(path, k) + "'");
    for (const char* k : {"start", "stop", "step"})
      if (!segs[i].contains(k)) throw ConfigError("missing key '" + join(path, k) + "'");
    c.segments.push_back({number(segs[i], path, "start"), number(segs[i], path, "stop"),
                          number(segs[i], path, "step")});
  }
  const Json& wins = sn.at("floquet_windows");
  if (!wins.is_array()) throw ConfigError("'scan.floquet_windows' must be an array");
  c.floquet_windows.clear();
  for (std::size_t i = 0; i < wins.size(); ++i) {
    const std::string path = "scan.floquet_windows." + std::to_string(i);
    if (!wins[i].is_array() || wins[i].size() != 2 || !wins[i][0].is_number() ||
        !wins[i][1].is_number())
      throw ConfigError("'" + path + "' must be a [low, high] pair");
    c.floquet_windows.emplace_back(wins[i][0].get<double>(), wins[i][1].get<double>());
  }
  const Json& ods = sn.at("optical_depth_scale");
  if (ods.is_string()) {
    if (ods.get<std::string>() != "auto")
      throw ConfigError("'scan.optical_depth_scale' must be a number or \"auto\"");
    c.optical_depth_scale = 0.0;
  } else if (ods.is_number() && ods.get<double>() > 0.0) {
    c.optical_depth_scale = ods.get<double>();
  } else {
    throw ConfigError("'scan.optical_depth_scale' must be positive or \"auto\"");
  }
  c.baseline_fraction = number(sn, "scan", "baseline_fraction");

  const Json& sw = object_at(j, "", "sweep", {"parameter", "values"});
  s.sweep.parameter = sweep_parameter_from_string(text(sw, "sweep", "parameter"));
  s.sweep.values = numbers(sw, "sweep", "values");

  const Json& out = object_at(j, "", "output", {"csv"});
  rc.output_csv = text(out, "output", "csv");
  if (!j.at("seed").is_number_unsigned())
    throw ConfigError("'seed' must be a non-negative integer");
  rc.seed = j.at("seed").get<std::uint64_t>();
  rc.threads = integer(j, "", "threads");
  if (rc.threads < 0) throw ConfigError("'threads' must be non-negative");
  return rc;
}

Json scenario_json(const std::string& name) {
  RunConfig rc;
  rc.scenario = scenario(name);
  rc.output_csv = name + ".csv";
  return to_json(rc);
}

void apply_override(Json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must have the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  Json* node = &tree;
  std::stringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else if (node->is_array() && !part.empty() &&
               part.find_first_not_of("0123456789") == std::string::npos &&
               std::stoul(part) < node->size()) {
      node = &(*node)[std::stoul(part)];
    } else {
      throw ConfigError("unknown key '" + key + "' in override");
    }
  }
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  *node = value;
}

Json load_config_tree(const std::string& scenario_name,
                      const std::string& config_path,
                      const std::vector<std::string>& overrides) {
  Json file;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
    file = Json::parse(in, nullptr, false);
    if (file.is_discarded() || !file.is_object())
      throw ConfigError("config file '" + config_path + "' is not a JSON object");
  }
  std::string name = "fig2a";
  if (file.contains("scenario")) {
    if (!file["scenario"].is_string())
      throw ConfigError("'scenario' must be a string");
    name = file["scenario"].get<std::string>();
  }
  if (!scenario_name.empty()) name = scenario_name;

  Json tree = scenario_json(name);
  if (!file.is_null()) {
    // Unknown keys survive the merge and are rejected by the strict parse.
    tree.merge_patch(file);
    tree["scenario"] = name;
  }
  for (const std::string& o : overrides) apply_override(tree, o);
  return tree;
}

std::string config_hash(const RunConfig& config) {
  Json j = to_json(config);
  j.erase("output");
  j.erase("threads");
  const std::string canonical = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return hex64(h);
}

} // namespace eitnsim
