#include "eitnsim/output.hpp"

#include "eitnsim/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace eitnsim {
namespace {

constexpr const char* kMagic = "# eit-nsim v1 config=";
constexpr const char* kColumns = "axis_MHz,absorption_laser1,absorption_laser2";

std::string fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

bool parse_double(const std::string& s, double& out) {
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  in >> out;
  return !in.fail() && in.eof();
}

} // namespace

std::string format_csv(const SpectrumResult& r, const std::string& hash) {
  std::string out = std::string(kMagic) + hash + "\n" + kColumns + "\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out += fixed("%.8e", r.axis_values[i]) + "," +
           fixed("%.8e", r.absorption_laser1[i]) + "," +
           fixed("%.8e", r.absorption_laser2[i]) + "\n";
  }
  return out;
}

void write_csv(const std::string& path, const SpectrumResult& r,
               const std::string& hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << format_csv(r, hash);
  if (!out) throw ConfigError("error writing '" + path + "'");
}

CsvSpectrum read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read CSV '" + path + "'");
  CsvSpectrum data;
  std::string line;
  if (!std::getline(in, line) || line.rfind(kMagic, 0) != 0)
    throw ConfigError("'" + path + "' is not an eit-nsim CSV");
  data.config_hash = line.substr(std::string(kMagic).size());
  if (!std::getline(in, line) || line != kColumns)
    throw ConfigError("'" + path + "' has an unexpected column header");
  int row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string a, b, c;
    double x, y1, y2;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') ||
        !std::getline(fields, c) || !parse_double(a, x) || !parse_double(b, y1) ||
        !parse_double(c, y2))
      throw ConfigError("'" + path + "' line " + std::to_string(row) + " is malformed");
    data.axis.push_back(x);
    data.laser1.push_back(y1);
    data.laser2.push_back(y2);
  }
  if (data.axis.empty()) throw ConfigError("'" + path + "' has no data rows");
  return data;
}

std::string plot_script(const CsvSpectrum& data, const std::string& csv_path,
                        double linewidth_MHz) {
  const std::string name = std::filesystem::path(csv_path).filename().string();
  std::ostringstream s;
  s << "# gnuplot script for " << name << " (config " << data.config_hash << ")\n"
    << "set datafile separator ','\n"
    << "set key off\n"
    << "set title '" << name << "' noenhanced\n"
    << "set xlabel 'laser-2 detuning (MHz)'\n"
    << "set ylabel 'laser-1 absorbed fraction'\n";
  int tag = 1;
  for (const Feature& f : dip_metrics(data.axis, data.laser1, linewidth_MHz)) {
    const std::string x = fixed("%.3f", f.position);
    if (f.kind == FeatureKind::Dip) {
      s << "set arrow " << tag << " from " << x << ", graph 0 to " << x
        << ", graph 1 nohead dashtype 2 linecolor rgb '#888888'\n";
      s << "set label " << tag << " 'dip " << x << "' at " << x
        << ", graph 0.05 rotate by 90 offset -0.8, 0 font ',8'\n";
    } else {
      s << "set label " << tag << " 'peak " << x << "' at " << x
        << ", graph 0.97 center font ',8'\n";
    }
    ++tag;
  }
  s << "plot '" << name << "' skip 2 using 1:2 with lines linewidth 1.5\n";
  return s.str();
}

std::string emit_plot_script(const std::string& csv_path,
                             const std::string& script_path,
                             double linewidth_MHz) {
  const CsvSpectrum data = read_csv(csv_path);
  std::string target = script_path;
  if (target.empty())
    target = std::filesystem::path(csv_path).replace_extension(".gp").string();
  std::ofstream out(target, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + target + "'");
  out << plot_script(data, csv_path, linewidth_MHz);
  return target;
}

std::string feature_table(const std::vector<Feature>& features) {
  std::ostringstream s;
  s << "kind   position_MHz   fwhm_MHz   contrast\n";
  for (const Feature& f : features) {
    char line[128];
    if (f.resolved)
      std::snprintf(line, sizeof line, "%-5s %13.3f %10.3f %10.4f\n",
                    to_string(f.kind).c_str(), f.position, f.fwhm, f.contrast);
    else
      std::snprintf(line, sizeof line, "%-5s %13.3f %10s %10.4f\n",
                    to_string(f.kind).c_str(), f.position, "unresolved", f.contrast);
    s << line;
  }
  if (features.empty()) s << "(no features)\n";
  return s.str();
}

} // namespace eitnsim
