#pragma once

#include "eitnsim/spectrum.hpp"

#include <string>
#include <vector>

namespace eitnsim {

/// Contents of a result CSV.
struct CsvSpectrum {
  std::string config_hash;
  std::vector<double> axis;
  std::vector<double> laser1;
  std::vector<double> laser2;
};

/// Two header lines (`# eit-nsim v1 config=<hash>` and the column names)
/// followed by one %.8e row per grid point.
std::string format_csv(const SpectrumResult& result, const std::string& hash);
void write_csv(const std::string& path, const SpectrumResult& result,
               const std::string& hash);
/// Throws ConfigError if the file is missing, malformed or has no rows.
CsvSpectrum read_csv(const std::string& path);

/// Gnuplot script drawing laser-1 absorption from `csv_path` with the
/// features of dip_metrics marked.
std::string plot_script(const CsvSpectrum& data, const std::string& csv_path,
                        double linewidth_MHz = 6.0);
/// Reads the CSV, writes the script next to it (or to `script_path`) and
/// returns the script path.
std::string emit_plot_script(const std::string& csv_path,
                             const std::string& script_path = "",
                             double linewidth_MHz = 6.0);

/// Human-readable feature table.
std::string feature_table(const std::vector<Feature>& features);

} // namespace eitnsim
