#ifndef GDMC_IO_HPP
#define GDMC_IO_HPP

#include "gdmc/solver.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace gdmc::io {

using Json = nlohmann::json;

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// Minimal CSV table: one leading `#` comment line, a header row, then rows
/// formatted with format_double.
class CsvTable {
public:
  CsvTable(std::string comment, std::vector<std::string> header);

  void add_row(const std::vector<double> &values);
  std::size_t columns() const { return header_.size(); }
  std::string str() const;
  void write(const std::filesystem::path &path) const;

private:
  std::string comment_;
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

Json to_json(const GroundTruth &ground);
GroundTruth ground_truth_from_json(const Json &doc);

Json to_json(const PhaseReport &report);
Json to_json(const SpectralReport &report);

/// Run metadata plus the list of snapshot iterations.
Json trajectory_manifest(const TrajectoryRecord &record);

/// Series table: one row per iteration. Rank-1 series carry the leave-one-out
/// columns; every series carries sigma_1..sigma_r.
CsvTable series_table(const DiagnosticsSeries &series, const std::string &comment);

/// Long-format snapshot table: t, i, k, x, reference, loo_<l>...
CsvTable snapshot_table(const TrajectoryRecord &record,
                        const std::string &comment);

/// Text edge list: header `# gdmc-mask n=<n> p=<p> seed=<seed> pairs=<m>`,
/// then one `i j` line (0-based, i <= j) per stored pair.
std::string mask_to_text(const SampleMask &mask);
SampleMask mask_from_text(const std::string &text);
void write_mask(const std::filesystem::path &path, const SampleMask &mask);
SampleMask read_mask(const std::filesystem::path &path);

void write_text(const std::filesystem::path &path, const std::string &text);
void write_json(const std::filesystem::path &path, const Json &doc);
std::string read_text(const std::filesystem::path &path);

} // namespace gdmc::io

#endif // GDMC_IO_HPP
