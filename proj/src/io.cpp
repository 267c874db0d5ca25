#include "gdmc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace gdmc::io {

std::string format_double(double value) {
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::string comment, std::vector<std::string> header)
    : comment_(std::move(comment)), header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double> &values) {
  require(values.size() == header_.size(), "csv row width mismatch");
  std::string row;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k)
      row += ',';
    row += format_double(values[k]);
  }
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out = "# " + comment_ + "\n";
  for (std::size_t k = 0; k < header_.size(); ++k) {
    if (k)
      out += ',';
    out += header_[k];
  }
  out += '\n';
  for (const auto &row : rows_) {
    out += row;
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path &path) const {
  write_text(path, str());
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path &path, const Json &doc) {
  write_text(path, doc.dump(2) + "\n");
}

std::string read_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json to_json(const GroundTruth &ground) {
  Json doc;
  doc["n"] = ground.n;
  doc["r"] = ground.rank();
  doc["eigenvalues"] = ground.eigenvalues;
  doc["mu"] = ground.mu;
  doc["seed"] = ground.seed;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(ground.n * ground.rank()));
  for (Index i = 0; i < ground.n; ++i)
    for (Index k = 0; k < ground.rank(); ++k)
      flat.push_back(ground.eigenvectors(i, k));
  doc["u_star"] = flat;
  return doc;
}

GroundTruth ground_truth_from_json(const Json &doc) {
  const Index n = doc.at("n").get<Index>();
  const Index r = doc.at("r").get<Index>();
  auto eigenvalues = doc.at("eigenvalues").get<std::vector<double>>();
  const auto flat = doc.at("u_star").get<std::vector<double>>();
  require(static_cast<Index>(flat.size()) == n * r,
          "ground truth u_star has the wrong length");
  Factor U(n, r);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < r; ++k)
      U(i, k) = flat[static_cast<std::size_t>(i * r + k)];
  return make_ground_truth(std::move(U), std::move(eigenvalues),
                           doc.at("seed").get<Seed>());
}

namespace {

void put_optional(Json &doc, const std::string &key,
                  const std::optional<Index> &value) {
  doc[key] = value ? Json(*value) : Json(nullptr);
  doc[key + "_detected"] = value.has_value();
}

} // namespace

Json to_json(const PhaseReport &report) {
  Json doc;
  doc["t1_theory"] = report.t1_theory;
  doc["t1_vacuous"] = report.t1_vacuous;
  put_optional(doc, "t2_emp", report.t2_emp);
  put_optional(doc, "t2_prime_emp", report.t2_prime_emp);
  doc["t_star_pred"] = report.t_star_pred;
  put_optional(doc, "t_star_emp", report.t_star_emp);
  return doc;
}

Json to_json(const SpectralReport &report) {
  Json doc;
  doc["h_norm"] = report.h_norm;
  doc["lambda_o"] = report.lambda_o;
  doc["u_o_dist"] = report.u_o_dist;
  doc["bound"] = report.bound;
  doc["bound_ratio"] = report.bound_ratio;
  doc["tol"] = report.tol;
  Json loo = Json::array();
  for (const auto &entry : report.loo)
    loo.push_back({{"l", entry.l},
                   {"lambda_l", entry.lambda},
                   {"u_l_dist", entry.u_dist}});
  doc["loo"] = loo;
  return doc;
}

Json trajectory_manifest(const TrajectoryRecord &record) {
  Json doc;
  doc["rank"] = record.rank;
  doc["seed"] = record.seed;
  doc["eta"] = record.config.eta;
  doc["T"] = record.config.T;
  doc["beta0"] = record.config.beta0;
  doc["record_every"] = record.config.record_every;
  doc["loo_indices"] = record.config.loo_indices;
  doc["track_proxy"] = record.config.track_proxy;
  doc["iterations"] = record.series.size();
  std::vector<Index> ts;
  for (const auto &s : record.snapshots)
    ts.push_back(s.t);
  doc["snapshots"] = ts;
  return doc;
}

CsvTable series_table(const DiagnosticsSeries &series,
                      const std::string &comment) {
  std::vector<std::string> header{
      "t",          "alpha",       "beta",        "gamma",    "loss",
      "aligned_l2", "aligned_inf", "dev_ref_l2",  "dev_ref_inf", "x_inf",
      "incoherence_x", "ref_alpha", "ref_beta",   "ref_gamma"};
  const bool proxy = !series.dev_proxy_l2.empty();
  if (proxy)
    header.push_back("dev_proxy_l2");
  const std::size_t r =
      series.singular_values.empty() ? 0 : series.singular_values[0].size();
  for (std::size_t k = 0; k < r; ++k)
    header.push_back("sigma_" + std::to_string(k + 1));
  for (const auto &track : series.loo) {
    const std::string l = std::to_string(track.l);
    header.push_back("dev_loo_" + l);
    header.push_back("loo_entry_" + l);
    if (!track.signal.empty())
      header.push_back("loo_signal_" + l);
  }
  CsvTable table(comment, header);
  for (Index t = 0; t < series.size(); ++t) {
    const auto k = static_cast<std::size_t>(t);
    std::vector<double> row{static_cast<double>(t),
                            series.alpha[k],
                            series.beta[k],
                            series.gamma[k],
                            series.loss[k],
                            series.aligned_l2[k],
                            series.aligned_inf[k],
                            series.dev_ref_l2[k],
                            series.dev_ref_inf[k],
                            series.x_inf[k],
                            series.incoherence_x[k],
                            series.ref_alpha[k],
                            series.ref_beta[k],
                            series.ref_gamma[k]};
    if (proxy)
      row.push_back(series.dev_proxy_l2[k]);
    for (std::size_t c = 0; c < r; ++c)
      row.push_back(series.singular_values[k][c]);
    for (const auto &track : series.loo) {
      row.push_back(track.dev[k]);
      row.push_back(track.entry[k]);
      if (!track.signal.empty())
        row.push_back(track.signal[k]);
    }
    table.add_row(row);
  }
  return table;
}

CsvTable snapshot_table(const TrajectoryRecord &record,
                        const std::string &comment) {
  std::vector<std::string> header{"t", "i", "k", "x", "reference"};
  for (Index l : record.config.loo_indices)
    header.push_back("loo_" + std::to_string(l));
  const bool proxy = record.config.track_proxy;
  if (proxy)
    header.push_back("proxy");
  CsvTable table(comment, header);
  for (const auto &snap : record.snapshots)
    for (Index i = 0; i < snap.x.rows(); ++i)
      for (Index k = 0; k < snap.x.cols(); ++k) {
        std::vector<double> row{static_cast<double>(snap.t),
                                static_cast<double>(i), static_cast<double>(k),
                                snap.x(i, k), snap.reference(i, k)};
        for (const auto &loo : snap.loo)
          row.push_back(loo(i, k));
        if (proxy)
          row.push_back(snap.proxy(i, k));
        table.add_row(row);
      }
  return table;
}

std::string mask_to_text(const SampleMask &mask) {
  std::string out = "# gdmc-mask n=" + std::to_string(mask.n()) +
                    " p=" + format_double(mask.p()) +
                    " seed=" + std::to_string(mask.seed()) +
                    " pairs=" + std::to_string(mask.pair_count()) + "\n";
  mask.for_each_pair([&](Index, Index i, Index j) {
    out += std::to_string(i);
    out += ' ';
    out += std::to_string(j);
    out += '\n';
  });
  return out;
}

SampleMask mask_from_text(const std::string &text) {
  std::stringstream ss(text);
  std::string header;
  std::getline(ss, header);
  Index n = 0;
  Index pairs = -1;
  double p = 0.0;
  unsigned long long seed = 0;
  {
    std::stringstream hs(header);
    std::string token;
    hs >> token;
    require(token == "#", "mask file: missing header");
    hs >> token;
    require(token == "gdmc-mask", "mask file: unrecognized header");
    while (hs >> token) {
      const auto eq = token.find('=');
      require(eq != std::string::npos, "mask file: malformed header field");
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "n")
        n = static_cast<Index>(std::stoll(value));
      else if (key == "p")
        p = std::stod(value);
      else if (key == "seed")
        seed = std::stoull(value);
      else if (key == "pairs")
        pairs = static_cast<Index>(std::stoll(value));
    }
  }
  std::vector<std::pair<Index, Index>> list;
  long long i = 0, j = 0;
  while (ss >> i >> j)
    list.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
  require(ss.eof(), "mask file: malformed pair line");
  SampleMask mask = SampleMask::from_pairs(n, p, seed, std::move(list));
  require(pairs < 0 || mask.pair_count() == pairs,
          "mask file: pair count does not match header");
  return mask;
}

void write_mask(const std::filesystem::path &path, const SampleMask &mask) {
  write_text(path, mask_to_text(mask));
}

SampleMask read_mask(const std::filesystem::path &path) {
  return mask_from_text(read_text(path));
}

} // namespace gdmc::io
