#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randnet/benchmark.hpp"
#include "randnet/errors.hpp"
#include "randnet/shallow_net.hpp"

namespace randnet {

/// Writes `content` to a sibling temporary file and renames it over `path`,
/// so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

/// Shortest round-trip-safe text for a double.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string noise_label(double sigma) { return std::to_string(static_cast<int>(std::lround(sigma * 100))); }

/// One row per estimator: target, n, noise, estimator, median_norm_err,
/// iqr_norm_err, avg_baseline, repetitions, seed.
inline std::string simulate_csv(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "target,n,noise,estimator,median_norm_err,iqr_norm_err,avg_baseline,repetitions,seed\n";
  const auto& s = report.spec;
  for (const auto& row : report.rows) {
    out << 'm' << s.target << ',' << s.n << ',' << format_number(s.noise_sigma) << ',' << row.id << ','
        << format_number(row.median) << ',' << format_number(row.iqr) << ',' << format_number(report.avg_baseline)
        << ',' << row.normalized_errors.size() << ',' << s.master_seed << '\n';
  }
  return out.str();
}

inline nlohmann::json report_json(const BenchmarkReport& report) {
  const auto& s = report.spec;
  nlohmann::json doc;
  doc["target"] = "m" + std::to_string(s.target);
  doc["n"] = s.n;
  doc["noise"] = s.noise_sigma;
  doc["repetitions"] = s.repetitions;
  doc["eval_N"] = s.eval_N;
  doc["seed"] = s.master_seed;
  doc["avg_baseline"] = report.avg_baseline;
  doc["superset_violations"] = report.superset_violations;
  doc["failed_repetitions"] = report.failed_repetitions;
  doc["warnings"] = report.warnings;
  auto rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"estimator", row.id},
                    {"median_norm_err", row.median},
                    {"iqr_norm_err", row.iqr},
                    {"normalized_errors", row.normalized_errors},
                    {"test_risks", row.test_risks},
                    {"selections", row.selections}});
  }
  doc["estimators"] = std::move(rows);
  return doc;
}

/// Column order of the published tables.
struct TableCell {
  Eigen::Index n;
  double noise;
};

inline const std::vector<TableCell>& table_cells() {
  static const std::vector<TableCell> cells = {{200, 0.05}, {400, 0.05}, {200, 0.20}, {400, 0.20}};
  return cells;
}

inline std::string cell_header(const TableCell& c) { return "n" + std::to_string(c.n) + "_noise" + noise_label(c.noise); }

/// Results of one target across the four (n, noise) cells; a missing
/// report marks a failed cell.
struct TargetTable {
  int target = 1;
  std::vector<std::optional<BenchmarkReport>> cells;
};

/// CSV in the layout of the published tables: a title row per target, the
/// normalizer row, then one "median (iqr)" row per estimator.
inline std::string table_csv(const std::vector<TargetTable>& tables, const std::vector<std::string>& estimators) {
  std::ostringstream out;
  out << "estimator";
  for (const auto& c : table_cells()) out << ',' << cell_header(c);
  out << '\n';
  for (const auto& t : tables) {
    out << 'm' << t.target << std::string(table_cells().size(), ',') << '\n';
    out << "avg_baseline";
    for (const auto& cell : t.cells) out << ',' << (cell ? format_number(cell->avg_baseline) : "FAILED");
    out << '\n';
    for (const auto& id : estimators) {
      out << id;
      for (const auto& cell : t.cells) {
        out << ',';
        if (!cell) {
          out << "FAILED";
          continue;
        }
        const auto& row = cell->row(id);
        out << format_number(row.median) << " (" << format_number(row.iqr) << ')';
      }
      out << '\n';
    }
  }
  return out.str();
}

inline std::string pretty_table(const std::vector<TargetTable>& tables, const std::vector<std::string>& estimators) {
  std::ostringstream out;
  for (const auto& t : tables) {
    out << "m" << t.target << "\n";
    out << std::left << std::setw(14) << "noise" << std::setw(40) << "5%" << "20%\n";
    out << std::setw(14) << "sample size";
    for (const auto& c : table_cells()) out << std::setw(20) << ("n=" + std::to_string(c.n));
    out << '\n' << std::setw(14) << "avg error";
    for (const auto& cell : t.cells) out << std::setw(20) << (cell ? format_short(cell->avg_baseline) : "FAILED");
    out << '\n';
    for (const auto& id : estimators) {
      out << std::setw(14) << id;
      for (const auto& cell : t.cells) {
        std::string text = "FAILED";
        if (cell) {
          const auto& row = cell->row(id);
          text = format_short(row.median) + " (" + format_short(row.iqr) + ")";
        }
        out << std::setw(20) << text;
      }
      out << '\n';
    }
    out << '\n';
  }
  return out.str();
}

inline std::string trace_csv(const std::vector<double>& trace) {
  std::ostringstream out;
  out << "step,F\n";
  for (std::size_t t = 0; t < trace.size(); ++t) out << t << ',' << format_number(trace[t]) << '\n';
  return out.str();
}

/// Reads rows "x1,...,xd,y"; a non-numeric first line is treated as a header.
inline LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open data file '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw Error("non-numeric field in data file '" + path.string() + "'");
    }
    first = false;
    if (!rows.empty() && values.size() != rows.front().size()) throw DimensionMismatch("ragged row in data file");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw TooSmall("data file has no rows");
  if (rows.front().size() < 2) throw DimensionMismatch("data rows need at least one input and a response");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size()) - 1;
  LabeledDataset data{Matrix(n, d), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    data.y[i] = rows[static_cast<std::size_t>(i)].back();
  }
  data.validate();
  return data;
}

inline std::string dataset_csv(const LabeledDataset& data) {
  std::ostringstream out;
  for (Eigen::Index j = 0; j < data.dimension(); ++j) out << 'x' << j + 1 << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dimension(); ++j) out << format_number(data.x(i, j)) << ',';
    out << format_number(data.y[i]) << '\n';
  }
  return out.str();
}

}  // namespace randnet
