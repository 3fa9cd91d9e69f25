#include "tdhfc_cli/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "tdhfc/errors.hpp"

namespace tdhfc::cli {

namespace {

void append_state(std::vector<double>& row, const HermMatrix& P) {
  const int n = P.dim();
  for (int q = 0; q < n; ++q)
    for (int r = 0; r < n; ++r) {
      row.push_back(P(q, r).real());
      row.push_back(P(q, r).imag());
    }
}

std::string format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> amplitude_labels(const MolSystem& sys) {
  static const char* axes[] = {"a_x", "a_y", "a_z"};
  std::vector<std::string> out;
  for (int j : sys.active) out.emplace_back(axes[j]);
  return out;
}

CsvTable trajectory_table(const Trajectory& traj, const FeedbackModel& model, const Theta& theta) {
  CsvTable t;
  const int n = model.n();
  t.header = {"k", "t"};
  for (int q = 0; q < n; ++q)
    for (int r = 0; r < n; ++r) {
      const std::string base = "P" + std::to_string(q) + std::to_string(r);
      t.header.push_back(base + "_re");
      t.header.push_back(base + "_im");
    }
  for (auto& l : amplitude_labels(model.system())) t.header.push_back(l);

  for (int k = 0; k <= traj.K; ++k) {
    std::vector<double> row{static_cast<double>(k), k * traj.dt};
    append_state(row, traj.P[k]);
    const RVector a = k < traj.K ? traj.a[k] : model.amplitudes(theta, traj.P[k]);
    for (Eigen::Index j = 0; j < a.size(); ++j) row.push_back(a[j]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable control_table(const Trajectory& traj, const FeedbackModel& model) {
  CsvTable t;
  t.header = {"k", "t"};
  for (auto& l : amplitude_labels(model.system())) t.header.push_back(l);
  for (int k = 0; k < traj.K; ++k) {
    std::vector<double> row{static_cast<double>(k), k * traj.dt};
    for (Eigen::Index j = 0; j < traj.a[k].size(); ++j) row.push_back(traj.a[k][j]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(std::ostream& os, const CsvTable& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format(row[i]);
    os << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(out, table);
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw ParseError("csv: empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ParseError("csv: not a number: '" + cell + "'");
      }
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw ParseError("csv: row width does not match header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace tdhfc::cli
