#pragma once

// Plot-ready CSV export.
//
// traj.csv columns: k, t, then Re/Im of every P entry in row-major order
// (P00_re, P00_im, P01_re, ...), then one column per active dipole
// amplitude (a_x, a_y, a_z as present). Row K carries a(P^K), the value
// the controller would emit at the final state.
//
// control.csv columns: k, t, amplitudes; K rows.
//
// Doubles are printed with 17 significant digits so a read-back through
// read_csv is bit-identical.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdhfc/propagator.hpp"

namespace tdhfc::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> amplitude_labels(const MolSystem& sys);

CsvTable trajectory_table(const Trajectory& traj, const FeedbackModel& model, const Theta& theta);
CsvTable control_table(const Trajectory& traj, const FeedbackModel& model);

void write_csv(std::ostream& os, const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(std::istream& is);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace tdhfc::cli
