#pragma once

// Campaign files: one JSON document describing a control problem and how
// to optimize it.
//
//   {
//     "system": "h2_sto3g.json",
//     "p0": [0, 1],                      occupations, or a matrix file path
//     "pt": [1, 0],
//     "dt": 8.268e-3, "K": 700, "rho": 1e4, "rescale": false,
//     "net": {"layer_sizes": [4, 4, 4, 1], "output_activation": "identity"},
//     "opt": {"n_restarts": 24, "max_iters": 100, ...},
//     "out_dir": "out/h2"
//   }
//
// Matrix files hold {"n": N, "re": [...], "im": [...]} in row-major order.

#include <filesystem>
#include <stdexcept>
#include <string>

#include "tdhfc/optimizer.hpp"

namespace tdhfc::cli {

// Unusable command line or campaign file (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CampaignConfig {
  std::filesystem::path system_file;
  HermMatrix P0;
  HermMatrix PT;
  double dt = 0.0;
  int K = 0;
  double rho = 0.0;
  bool rescale = false;
  NetConfig net;
  OptConfig opt;
  std::filesystem::path out_dir = "out";
};

/// Parses a campaign document. Relative paths are looked up next to
/// `base_dir` first and then among the bundled data files. Checks that P0
/// and PT are Hermitian with trace N_e/2, dt > 0 and K >= 1.
CampaignConfig parse_campaign(const std::string& json_text, const std::filesystem::path& base_dir = {});
CampaignConfig load_campaign(const std::filesystem::path& path);

/// Reads a {"n", "re", "im"} matrix file.
CMatrix load_matrix_file(const std::filesystem::path& path);

/// Loads the system, builds the model and wraps everything in a problem.
ControlProblem make_problem(const CampaignConfig& cfg);

}  // namespace tdhfc::cli
