#include "tdhfc_cli/campaign.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tdhfc/data_files.hpp"
#include "tdhfc/errors.hpp"

namespace tdhfc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path resolve(const std::string& name, const fs::path& base) {
  try {
    return resolve_data_file(name, base);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

// Either an occupation list or a matrix file path.
HermMatrix read_state(const json& node, const char* key, int n, double occupied, const fs::path& base) {
  CMatrix m;
  if (node.is_array()) {
    const auto d = node.get<std::vector<double>>();
    if (static_cast<int>(d.size()) != n) {
      throw ConfigError(std::string(key) + ": expected " + std::to_string(n) + " occupations");
    }
    m = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = d[i];
  } else if (node.is_string()) {
    m = load_matrix_file(resolve(node.get<std::string>(), base));
    if (m.rows() != n) throw ConfigError(std::string(key) + ": matrix dimension does not match the system");
  } else {
    throw ConfigError(std::string(key) + ": expected an occupation list or a matrix file name");
  }
  const double herm = (m - m.adjoint()).norm();
  if (herm > 1e-10) throw ConfigError(std::string(key) + ": matrix is not Hermitian");
  const double tr = m.trace().real();
  if (std::abs(tr - occupied) > 1e-10) {
    throw ConfigError(std::string(key) + ": trace " + std::to_string(tr) + " differs from N_e/2 = " +
                      std::to_string(occupied));
  }
  return HermMatrix(m);
}

OptConfig read_opt(const json& node) {
  OptConfig o;
  o.max_iters = node.value("max_iters", o.max_iters);
  o.memory = node.value("memory", o.memory);
  o.tr_radius0 = node.value("tr_radius0", o.tr_radius0);
  o.tr_max = node.value("tr_max", o.tr_max);
  o.eta_accept = node.value("eta_accept", o.eta_accept);
  o.shrink = node.value("shrink", o.shrink);
  o.expand = node.value("expand", o.expand);
  o.mae_tol = node.value("mae_tol", o.mae_tol);
  o.n_restarts = node.value("n_restarts", o.n_restarts);
  o.seed0 = node.value("seed0", o.seed0);
  o.gradient_descent = node.value("gradient_descent", o.gradient_descent);
  return o;
}

}  // namespace

CMatrix load_matrix_file(const fs::path& path) {
  try {
    const json doc = json::parse(slurp(path));
    const int n = doc.at("n").get<int>();
    const auto re = doc.at("re").get<std::vector<double>>();
    const auto im = doc.contains("im") ? doc.at("im").get<std::vector<double>>()
                                       : std::vector<double>(re.size(), 0.0);
    if (n < 1 || re.size() != static_cast<std::size_t>(n) * n || im.size() != re.size()) {
      throw ConfigError(path.string() + ": expected n*n entries in re and im");
    }
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = cplx(re[i * n + j], im[i * n + j]);
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

CampaignConfig parse_campaign(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("campaign: ") + e.what());
  }
  try {
    CampaignConfig c;
    c.system_file = resolve(doc.at("system").get<std::string>(), base_dir);
    const MolSystemRaw raw = load_system(c.system_file);

    c.dt = doc.at("dt").get<double>();
    c.K = doc.at("K").get<int>();
    c.rho = doc.value("rho", 0.0);
    c.rescale = doc.value("rescale", false);
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) throw ConfigError("campaign: dt must be positive");
    if (c.K < 1) throw ConfigError("campaign: K must be at least 1");
    if (!(c.rho >= 0.0)) throw ConfigError("campaign: rho must be non-negative");

    const json& net = doc.at("net");
    c.net.layer_sizes = net.at("layer_sizes").get<std::vector<int>>();
    c.net.output = output_activation_from_string(net.value("output_activation", std::string("identity")));
    c.net.validate();

    c.opt = read_opt(doc.value("opt", json::object()));
    c.opt.validate();

    const double occ = 0.5 * raw.n_electrons;
    c.P0 = read_state(doc.at("p0"), "p0", raw.n_basis, occ, base_dir);
    c.PT = read_state(doc.at("pt"), "pt", raw.n_basis, occ, base_dir);
    if (doc.contains("out_dir")) c.out_dir = doc.at("out_dir").get<std::string>();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("campaign: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  } catch (const InvariantViolation& e) {
    throw ConfigError(e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    // layer-size and optimizer-setting validation
    throw ConfigError(e.what());
  }
}

CampaignConfig load_campaign(const fs::path& path) {
  return parse_campaign(slurp(path), path.parent_path());
}

ControlProblem make_problem(const CampaignConfig& cfg) {
  MolSystem sys = orthogonalize(load_system(cfg.system_file));
  if (cfg.net.n_inputs() != sys.n() * sys.n() || cfg.net.n_outputs() != sys.n_active()) {
    throw ConfigError("net: layer_sizes must start at N^2 = " + std::to_string(sys.n() * sys.n()) +
                      " and end at N_a = " + std::to_string(sys.n_active()));
  }
  FeedbackModel model(std::move(sys), cfg.net);
  return ControlProblem(std::move(model), ControlSpec{cfg.P0, cfg.PT, cfg.dt, cfg.K, cfg.rho, cfg.rescale});
}

}  // namespace tdhfc::cli
