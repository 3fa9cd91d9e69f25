#include "tdhfc/controller.hpp"

#include <cmath>

#include <json.hpp>

#include "tdhfc/errors.hpp"
#include "tdhfc/rng.hpp"

namespace tdhfc {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LayerView {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W;
  Eigen::Map<const RVector> b;
  int weight_offset;
  int bias_offset;
};

LayerView layer(const NetConfig& cfg, const Theta& theta, int l, int offset) {
  const int in = cfg.layer_sizes[l];
  const int out = cfg.layer_sizes[l + 1];
  return {decltype(LayerView::W)(theta.data() + offset, out, in),
          decltype(LayerView::b)(theta.data() + offset + out * in, out), offset, offset + out * in};
}

struct Activations {
  std::vector<RVector> z;  // pre-activations per layer
  std::vector<RVector> h;  // h[0] = input, h[l+1] = activation of layer l
  std::vector<int> offsets;
};

Activations run(const NetConfig& cfg, const Theta& theta, const RVector& p) {
  cfg.validate();
  if (theta.size() != cfg.n_params()) throw DimensionMismatch("theta length does not match network");
  if (p.size() != cfg.n_inputs()) throw DimensionMismatch("network input length mismatch");
  Activations act;
  act.h.push_back(p);
  int offset = 0;
  const int L = cfg.n_layers();
  for (int l = 0; l < L; ++l) {
    const auto lv = layer(cfg, theta, l, offset);
    act.offsets.push_back(offset);
    offset = lv.bias_offset + static_cast<int>(lv.b.size());
    RVector z = lv.W * act.h.back() + lv.b;
    RVector h(z.size());
    const bool last = l == L - 1;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      if (!last) {
        h(i) = softplus(z(i));
      } else {
        h(i) = cfg.output == OutputActivation::identity ? z(i) : cfg.output_scale * std::tanh(z(i));
      }
    }
    act.z.push_back(std::move(z));
    act.h.push_back(std::move(h));
  }
  return act;
}

}  // namespace

int NetConfig::n_params() const {
  int total = 0;
  for (int l = 0; l + 1 < static_cast<int>(layer_sizes.size()); ++l) {
    total += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return total;
}

void NetConfig::validate() const {
  if (layer_sizes.size() < 2) throw Error("network needs at least an input and an output layer");
  for (int w : layer_sizes) {
    if (w < 1) throw Error("network layer widths must be >= 1");
  }
}

Theta glorot_init(const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Xoshiro256 rng(seed);
  Theta theta = Theta::Zero(cfg.n_params());
  int offset = 0;
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const int in = cfg.layer_sizes[l];
    const int out = cfg.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < in * out; ++i) theta(offset + i) = rng.uniform(-limit, limit);
    offset += in * out + out;
  }
  return theta;
}

RVector forward(const NetConfig& cfg, const Theta& theta, const RVector& p) {
  return run(cfg, theta, p).h.back();
}

NetJacobians jacobians(const NetConfig& cfg, const Theta& theta, const RVector& p) {
  const Activations act = run(cfg, theta, p);
  const int L = cfg.n_layers();
  const int na = cfg.n_outputs();
  NetJacobians out{act.h.back(), RMatrix::Zero(na, cfg.n_inputs()), RMatrix::Zero(na, cfg.n_params())};

  for (int j = 0; j < na; ++j) {
    // delta = d a_j / d z_l
    RVector delta = RVector::Zero(cfg.n_outputs());
    const double zj = act.z.back()(j);
    if (cfg.output == OutputActivation::identity) {
      delta(j) = 1.0;
    } else {
      const double t = std::tanh(zj);
      delta(j) = cfg.output_scale * (1.0 - t * t);
    }
    for (int l = L - 1; l >= 0; --l) {
      const auto lv = layer(cfg, theta, l, act.offsets[l]);
      const RVector& input = act.h[l];
      const int in = static_cast<int>(input.size());
      for (Eigen::Index o = 0; o < delta.size(); ++o) {
        if (delta(o) == 0.0) continue;
        for (int i = 0; i < in; ++i) out.da_dtheta(j, lv.weight_offset + o * in + i) = delta(o) * input(i);
        out.da_dtheta(j, lv.bias_offset + o) = delta(o);
      }
      RVector back = lv.W.transpose() * delta;
      if (l == 0) {
        out.da_dp.row(j) = back.transpose();
      } else {
        const RVector& zprev = act.z[l - 1];
        for (Eigen::Index i = 0; i < back.size(); ++i) back(i) *= sigmoid(zprev(i));
        delta = std::move(back);
      }
    }
  }
  return out;
}

RVector amplitudes(const HermBasis& basis, const NetConfig& cfg, const Theta& theta, const HermMatrix& P) {
  return forward(cfg, theta, unvec(P, basis));
}

VextDerivs vext_with_derivs(const MolSystem& sys, const HermBasis& basis, const NetConfig& cfg,
                            const Theta& theta, const HermMatrix& P) {
  const int n = sys.n();
  const int na = sys.n_active();
  if (cfg.n_outputs() != na) throw DimensionMismatch("network outputs differ from active dipole count");
  NetJacobians jac = jacobians(cfg, theta, unvec(P, basis));

  VextDerivs d;
  d.a = jac.a;
  d.value = external_potential(sys, jac.a);

  // G(j', rs) = sum_m da_dp(j', m) Rinv(m, rs): sensitivity of a_j' to P_rs.
  const CMatrix G = jac.da_dp.cast<cplx>() * basis.Rinv;
  d.dV_dP = Tensor4(n);
  for (int jp = 0; jp < na; ++jp) {
    const RMatrix& M = sys.active_dipole(jp);
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const double mjl = M(j, l);
        if (mjl == 0.0) continue;
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) d.dV_dP(j, l, r, s) += mjl * G(jp, r * n + s);
      }
  }

  const int M = cfg.n_params();
  d.dV_dtheta.reserve(M);
  for (int t = 0; t < M; ++t) {
    RMatrix slice = RMatrix::Zero(n, n);
    for (int jp = 0; jp < na; ++jp) slice += jac.da_dtheta(jp, t) * sys.active_dipole(jp);
    d.dV_dtheta.emplace_back(slice);
  }
  d.da_dtheta = std::move(jac.da_dtheta);
  return d;
}

std::string to_string(OutputActivation act) {
  return act == OutputActivation::identity ? "identity" : "tanh10";
}

OutputActivation output_activation_from_string(const std::string& name) {
  if (name == "identity") return OutputActivation::identity;
  if (name == "tanh10") return OutputActivation::scaled_tanh;
  throw ParseError("unknown output activation \"" + name + "\"");
}

std::string checkpoint_to_json(const NetConfig& cfg, const Theta& theta) {
  nlohmann::json doc;
  doc["layer_sizes"] = cfg.layer_sizes;
  doc["output_activation"] = to_string(cfg.output);
  doc["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    Checkpoint ck;
    ck.net.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    ck.net.output = output_activation_from_string(doc.at("output_activation").get<std::string>());
    const auto values = doc.at("theta").get<std::vector<double>>();
    ck.net.validate();
    if (static_cast<int>(values.size()) != ck.net.n_params()) {
      throw ParseError("checkpoint: theta length does not match layer_sizes");
    }
    ck.theta = Eigen::Map<const RVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace tdhfc
