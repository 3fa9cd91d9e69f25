#pragma once

// Neural feedback law a(p; theta): a dense feedforward network with softplus
// hidden layers and an identity or scaled-tanh output layer, plus the
// derivatives of the induced external potential V(P; theta) = sum_j a_j M_j.

#include <cstdint>
#include <string>
#include <vector>

#include "tdhfc/herm.hpp"
#include "tdhfc/molsys.hpp"

namespace tdhfc {

enum class OutputActivation { identity, scaled_tanh };

struct NetConfig {
  /// Widths [n0 = N^2, n1, ..., nL = N_a].
  std::vector<int> layer_sizes;
  OutputActivation output = OutputActivation::identity;
  /// c in z -> c tanh(z) when output is scaled_tanh.
  double output_scale = 10.0;

  int n_layers() const noexcept { return static_cast<int>(layer_sizes.size()) - 1; }
  int n_inputs() const { return layer_sizes.front(); }
  int n_outputs() const { return layer_sizes.back(); }
  /// sum_l (n_{l-1} n_l + n_l)
  int n_params() const;
  /// Throws Error when the layout is unusable.
  void validate() const;
};

/// Flat parameter vector: for each layer, the weights (row-major,
/// output x input) followed by the biases.
using Theta = RVector;

/// Glorot-uniform weights on +-sqrt(6 / (fan_in + fan_out)) drawn from
/// xoshiro256** seeded with `seed`; zero biases.
Theta glorot_init(const NetConfig& cfg, std::uint64_t seed);

RVector forward(const NetConfig& cfg, const Theta& theta, const RVector& p);

struct NetJacobians {
  RVector a;
  RMatrix da_dp;      // N_a x n0
  RMatrix da_dtheta;  // N_a x M
};

/// Reverse-mode Jacobians of the network output.
NetJacobians jacobians(const NetConfig& cfg, const Theta& theta, const RVector& p);

struct VextDerivs {
  RVector a;
  HermMatrix value;
  /// dV_{jl} / dP_{rs}, complex-linear in the perturbation of P.
  Tensor4 dV_dP;
  /// dV / dtheta_t for every parameter t.
  std::vector<HermMatrix> dV_dtheta;
  RMatrix da_dtheta;
};

VextDerivs vext_with_derivs(const MolSystem& sys, const HermBasis& basis, const NetConfig& cfg,
                            const Theta& theta, const HermMatrix& P);

/// Amplitudes a(unvec(P); theta).
RVector amplitudes(const HermBasis& basis, const NetConfig& cfg, const Theta& theta, const HermMatrix& P);

std::string to_string(OutputActivation act);
/// Accepts "identity" and "tanh10" (scaled tanh with c = 10).
OutputActivation output_activation_from_string(const std::string& name);

struct Checkpoint {
  NetConfig net;
  Theta theta;
};

/// {"layer_sizes": [...], "output_activation": "identity"|"tanh10", "theta": [...]}
std::string checkpoint_to_json(const NetConfig& cfg, const Theta& theta);
Checkpoint checkpoint_from_json(const std::string& text);

}  // namespace tdhfc
