#pragma once

#include <optional>
#include <string>

#include "relucert/box.hpp"
#include "relucert/network.hpp"

namespace relucert {

enum class Norm { L1, L2, Linf };

std::string to_string(Norm n);
Norm norm_from_string(const std::string& s);

/// Global Lipschitz bound |f(x1)-f(x2)| <= value * |x1-x2| under `norm`.
struct LipschitzBound {
  double value = 0.0;
  Norm norm = Norm::Linf;
  std::string method = "norm_product";
};

/// Domain enlargement record: base is the previously verified input box,
/// `enlarged` the new one, and kappa bounds the distance from any point of
/// enlarged to base under `norm`.
struct Enlargement {
  Box base;
  Box enlarged;
  double kappa = 0.0;
  Norm norm = Norm::Linf;
};

/// Product of per-layer operator norms of the weight matrices (ReLU is
/// 1-Lipschitz, so activations contribute factor 1). L1/Linf use the exact
/// column/row-sum norms; L2 uses a power-iteration estimate of the spectral
/// norm inflated by 1%.
LipschitzBound lipschitz_upper_bound(const Network& net, Norm norm);

/// Builds the enlargement record, computing kappa unless an override is
/// supplied (overrides must still bound the computed distance from above).
Enlargement make_enlargement(const Box& base, const Box& enlarged, Norm norm,
                             std::optional<double> kappa_override = {});

/// Exact sup-distance from `enlarged` to `base` under `norm`, for boxes.
/// Requires base to be contained in enlarged.
double compute_kappa(const Box& base, const Box& enlarged, Norm norm);

/// True iff widening every side of s_n by ell*kappa stays inside d_out: the
/// box realization of {s_hat : exists s in S_n with |s_hat - s| <= ell*kappa}.
bool check_lipschitz_reuse(const Box& s_n, double ell, double kappa,
                           const Box& d_out);

}  // namespace relucert
