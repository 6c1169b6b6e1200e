#include "relucert/lipschitz.hpp"

#include <cmath>
#include <stdexcept>

namespace relucert {

std::string to_string(Norm n) {
  switch (n) {
    case Norm::L1: return "l1";
    case Norm::L2: return "l2";
    case Norm::Linf: return "linf";
  }
  return "linf";
}

Norm norm_from_string(const std::string& s) {
  if (s == "l1") return Norm::L1;
  if (s == "l2") return Norm::L2;
  if (s == "linf") return Norm::Linf;
  throw std::invalid_argument("unknown norm \"" + s + "\"");
}

namespace {

double max_col_sum(const Eigen::MatrixXd& w) {
  return w.cwiseAbs().colwise().sum().maxCoeff();
}

double max_row_sum(const Eigen::MatrixXd& w) {
  return w.cwiseAbs().rowwise().sum().maxCoeff();
}

double spectral_norm_estimate(const Eigen::MatrixXd& w) {
  if (w.isZero(0.0)) return 0.0;
  // Power iteration on W^T W. The start vector is deterministic but varied,
  // so it is not orthogonal to the leading singular vector in practice.
  Eigen::VectorXd v(w.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = 1.0 + 0.618 * static_cast<double>(i + 1) /
                     static_cast<double>(v.size() + 1);
  }
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd u = w.transpose() * (w * v);
    const double norm = u.norm();
    if (norm == 0.0) break;
    u /= norm;
    const double next = (w * u).norm();
    const bool converged = std::abs(next - sigma) <= 1e-13 * std::max(1.0, next);
    sigma = next;
    v = std::move(u);
    if (converged) break;
  }
  return sigma;
}

double operator_norm(const Eigen::MatrixXd& w, Norm norm) {
  switch (norm) {
    case Norm::L1:
      return max_col_sum(w);
    case Norm::Linf:
      return max_row_sum(w);
    case Norm::L2: {
      // sqrt(|W|_1 |W|_inf) is a certified upper bound on the spectral norm;
      // it both caps the inflated estimate and covers a collapsed iteration.
      const double cap =
          std::min(w.norm(), std::sqrt(max_col_sum(w) * max_row_sum(w)));
      const double est = spectral_norm_estimate(w);
      return est > 0.0 ? std::min(est * 1.01, cap) : cap;
    }
  }
  return 0.0;
}

double vector_norm(const Eigen::VectorXd& v, Norm norm) {
  switch (norm) {
    case Norm::L1: return v.cwiseAbs().sum();
    case Norm::L2: return v.norm();
    case Norm::Linf: return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  }
  return 0.0;
}

}  // namespace

LipschitzBound lipschitz_upper_bound(const Network& net, Norm norm) {
  double ell = 1.0;
  for (const Layer& layer : net.layers()) {
    ell *= operator_norm(layer.weights, norm);
  }
  return LipschitzBound{ell, norm, "norm_product"};
}

double compute_kappa(const Box& base, const Box& enlarged, Norm norm) {
  if (base.dim() != enlarged.dim()) {
    throw std::invalid_argument("compute_kappa: dimension mismatch");
  }
  if (!box_contains(enlarged, base, 0.0)) {
    throw std::invalid_argument("compute_kappa: base box not contained in "
                                "enlarged box");
  }
  // Per-dimension excess of the enlarged box over the base box; the corner
  // realizing every excess simultaneously attains the sup distance.
  Eigen::VectorXd excess(base.dim());
  for (Eigen::Index i = 0; i < base.dim(); ++i) {
    excess[i] = std::max(base.lo()[i] - enlarged.lo()[i],
                         enlarged.hi()[i] - base.hi()[i]);
  }
  return vector_norm(excess, norm);
}

Enlargement make_enlargement(const Box& base, const Box& enlarged, Norm norm,
                             std::optional<double> kappa_override) {
  Enlargement e;
  e.base = base;
  e.enlarged = enlarged;
  e.norm = norm;
  e.kappa = kappa_override ? *kappa_override
                           : compute_kappa(base, enlarged, norm);
  if (e.kappa < 0.0) {
    throw std::invalid_argument("make_enlargement: negative kappa");
  }
  return e;
}

bool check_lipschitz_reuse(const Box& s_n, double ell, double kappa,
                           const Box& d_out) {
  if (s_n.dim() != d_out.dim()) {
    throw std::invalid_argument("check_lipschitz_reuse: dimension mismatch");
  }
  if (ell < 0.0 || kappa < 0.0) {
    throw std::invalid_argument("check_lipschitz_reuse: ell and kappa must "
                                "be >= 0");
  }
  return box_contains(d_out, s_n.widened(ell * kappa), 0.0);
}

}  // namespace relucert
