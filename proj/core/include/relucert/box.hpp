#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace relucert {

/// Axis-aligned hyperrectangle given by per-dimension lower/upper bounds.
/// Invariants: lo.size() == hi.size(), lo[i] <= hi[i], all entries finite.
class Box {
public:
  Box() = default;
  Box(Eigen::VectorXd lo, Eigen::VectorXd hi);

  /// Box with every dimension set to [lo, hi].
  static Box uniform(Eigen::Index dim, double lo, double hi);
  /// Degenerate box containing exactly one point.
  static Box point(const Eigen::VectorXd& x);

  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  Eigen::Index dim() const { return lo_.size(); }

  Eigen::VectorXd center() const { return 0.5 * (lo_ + hi_); }
  Eigen::VectorXd width() const { return hi_ - lo_; }
  double max_width() const;

  bool contains_point(const Eigen::VectorXd& x, double slack = 0.0) const;

  /// Smallest box containing both operands.
  Box hull(const Box& other) const;
  /// Box with every side moved outward by `amount` (>= 0).
  Box widened(double amount) const;
  /// Same as widened() but lower bounds are clamped at zero. Used for
  /// post-ReLU boxes, whose members are always non-negative.
  Box widened_nonneg(double amount) const;
  /// Splits along `dim` at `at`, returning the (lower, upper) halves.
  std::pair<Box, Box> bisect(Eigen::Index dim, double at) const;

  bool operator==(const Box& other) const;

  std::string to_string() const;

private:
  Eigen::VectorXd lo_;
  Eigen::VectorXd hi_;
};

/// True iff `inner` lies inside `outer` allowing `slack` overhang per side.
/// Throws on dimension mismatch or negative slack.
bool box_contains(const Box& outer, const Box& inner, double slack);

}  // namespace relucert
