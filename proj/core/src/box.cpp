#include "relucert/box.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relucert {

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi)
    : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) {
    throw std::invalid_argument("Box: lo and hi have different dimensions");
  }
  for (Eigen::Index i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i])) {
      throw std::invalid_argument("Box: non-finite bound at dimension " +
                                  std::to_string(i));
    }
    if (lo_[i] > hi_[i]) {
      throw std::invalid_argument("Box: lo > hi at dimension " +
                                  std::to_string(i));
    }
  }
}

Box Box::uniform(Eigen::Index dim, double lo, double hi) {
  return Box(Eigen::VectorXd::Constant(dim, lo),
             Eigen::VectorXd::Constant(dim, hi));
}

Box Box::point(const Eigen::VectorXd& x) { return Box(x, x); }

double Box::max_width() const {
  return lo_.size() == 0 ? 0.0 : (hi_ - lo_).maxCoeff();
}

bool Box::contains_point(const Eigen::VectorXd& x, double slack) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("Box::contains_point: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lo_[i] - slack || x[i] > hi_[i] + slack) return false;
  }
  return true;
}

Box Box::hull(const Box& other) const {
  if (other.dim() != dim()) {
    throw std::invalid_argument("Box::hull: dimension mismatch");
  }
  return Box(lo_.cwiseMin(other.lo_), hi_.cwiseMax(other.hi_));
}

Box Box::widened(double amount) const {
  return Box(lo_.array() - amount, hi_.array() + amount);
}

Box Box::widened_nonneg(double amount) const {
  Eigen::VectorXd lo = (lo_.array() - amount).cwiseMax(0.0).cwiseMin(lo_.array());
  return Box(lo, hi_.array() + amount);
}

std::pair<Box, Box> Box::bisect(Eigen::Index d, double at) const {
  if (d < 0 || d >= dim()) {
    throw std::invalid_argument("Box::bisect: dimension out of range");
  }
  Eigen::VectorXd mid_hi = hi_;
  Eigen::VectorXd mid_lo = lo_;
  mid_hi[d] = at;
  mid_lo[d] = at;
  return {Box(lo_, mid_hi), Box(mid_lo, hi_)};
}

bool Box::operator==(const Box& other) const {
  return lo_.size() == other.lo_.size() && lo_ == other.lo_ && hi_ == other.hi_;
}

std::string Box::to_string() const {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < dim(); ++i) {
    if (i) os << ", ";
    os << "[" << lo_[i] << ", " << hi_[i] << "]";
  }
  os << "]";
  return os.str();
}

bool box_contains(const Box& outer, const Box& inner, double slack) {
  if (outer.dim() != inner.dim()) {
    throw std::invalid_argument("box_contains: dimension mismatch");
  }
  if (slack < 0.0) {
    throw std::invalid_argument("box_contains: negative slack");
  }
  for (Eigen::Index i = 0; i < outer.dim(); ++i) {
    if (inner.lo()[i] < outer.lo()[i] - slack) return false;
    if (inner.hi()[i] > outer.hi()[i] + slack) return false;
  }
  return true;
}

}  // namespace relucert
