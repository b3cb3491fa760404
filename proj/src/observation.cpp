#include "fcmdp/observation.hpp"

namespace fcmdp {

Eigen::VectorXd IsObservation::flat() const {
  Eigen::VectorXd out(flat_dim());
  double denom = pose_range > 1 ? pose_range - 1.0 : 1.0;
  Eigen::Index i = 0;
  out.segment(i, view.size()) = view;
  i += view.size();
  out[i++] = pan / denom;
  out[i++] = tilt / denom;
  if (has_base) {
    out[i++] = base_x / denom;
    out[i++] = base_y / denom;
  }
  if (ir_summary.size() > 0) {
    out.segment(i, ir_summary.size()) = ir_summary;
    i += ir_summary.size();
  }
  return out;
}

int IsObservation::flat_dim() const {
  return static_cast<int>(view.size() + 2 + (has_base ? 2 : 0) + ir_summary.size());
}

Eigen::VectorXd IrObservation::flat() const {
  Eigen::VectorXd out(flat_dim());
  out << workspace, proprio;
  return out;
}

}  // namespace fcmdp
