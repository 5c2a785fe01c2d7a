#include "tacnode/operator.hpp"

#include <cmath>

#include "tacnode/error.hpp"

namespace tacnode {

Eigen::VectorXd weight_vector(const QuadratureRule& q) {
  return Eigen::Map<const Eigen::VectorXd>(q.weights.data(), static_cast<Eigen::Index>(q.size()));
}

DiscretizedOperator compose(const DiscretizedOperator& a, const DiscretizedOperator& b) {
  require(a.col_rule.same_as(b.row_rule), "compose: inner quadrature rules differ");
  DiscretizedOperator c;
  c.matrix = a.matrix * weight_vector(a.col_rule).asDiagonal() * b.matrix;
  c.row_rule = a.row_rule;
  c.col_rule = b.col_rule;
  c.label = a.label + " * " + b.label;
  return c;
}

double det_identity_minus(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "det_identity_minus: matrix must be square");
  if (m.rows() == 0) return 1.0;
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m.rows(), m.cols()) - m;
  return a.fullPivLu().determinant();
}

double nystrom_det(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& weights) {
  require(kernel.rows() == kernel.cols() && kernel.rows() == weights.size(),
          "nystrom_det: kernel and weights disagree in size");
  const Eigen::VectorXd s = weights.cwiseSqrt();
  return det_identity_minus(s.asDiagonal() * kernel * s.asDiagonal());
}

double nystrom_det(const DiscretizedOperator& op) {
  require(op.square(), "nystrom_det: operator must act on one rule");
  return nystrom_det(op.matrix, weight_vector(op.row_rule));
}

}  // namespace tacnode
