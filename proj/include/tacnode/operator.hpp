#pragma once

#include <Eigen/Dense>
#include <string>

#include "tacnode/quadrature.hpp"

namespace tacnode {

// Kernel values K(x_i, y_j) on the nodes of a row and a column rule. The
// quadrature weights are not folded in; they are applied when operators are
// composed or a determinant is taken.
struct DiscretizedOperator {
  Eigen::MatrixXd matrix;
  QuadratureRule row_rule;
  QuadratureRule col_rule;
  std::string label;

  bool square() const { return row_rule.same_as(col_rule); }
};

// (A B)(x, z) = sum_k A(x, y_k) w_k B(y_k, z). Requires A.col_rule == B.row_rule.
DiscretizedOperator compose(const DiscretizedOperator& a, const DiscretizedOperator& b);

// det(I - W^{1/2} K W^{1/2}) with full-pivot LU.
double nystrom_det(const DiscretizedOperator& op);
double nystrom_det(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& weights);

// det(I - M) for a plain square matrix, full-pivot LU.
double det_identity_minus(const Eigen::MatrixXd& m);

Eigen::VectorXd weight_vector(const QuadratureRule& q);

}  // namespace tacnode
