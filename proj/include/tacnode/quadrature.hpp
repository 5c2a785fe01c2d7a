#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tacnode {

// Nodes and positive weights on [a, b]. Semi-axis integrals are truncated to
// a finite interval before a rule is built, so every rule here is finite.
struct QuadratureRule {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  bool empty() const { return nodes.empty(); }
  double weight_sum() const;

  // Composition of operators requires the inner rules to agree exactly.
  bool same_as(const QuadratureRule& o) const;

  // Concatenate rules on adjacent intervals (this one to the left).
  QuadratureRule joined(const QuadratureRule& right) const;
};

// m-node Gauss-Legendre rule on [a, b]. Nodes are the eigenvalues of the
// Jacobi matrix of the Legendre recurrence, polished by Newton on P_m;
// weights follow from 2 / ((1 - x^2) P_m'(x)^2).
QuadratureRule gauss_legendre(double a, double b, int m);

// Gauss-Legendre with m nodes on every panel [breaks[i], breaks[i+1]].
QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int m);

// Panels on [a, b] no longer than max_panel, with an exact break at every
// point of `cuts` falling inside (a, b).
QuadratureRule panel_rule(double a, double b, int m, double max_panel,
                          const std::vector<double>& cuts = {});

// Gauss-Hermite rule for the weight e^{-z^2}. `weights` holds the scaled
// weights w_k e^{z_k^2} = 1 / sum_{j<M} phi_j(z_k)^2, so that
//   int f(z) dz ~ sum_k W_k f(z_k)
// for f = polynomial times e^{-z^2}, without underflow for large M.
QuadratureRule gauss_hermite_scaled(int m);

}  // namespace tacnode
