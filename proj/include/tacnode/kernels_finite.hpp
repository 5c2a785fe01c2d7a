#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "tacnode/operator.hpp"
#include "tacnode/scaled_real.hpp"
#include "tacnode/scaling.hpp"

namespace tacnode {

// Largest N accepted by the finite-N routines.
inline constexpr int kMaxFiniteN = 1000;

// values[n] * 2^exponent.
struct ScaledVector {
  Eigen::VectorXd values;
  std::int64_t exponent = 0;

  ScaledReal at(Eigen::Index n) const { return ScaledReal(values[n]).ldexp(exponent); }
  static ScaledVector from(const std::vector<ScaledReal>& v);
};

// Phi_tau^n(u) and Psi_tau^m(u) from their Hermite representations.
// Throws NumericalError when the value leaves the double range.
double phi_fn(const ScalingMap& map, double tau, int n, double u);
double psi_fn(const ScalingMap& map, double tau, int m, double u);

// Normalised families for n = 0..N-1:
//   phi_norm[n] = Phi_tau^n(u) / s_n,  psi_norm[n] = s_n Psi_tau^n(u),
// with s_n = 2^{-n/2} sqrt(n!). With `conjugated`, phi carries the extra
// factor e^{u^2/(8 tau)} and psi the factor e^{-u^2/(8 tau)}.
std::vector<ScaledReal> phi_norm_all(const ScalingMap& map, double tau, double u, bool conjugated = false);
std::vector<ScaledReal> psi_norm_all(const ScalingMap& map, double tau, double u, bool conjugated = false);

// K0 in the similarity-transformed form I = S^{-1} K0 S (S = diag(s_n)),
// which has the same determinant and resolvent structure but entries of
// size at most 1.
class K0Matrix {
 public:
  enum class Route { automatic, residue, gauss_hermite };

  explicit K0Matrix(const ScalingMap& map, Route route = Route::automatic);

  int N() const { return n_; }
  Route route() const { return route_; }

  // Transformed matrix I(n, m) and resolvent G = (1 - I)^{-1}.
  const Eigen::MatrixXd& scaled() const { return scaled_; }
  const Eigen::MatrixXd& resolvent() const { return resolvent_; }

  // K0(n, m) itself; may overflow for large N (then +-inf).
  double entry(int n, int m) const;

  double det() const { return det_; }
  // |det(1 - I) from this route - det from the translated Gauss-Hermite sum|.
  double err_est() const { return err_est_; }
  // Largest compensated-sum error bound among residue entries (0 if unused).
  double cancellation() const { return cancellation_; }

  // Residue closed form, transformed; `abs_err` receives the worst
  // entrywise rounding bound.
  static Eigen::MatrixXd residue_scaled(const ScalingMap& map, double* abs_err = nullptr);
  // I(n, m) = int phi_n(y) phi_m(2 sqrt2 r - y) dy by an exact N-node
  // Gauss-Hermite sum centred at sqrt2 r.
  static Eigen::MatrixXd gauss_hermite_scaled(const ScalingMap& map, int nodes = 0);

 private:
  int n_ = 0;
  Route route_ = Route::residue;
  Eigen::MatrixXd scaled_;
  Eigen::MatrixXd resolvent_;
  double det_ = 1.0;
  double err_est_ = 0.0;
  double cancellation_ = 0.0;
  double r_ = 0.0;
};

// The finite-N extended kernel of the conditioned watermelon.
class FiniteKernel {
 public:
  explicit FiniteKernel(const ScalingMap& map, K0Matrix::Route route = K0Matrix::Route::automatic);

  const ScalingMap& map() const { return map_; }
  const K0Matrix& k0() const { return k0_; }

  // Columns phi_norm / psi_norm at the given points, rescaled by one common
  // power of two per matrix (returned through `exponent`).
  Eigen::MatrixXd phi_matrix(double tau, const std::vector<double>& u, bool conjugated,
                             std::int64_t& exponent) const;
  Eigen::MatrixXd psi_matrix(double tau, const std::vector<double>& u, bool conjugated,
                             std::int64_t& exponent) const;

  // sum_{n,m} Psi_{tau1}^n(u1) (1-K0)^{-1}(n,m) Phi_{tau2}^m(u2).
  double main_part(double tau1, double u1, double tau2, double u2) const;

  // K^ext(tau1,u1; tau2,u2).
  double extended(double tau1, double u1, double tau2, double u2) const;

  // K_ext(t1,x1; t2,x2) in original coordinates.
  double original(double t1, double x1, double t2, double x2) const;

  // Conjugated kernel e^{-u^2/(8 tau1) + v^2/(8 tau2)} K^ext on a node grid.
  Eigen::MatrixXd conjugated_block(double tau1, const std::vector<double>& u, double tau2,
                                   const std::vector<double>& v) const;

 private:
  ScalingMap map_;
  K0Matrix k0_;
};

// T_{tau1,tau2}(u,v) conjugated by e^{-u^2/(8 tau1) + v^2/(8 tau2)}, formed in
// log space. conj_c = 0 disables the conjugation.
double reflected_kernel_conjugated(double tau1, double tau2, double u, double v, double conj_c = 8.0);

// Linear-barrier bridge kernel for a diffusion-coefficient-2 motion on
// [tau1, tau2]: phi_{2D}(v-u)(1 - exp(-(la-u)(lb-v)/D)) for u < la, v < lb.
double linear_barrier_kernel(double tau1, double tau2, double la, double lb, double u, double v,
                             double conj_c = 8.0);

struct BarrierOptions {
  int nodes_per_panel = 16;
  double truncation = 0.0;  // L; 0 picks a default
  double conj_c = 8.0;      // 0 for the plain kernel
};

// T^h_{tau1,tau2} discretised between rule_in (at tau1) and rule_out (at tau2).
DiscretizedOperator barrier_operator(const ScalingMap& map, const ThresholdProfile& profile, double tau1,
                                     double tau2, const QuadratureRule& rule_in, const QuadratureRule& rule_out,
                                     const BarrierOptions& opt = {});

// Applies T^h to the columns of `f` (given at rule_out nodes) and returns
// the result at rule_in nodes. Cheaper than forming the full operator when
// f has few columns.
Eigen::MatrixXd apply_barrier(const ScalingMap& map, const ThresholdProfile& profile, double tau1, double tau2,
                              const QuadratureRule& rule_in, const QuadratureRule& rule_out,
                              const Eigen::MatrixXd& f, const BarrierOptions& opt = {});

// Barrier level (u units) in force at bridge time tau; 0 where h = r.
double barrier_level(const ScalingMap& map, const ThresholdProfile& profile, double tau);

// Default truncation of R_- for functions living at bridge time tau.
double default_truncation(const ScalingMap& map, double tau_max);

// Tilde functions in original coordinates (Phi~_t^n(x), Psi~_t^n(x)).
std::pair<double, double> tilde_functions(const ScalingMap& map, double t, int n, double x);

// Max relative discrepancy of the three conjugation identities between the
// (tau, u) and (t, x) forms, checked at (tau, u) and at a second time.
double conjugation_check(const ScalingMap& map, double tau, int n, double u);

}  // namespace tacnode

namespace tacnode {

// Residuals of the three compatibility relations between Phi, Psi and the
// reflected kernel, in the normalised conjugated form:
//   phi_t:   int_{R_-} Phi_{tau1}^n(u) T(u, v) du   vs Phi_{tau2}^n(v)
//   t_psi:   int_{R_-} T(u, v) Psi_{tau2}^m(v) dv   vs Psi_{tau1}^m(u)
//   phi_psi: int_{R_-} Phi_tau^n Psi_tau^m du      vs (1 - K0)(n, m), tau in {tau1, tau2}
// Each is the largest error relative to the largest right-hand side of the
// same index over the test points.
struct CompatibilityErrors {
  double phi_t = 0.0;
  double t_psi = 0.0;
  double phi_psi = 0.0;
  double worst() const { return std::max({phi_t, t_psi, phi_psi}); }
};

CompatibilityErrors compatibility_check(const ScalingMap& map, double tau1, double tau2,
                                        const std::vector<double>& points = {-0.3, -1.0, -2.5},
                                        int nodes_per_panel = 16);

}  // namespace tacnode
