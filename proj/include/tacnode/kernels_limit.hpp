#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tacnode/fredholm.hpp"
#include "tacnode/quadrature.hpp"

namespace tacnode {

struct LimitParams {
  double R = 0.0;
  int nodes = 120;      // Gauss-Legendre nodes for the resolvent on [0, Lambda]
  double Lambda = 0.0;  // 0: max(20, 20 - 2R)
};

// Phi^_T^xi(U) = Ai^(T)(R+xi+U) - Ai^(T)(R+xi-U); Psi^ uses Ai^(-T).
double phi_hat(double R, double T, double xi, double U);
double psi_hat(double R, double T, double zeta, double U);

// Shifted GOE kernel 2^{-1/3} Ai(2^{-1/3}(2R + xi + zeta)).
double k0_hat(double R, double xi, double zeta);

struct RankOne {
  double f = 0.0;
  double g = 0.0;
  double product = 0.0;
};

// Limiting (hard-edge tacnode) kernel with the resolvent of K^_0 on a fixed
// truncated rule. Immutable after construction.
class LimitKernel {
 public:
  explicit LimitKernel(const LimitParams& params);

  double R() const { return params_.R; }
  double Lambda() const { return params_.Lambda; }
  const QuadratureRule& xi_rule() const { return rule_; }

  // det(1 - K^_0) on R_+.
  double det_k0() const { return det_; }

  // int int Psi^_{T1}(U1) (1 - K^_0)^{-1} Phi^_{T2}(U2).
  double main_part(double T1, double U1, double T2, double U2) const;
  double extended(double T1, double U1, double T2, double U2) const;
  RankOne rank_one(double T1, double U1, double T2, double U2) const;

  // K^ext(T1, u_i; T2, v_j) on a grid.
  Eigen::MatrixXd block(double T1, const std::vector<double>& u, double T2, const std::vector<double>& v) const;

  // Main part on a grid, conjugated by e^{c1 u_i - c2 v_j}.
  Eigen::MatrixXd main_block(double T1, const std::vector<double>& u, double T2, const std::vector<double>& v,
                             double c1 = 0.0, double c2 = 0.0) const;

  // The resolvent-minus-identity part in symmetric weighted form:
  // W^{1/2}((I - W^{1/2} K W^{1/2})^{-1} - I) W^{1/2}.
  const Eigen::MatrixXd& correction() const { return correction_; }

  // Range of xi needed so that Psi^ Phi^ products are negligible for
  // arguments down to U_min.
  double identity_extent(double T1, double T2, double u_min) const;

 private:
  LimitParams params_;
  QuadratureRule rule_;
  Eigen::MatrixXd k_;
  Eigen::MatrixXd correction_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double det_ = 1.0;
};

// Extended Airy kernel in the conjugated form obtained as the R -> infinity
// limit of K^ext(T1,U1-R; T2,U2-R) e^{2(T1^3-T2^3)/3 + T1 U1 - T2 U2}:
//   -1_{T1<T2} phi_{2(T2-T1)}(U1-U2) e^{2(T1^3-T2^3)/3 + T1 U1 - T2 U2}
//   + int_0^inf e^{xi (T2-T1)} Ai(xi+U1+T1^2) Ai(xi+U2+T2^2) dxi.
double extended_airy_kernel(double T1, double U1, double T2, double U2);

// det(1 - K_Ai) on L^2([s, inf)) at one time, from extended_airy_kernel.
DetResult airy_gap(double s, int nodes = 80);

struct LimitSlice {
  double T;
  double a;  // window [a, 0], a <= 0
};

struct LimitSlices {
  std::vector<LimitSlice> slices;
  void validate() const;
};

DetResult limit_gap_probability(const LimitKernel& kernel, const LimitSlices& slices, const FredholmOptions& opt = {});

// Constant level H on [T_start, T_end] (tacnode scale, H <= R).
struct HSegment {
  double T_start;
  double T_end;
  double H;
};

// det(1 - K_{T1} + T^{H-R}_{T1,T2} K_{T2,T1}) on L^2(R_-). Segments must lie
// inside [T1, T2]; elsewhere H = R.
DetResult functional_limit_det(const LimitKernel& kernel, double T1, double T2, const std::vector<HSegment>& h,
                               const FredholmOptions& opt = {});

// P(A_2(T) - T^2 <= H(T) on [T1, T2]) from the extended Airy kernel by the
// same formula; segments must cover [T1, T2].
DetResult airy2_stay_below(double T1, double T2, const std::vector<HSegment>& h, const FredholmOptions& opt = {});

}  // namespace tacnode
