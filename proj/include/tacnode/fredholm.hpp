#pragma once

#include <string>
#include <vector>

#include "tacnode/kernels_finite.hpp"
#include "tacnode/scaling.hpp"

namespace tacnode {

struct DetResult {
  double value = 1.0;
  double err_est = 0.0;
  std::string method;
};

struct FredholmOptions {
  int nodes_per_panel = 16;
  double panel_width = 0.0;  // 0: chosen from N and tau
  double truncation = 0.0;   // L for R_- integrals; 0: default_truncation
  bool estimate_error = true;
};

struct Slice {
  double tau;
  double eta;  // window is [eta, 0]
};

// Strictly increasing times with non-positive levels. Equal times must be
// merged (keeping the smaller eta) before construction.
struct TimeSlices {
  std::vector<Slice> slices;

  void validate() const;
  static TimeSlices from_constraints(const ScalingMap& map, const std::vector<PointConstraint>& pts);
};

// P(B_N < r on [0,1]) = det(1 - K0), exact N x N determinant.
DetResult stay_below_constant(const ScalingMap& map);
DetResult stay_below_constant(const K0Matrix& k0);

// det(1 - Q K^ext) on the union of windows [eta_i, 0] at times tau_i.
DetResult gap_probability_multipoint(const FiniteKernel& kernel, const TimeSlices& slices,
                                     const FredholmOptions& opt = {});

// det(1 - K_{tau1} + T^h K_{tau2,tau1}) on L^2(R_-), with tau1 / tau2 the
// first / last constrained time of the profile.
DetResult conditional_stay_below(const FiniteKernel& kernel, const ThresholdProfile& profile,
                                 const FredholmOptions& opt = {});

// Same probability through the N x N ratio det(1 - K_N^h) / det(1 - K0).
DetResult conditional_stay_below_reduced(const FiniteKernel& kernel, const ThresholdProfile& profile,
                                         const FredholmOptions& opt = {});

// |gap(t_i, h_i) - gap(1 - t_i, h_i)| for a point-constraint profile.
double time_reversal_check(const FiniteKernel& kernel, const ThresholdProfile& profile,
                           const FredholmOptions& opt = {});

}  // namespace tacnode
