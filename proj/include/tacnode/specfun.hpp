#pragma once

#include <vector>

#include "tacnode/scaled_real.hpp"

namespace tacnode {

/// Harmonic oscillator function
///   phi_n(x) = pi^{-1/4} 2^{-n/2} (n!)^{-1/2} e^{-x^2/2} H_n(x),
/// evaluated by the three-term recurrence on phi_n itself, with a running
/// binary exponent so that neither e^{-x^2/2} nor H_n(x) is ever formed.
double harmonic_oscillator(int n, double x);
ScaledReal harmonic_oscillator_scaled(int n, double x);

/// phi_0(x), ..., phi_{count-1}(x) in one recurrence sweep.
std::vector<ScaledReal> harmonic_oscillator_all(int count, double x);

/// Physicists' Hermite polynomial H_n(x).
ScaledReal hermite_poly(int n, double x);

/// Ai(x). Relative accuracy 1e-12 on [-20, 40] away from the zeros.
double airy_ai(double x);
double airy_ai_prime(double x);

struct AiryValue {
  double ai = 0.0;       // Ai(x) / e^{-zeta} when scaled, Ai(x) otherwise
  double ai_prime = 0.0;
  double log_scale = 0.0;  // -zeta = -(2/3) x^{3/2} for scaled values, else 0
  bool in_range = true;    // false outside [-20, 40]: best effort only
};

/// Ai and Ai' with the e^{-(2/3)x^{3/2}} factor split off for large x, so
/// that products with growing exponentials can be formed in log space.
AiryValue airy_ai_scaled(double x);

/// Below this point Ai is evaluated from Taylor data carried from 0 or from
/// the asymptotic anchor; above it (and below -kAiryAsymptotic) the
/// asymptotic expansions are used directly.
inline constexpr double kAiryAsymptotic = 9.0;

/// Ai^{(s)}(x) = e^{2s^3/3 + xs} Ai(s^2 + x). Throws NumericalError if the
/// combined log-magnitude leaves the double range.
double airy_shifted(double s, double x);
ScaledReal airy_shifted_scaled(double s, double x);

/// Gaussian heat kernel (2 pi t)^{-1/2} exp(-x^2 / (2t)).
double heat_kernel(double t, double x);

/// Heat kernel killed at 0 for a diffusion-coefficient-2 Brownian motion:
///   T_{tau1,tau2}(u,v) = phi_{2(tau2-tau1)}(v-u) - phi_{2(tau2-tau1)}(v+u).
double reflected_kernel(double tau1, double tau2, double u, double v);

}  // namespace tacnode
