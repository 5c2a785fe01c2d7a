#pragma once

namespace tacnode {

// Tracy-Widom distribution functions from the Hastings-McLeod solution of
// Painleve II, q'' = s q + 2 q^3 with q(s) ~ Ai(s) as s -> +inf, integrated
// backwards from s = 12:
//   F_GUE(s) = exp(-int_s^inf (x - s) q(x)^2 dx)
//   F_GOE(s) = exp(-(1/2) int_s^inf q(x) dx) F_GUE(s)^{1/2}.
// Independent of the Airy and quadrature code used by the Fredholm routes.
double tracy_widom_gue(double s);
double tracy_widom_goe(double s);

}  // namespace tacnode
