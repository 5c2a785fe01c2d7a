#include "tacnode/verify.hpp"

#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <functional>

#include "tacnode/error.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/kernels_finite.hpp"
#include "tacnode/kernels_limit.hpp"
#include "tacnode/quadrature.hpp"
#include "tacnode/sampler.hpp"
#include "tacnode/specfun.hpp"
#include "tacnode/tracy_widom.hpp"

namespace tacnode {

namespace {

struct Suite {
  std::string name;
  std::vector<Check> checks;

  void add(const std::string& what, double measured, double tol) {
    checks.push_back({name, what, measured, tol, std::isfinite(measured) && measured <= tol});
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void specfun_suite(Suite& s) {
  double worst = 0.0;
  for (double x = -15.0; x <= 30.0; x += 0.37) {
    const double ref = boost::math::airy_ai(x);
    const double refp = boost::math::airy_ai_prime(x);
    // relative to the local envelope, so points near zeros do not dominate
    const double env = std::max(std::fabs(ref), std::hypot(ref, refp / std::max(1.0, std::sqrt(std::fabs(x)))));
    worst = std::max(worst, std::fabs(airy_ai(x) - ref) / env);
  }
  s.add("airy_ai vs boost on [-15, 30]", worst, 1e-11);

  const QuadratureRule gh = gauss_hermite_scaled(60);
  double ortho = 0.0;
  for (int n = 0; n < 30; ++n)
    for (int m = 0; m <= n; ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < gh.size(); ++k)
        acc += gh.weights[k] * harmonic_oscillator(n, gh.nodes[k]) * harmonic_oscillator(m, gh.nodes[k]);
      ortho = std::max(ortho, std::fabs(acc - (n == m ? 1.0 : 0.0)));
    }
  s.add("harmonic oscillator orthonormality n < 30", ortho, 1e-12);

  double herm = 0.0;
  for (int n : {0, 1, 5, 20, 60})
    for (double x : {-3.0, -0.4, 0.9, 4.5}) {
      const double lognorm = -0.25 * std::log(std::numbers::pi) - 0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0)) - 0.5 * x * x;
      const ScaledReal ref = hermite_poly(n, x) * ScaledReal::exp(lognorm);
      const double v = harmonic_oscillator(n, x);
      const double r = ref.to_double();
      herm = std::max(herm, std::fabs(v - r) / std::max(std::fabs(r), 1e-300));
    }
  s.add("phi_n vs Hermite polynomial form", herm, 1e-10);

  const QuadratureRule gl = gauss_legendre(-1.0, 1.0, 20);
  double poly = 0.0;
  for (int k = 0; k < 20; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < gl.size(); ++i) acc += gl.weights[i] * std::pow(gl.nodes[i], 2 * k);
    poly = std::max(poly, std::fabs(acc - 2.0 / (2.0 * k + 1.0)));
  }
  s.add("Gauss-Legendre exact to degree 38", poly, 1e-13);

  s.add("reflected kernel vanishes at u = 0", std::fabs(reflected_kernel(0.2, 0.7, 0.0, -1.3)), 1e-16);
}

void compatibility_suite(Suite& s) {
  const double taus[] = {0.125, 0.25, 0.5, 1.0};
  for (int N = 1; N <= 8; ++N) {
    double worst = 0.0;
    for (double r : {1.0, 2.5})
      for (int i = 0; i < 3; ++i) worst = std::max(worst, compatibility_check(ScalingMap(N, r), taus[i], taus[i + 1]).worst());
    s.add("PhiT / TPsi / PhiPsi, N = " + std::to_string(N), worst, 1e-8);
  }
}

void conjugation_suite(Suite& s) {
  for (int N : {1, 3, 6, 12}) {
    double worst = 0.0;
    for (double tau : {0.25, 1.0})
      for (double u : {-0.5, -2.0})
        for (int n = 0; n < N; ++n) worst = std::max(worst, conjugation_check(ScalingMap(N, 1.0 + 0.3 * N), tau, n, u));
    s.add("tilde vs conjugated forms, N = " + std::to_string(N), worst, 1e-10);
  }
}

void equivalence_suite(Suite& s) {
  double closed = 0.0;
  for (double r : {0.5, 1.0, 2.0}) closed = std::max(closed, std::fabs(stay_below_constant(ScalingMap(1, r)).value - (1.0 - std::exp(-2.0 * r * r))));
  s.add("N = 1 closed form 1 - exp(-2 r^2)", closed, 1e-10);

  double dual = 0.0;
  for (int N : {1, 2, 5, 10, 20})
    for (double r : {0.5, 1.5, 3.0, 4.5, 6.0}) dual = std::max(dual, k0_dual_route_error(N, r));
  s.add("K0 residue vs Gauss-Hermite, N <= 20", dual, 1e-9);

  const std::vector<std::vector<PointConstraint>> cases{
      {{0.4, 1.1}}, {{0.25, 1.3}, {0.6, 0.9}}, {{0.2, 1.4}, {0.5, 1.0}, {0.8, 1.2}}};
  for (int N : {1, 2, 3}) {
    const FiniteKernel kernel(ScalingMap(N, 2.0));
    double route = 0.0, rev = 0.0;
    for (const auto& pts : cases) {
      const ThresholdProfile p = ThresholdProfile::point_constraints(2.0, pts);
      const double a = conditional_stay_below(kernel, p).value;
      const double b = gap_probability_multipoint(kernel, TimeSlices::from_constraints(kernel.map(), pts)).value;
      const double c = conditional_stay_below_reduced(kernel, p).value;
      route = std::max({route, std::fabs(a - b), std::fabs(a - c)});
      rev = std::max(rev, time_reversal_check(kernel, p));
    }
    s.add("path integral vs extended kernel, N = " + std::to_string(N), route, 1e-6);
    s.add("time reversal, N = " + std::to_string(N), rev, 1e-6);
  }
}

void limits_suite(Suite& s) {
  for (double R : {-1.0, 0.0, 1.0, 2.0}) {
    const LimitKernel k({R});
    s.add("det(1 - K0^) vs F_GOE, R = " + fmt("%g", R), std::fabs(k.det_k0() - tracy_widom_goe(std::cbrt(4.0) * R)), 1e-8);
  }
  for (double x : {-3.0, -1.0, 1.0}) s.add("Airy gap vs F_GUE, s = " + fmt("%g", x), std::fabs(airy_gap(x).value - tracy_widom_gue(x)), 1e-8);
  for (double R : {0.0, 1.0}) s.add("rank-one derivative, R = " + fmt("%g", R), rank_one_defect(R), 1e-5);
  const double a8 = airy_limit_gap(8.0), a4 = airy_limit_gap(4.0);
  s.add("extended Airy limit at R = 8", a8, 1e-4);
  s.add("Airy discrepancy shrinks from R = 4 to 8", a8 < a4 ? 0.0 : 1.0, 0.0);
  double prev = HUGE_VAL;
  bool mono = true;
  for (int N : {50, 100, 200, 400}) {
    const double e = finite_n_kernel_error(N, 0.5);
    mono = mono && e < prev;
    prev = e;
  }
  s.add("finite-N kernel error decreasing over N = 50..400", mono ? 0.0 : 1.0, 0.0);
  const LimitKernel k({1.0});
  s.add("boundary vanishing", std::max(std::fabs(k.extended(0.3, 0.0, 0.8, -1.0)), std::fabs(k.extended(0.3, -1.0, 0.8, 0.0))), 1e-14);
}

void montecarlo_suite(Suite& s, const VerifyOptions& opt) {
  for (auto [N, r] : {std::pair{2, 2.0}, {3, 2.5}, {5, 3.0}}) {
    SamplerConfig c;
    c.N = N;
    c.r = r;
    c.grid_points = 512;
    c.replicas = opt.replicas;
    c.seed = opt.seed;
    c.threads = opt.threads;
    const EstimateWithCI e = estimate_stay_below(c);
    const double d = stay_below_constant(ScalingMap(N, r)).value;
    s.add("|z| stay below, N = " + std::to_string(N) + ", r = " + fmt("%g", r), std::fabs(e.value - d) / std::max(e.std_error, 1e-12), 3.0);
  }
  SamplerConfig c;
  c.N = 3;
  c.r = 2.0;
  c.grid_points = 256;
  c.replicas = opt.replicas;
  c.seed = opt.seed + 1;
  c.threads = opt.threads;
  const std::vector<PointConstraint> pts{{0.5, 1.0}};
  const EstimateWithCI e = estimate_conditional(c, ThresholdProfile::point_constraints(2.0, pts));
  const FiniteKernel kernel(ScalingMap(3, 2.0));
  const double d = gap_probability_multipoint(kernel, TimeSlices::from_constraints(kernel.map(), pts)).value;
  s.add("|z| one-slice gap, N = 3", std::fabs(e.value - d) / std::max(e.std_error, 1e-12), 3.0);
}

}  // namespace

double k0_dual_route_error(int N, double r) {
  const ScalingMap map(N, r);
  const Eigen::MatrixXd a = K0Matrix::residue_scaled(map);
  const Eigen::MatrixXd b = K0Matrix::gauss_hermite_scaled(map);
  double worst = 0.0;
  for (int n = 0; n < N; ++n) {
    double scale = 0.0;
    for (int m = 0; m < N; ++m) scale = std::max(scale, std::fabs((n == m ? 1.0 : 0.0) - b(n, m)));
    for (int m = 0; m < N; ++m) worst = std::max(worst, std::fabs(a(n, m) - b(n, m)) / scale);
  }
  return worst;
}

double rank_one_defect(double R, double h) {
  const LimitKernel k({R});
  const LimitKernel kp({R + h, 120, k.Lambda()});
  const LimitKernel km({R - h, 120, k.Lambda()});
  double worst = 0.0;
  for (double T1 : {-0.5, 0.0, 0.5})
    for (double U1 : {-0.4, -1.2, -2.5}) {
      const double T2 = 0.25, U2 = -0.8;
      const double fd = (kp.extended(T1, U1, T2, U2) - km.extended(T1, U1, T2, U2)) / (2.0 * h);
      worst = std::max(worst, std::fabs(fd + k.rank_one(T1, U1, T2, U2).product));
    }
  return worst;
}

double airy_limit_gap(double R) {
  const LimitKernel k({R});
  const double pts[4][4] = {{-0.5, -1.0, 0.3, -0.5}, {0.0, 0.5, 0.0, -0.2}, {0.4, -0.3, -0.2, 0.8}, {-0.3, 1.0, 0.6, 0.0}};
  double worst = 0.0;
  for (const auto& p : pts) {
    const double T1 = p[0], U1 = p[1], T2 = p[2], U2 = p[3];
    const double c = std::exp(2.0 * (T1 * T1 * T1 - T2 * T2 * T2) / 3.0 + T1 * U1 - T2 * U2);
    worst = std::max(worst, std::fabs(k.extended(T1, U1 - R, T2, U2 - R) * c - extended_airy_kernel(T1, U1, T2, U2)));
  }
  return worst;
}

double finite_n_kernel_error(int N, double R) {
  const LimitKernel lk({R});
  const ScalingMap m = ScalingMap::tacnode(N, R);
  const FiniteKernel fk(m);
  const double scale = 0.5 * std::pow(static_cast<double>(N), -1.0 / 6.0);
  double worst = 0.0;
  for (double T1 : {-0.5, 0.5})
    for (double T2 : {-0.5, 0.5})
      for (double U1 : {-0.5, -2.0})
        for (double U2 : {-1.0, -2.5}) {
          const double a = scale * fk.original(m.t_of_T(T1), m.x_of_U(U1), m.t_of_T(T2), m.x_of_U(U2));
          worst = std::max(worst, std::fabs(a - lk.extended(T1, U1, T2, U2)));
        }
  return worst;
}

std::vector<Check> run_verify(const std::string& suite, const VerifyOptions& opt) {
  const auto& names = verify_suites();
  const bool all = suite == "all";
  if (!all && std::find(names.begin(), names.end(), suite) == names.end())
    throw DomainError("unknown verification suite '" + suite + "'");
  std::vector<Check> out;
  for (const auto& n : names) {
    if (!all && n != suite) continue;
    Suite s{n, {}};
    if (n == "specfun") specfun_suite(s);
    if (n == "compatibility") compatibility_suite(s);
    if (n == "conjugation") conjugation_suite(s);
    if (n == "equivalence") equivalence_suite(s);
    if (n == "limits") limits_suite(s);
    if (n == "montecarlo") montecarlo_suite(s, opt);
    out.insert(out.end(), s.checks.begin(), s.checks.end());
  }
  return out;
}

}  // namespace tacnode
