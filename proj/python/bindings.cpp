#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tacnode/error.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/kernels_finite.hpp"
#include "tacnode/kernels_limit.hpp"
#include "tacnode/sampler.hpp"
#include "tacnode/specfun.hpp"
#include "tacnode/tracy_widom.hpp"
#include "tacnode/verify.hpp"
#include "tacnode/version.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace tacnode;

namespace {

ScalingMap make_map(int N, std::optional<double> r, std::optional<double> R) {
  require(r.has_value() != R.has_value(), "give exactly one of r or R");
  return R ? ScalingMap::tacnode(N, *R) : ScalingMap(N, *r);
}

py::dict det_dict(const DetResult& d) { return py::dict("value"_a = d.value, "err_est"_a = d.err_est, "method"_a = d.method); }

py::dict est_dict(const EstimateWithCI& e) {
  return py::dict("value"_a = e.value, "std_error"_a = e.std_error, "replicas"_a = e.replicas, "accepted"_a = e.accepted,
                  "method"_a = e.method, "seed"_a = e.seed);
}

ThresholdProfile make_profile(double r, const std::optional<std::vector<std::pair<double, double>>>& points,
                              const std::optional<std::vector<std::tuple<double, double, double>>>& segments) {
  require(points.has_value() != segments.has_value(), "give exactly one of points or segments");
  if (points) {
    std::vector<PointConstraint> p;
    for (auto [t, h] : *points) p.push_back({t, h});
    return ThresholdProfile::point_constraints(r, p);
  }
  std::vector<Segment> s;
  for (auto [a, b, h] : *segments) s.push_back({a, b, h});
  return ThresholdProfile::piecewise(r, s);
}

SamplerConfig make_config(int N, double r, long replicas, std::uint64_t seed, int grid, bool correction, int threads) {
  SamplerConfig c;
  c.N = N;
  c.r = r;
  c.replicas = replicas;
  c.seed = seed;
  c.grid_points = grid;
  c.crossing_correction = correction;
  c.threads = threads;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite-N and hard-edge tacnode kernels, Fredholm determinants and an exact sampler";
  m.attr("__version__") = kVersion;

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("harmonic_oscillator", &harmonic_oscillator, "n"_a, "x"_a);
  m.def("hermite_poly", [](int n, double x) {
    const ScaledReal h = hermite_poly(n, x);
    return std::make_pair(h.mantissa(), h.exponent());
  }, "n"_a, "x"_a, "H_n(x) as (mantissa, exponent) with value mantissa * 2**exponent");
  m.def("airy_ai", &airy_ai, "x"_a);
  m.def("airy_shifted", &airy_shifted, "s"_a, "x"_a);
  m.def("heat_kernel", &heat_kernel, "t"_a, "x"_a);
  m.def("reflected_kernel", &reflected_kernel, "tau1"_a, "tau2"_a, "u"_a, "v"_a);
  m.def("tracy_widom_gue", &tracy_widom_gue, "s"_a);
  m.def("tracy_widom_goe", &tracy_widom_goe, "s"_a);

  py::class_<FiniteKernel>(m, "FiniteKernel")
      .def(py::init([](int N, std::optional<double> r, std::optional<double> R) { return FiniteKernel(make_map(N, r, R)); }),
           "N"_a, py::kw_only(), "r"_a = py::none(), "R"_a = py::none())
      .def_property_readonly("N", [](const FiniteKernel& k) { return k.map().N; })
      .def_property_readonly("r", [](const FiniteKernel& k) { return k.map().r; })
      .def("k0", [](const FiniteKernel& k) {
        Eigen::MatrixXd out(k.k0().N(), k.k0().N());
        for (int i = 0; i < k.k0().N(); ++i)
          for (int j = 0; j < k.k0().N(); ++j) out(i, j) = k.k0().entry(i, j);
        return out;
      })
      .def("extended", &FiniteKernel::extended, "tau1"_a, "u1"_a, "tau2"_a, "u2"_a)
      .def("original", &FiniteKernel::original, "t1"_a, "x1"_a, "t2"_a, "x2"_a);

  m.def("stay_below", [](int N, std::optional<double> r, std::optional<double> R) { return det_dict(stay_below_constant(make_map(N, r, R))); },
        "N"_a, py::kw_only(), "r"_a = py::none(), "R"_a = py::none());
  m.def("conditional_stay_below",
        [](int N, double r, std::optional<std::vector<std::pair<double, double>>> points,
           std::optional<std::vector<std::tuple<double, double, double>>> segments, const std::string& route) {
          require(route == "path" || route == "reduced", "route must be 'path' or 'reduced'");
          const FiniteKernel k(ScalingMap(N, r));
          const ThresholdProfile p = make_profile(r, points, segments);
          return det_dict(route == "path" ? conditional_stay_below(k, p) : conditional_stay_below_reduced(k, p));
        },
        "N"_a, "r"_a, py::kw_only(), "points"_a = py::none(), "segments"_a = py::none(), "route"_a = "path");
  m.def("gap_probability_multipoint",
        [](int N, double r, const std::vector<std::pair<double, double>>& slices) {
          std::vector<PointConstraint> p;
          for (auto [t, h] : slices) p.push_back({t, h});
          const ScalingMap map(N, r);
          return det_dict(gap_probability_multipoint(FiniteKernel(map), TimeSlices::from_constraints(map, p)));
        },
        "N"_a, "r"_a, "slices"_a);

  py::class_<LimitKernel>(m, "LimitKernel")
      .def(py::init([](double R, int nodes) { return LimitKernel({R, nodes}); }), "R"_a, "nodes"_a = 120)
      .def_property_readonly("R", &LimitKernel::R)
      .def_property_readonly("Lambda", &LimitKernel::Lambda)
      .def("det_k0", &LimitKernel::det_k0)
      .def("extended", &LimitKernel::extended, "T1"_a, "U1"_a, "T2"_a, "U2"_a)
      .def("rank_one", [](const LimitKernel& k, double T1, double U1, double T2, double U2) {
        const RankOne r = k.rank_one(T1, U1, T2, U2);
        return std::make_pair(r.f, r.g);
      }, "T1"_a, "U1"_a, "T2"_a, "U2"_a, "(f(T1,U1), g(T2,U2)) with dK/dR = -f g");

  m.def("extended_airy_kernel", &extended_airy_kernel, "T1"_a, "U1"_a, "T2"_a, "U2"_a);
  m.def("airy_gap", [](double s) { return det_dict(airy_gap(s)); }, "s"_a);
  m.def("limit_gap_probability",
        [](double R, const std::vector<std::pair<double, double>>& slices) {
          LimitSlices sl;
          for (auto [T, a] : slices) sl.slices.push_back({T, a});
          return det_dict(limit_gap_probability(LimitKernel({R}), sl));
        },
        "R"_a, "slices"_a);
  m.def("functional_limit_det",
        [](double R, double T1, double T2, const std::vector<std::tuple<double, double, double>>& segments) {
          std::vector<HSegment> h;
          for (auto [a, b, H] : segments) h.push_back({a, b, H});
          return det_dict(functional_limit_det(LimitKernel({R}), T1, T2, h));
        },
        "R"_a, "T1"_a, "T2"_a, "segments"_a);
  m.def("airy2_stay_below",
        [](double T1, double T2, const std::vector<std::tuple<double, double, double>>& segments) {
          std::vector<HSegment> h;
          for (auto [a, b, H] : segments) h.push_back({a, b, H});
          return det_dict(airy2_stay_below(T1, T2, h));
        },
        "T1"_a, "T2"_a, "segments"_a);

  m.def("estimate_stay_below",
        [](int N, double r, long replicas, std::uint64_t seed, int grid, bool correction, int threads) {
          const SamplerConfig c = make_config(N, r, replicas, seed, grid, correction, threads);
          EstimateWithCI e;
          {
            py::gil_scoped_release nogil;
            e = estimate_stay_below(c);
          }
          return est_dict(e);
        },
        "N"_a, "r"_a, py::kw_only(), "replicas"_a = 10000, "seed"_a = 1, "grid"_a = 256, "crossing_correction"_a = true,
        "threads"_a = 0);
  m.def("estimate_conditional",
        [](int N, double r, std::optional<std::vector<std::pair<double, double>>> points,
           std::optional<std::vector<std::tuple<double, double, double>>> segments, long replicas, std::uint64_t seed,
           int grid, int threads) {
          const SamplerConfig c = make_config(N, r, replicas, seed, grid, true, threads);
          const ThresholdProfile p = make_profile(r, points, segments);
          EstimateWithCI e;
          {
            py::gil_scoped_release nogil;
            e = estimate_conditional(c, p);
          }
          return est_dict(e);
        },
        "N"_a, "r"_a, py::kw_only(), "points"_a = py::none(), "segments"_a = py::none(), "replicas"_a = 10000,
        "seed"_a = 1, "grid"_a = 256, "threads"_a = 0);
  m.def("sample_watermelon",
        [](int N, double r, long replicas, std::uint64_t seed, int grid, int threads) {
          const SamplerConfig c = make_config(N, r, replicas, seed, grid, true, threads);
          PathEnsemble e;
          {
            py::gil_scoped_release nogil;
            e = sample_watermelon(c);
          }
          const auto n = static_cast<Eigen::Index>(e.accepted.size());
          const auto m = static_cast<Eigen::Index>(e.times.size());
          Eigen::MatrixXd top = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(e.top.data(), n, m);
          std::vector<bool> acc(e.accepted.begin(), e.accepted.end());
          return py::dict("times"_a = e.times, "top"_a = top, "accepted"_a = acc, "weight"_a = e.weight);
        },
        "N"_a, "r"_a, py::kw_only(), "replicas"_a = 1000, "seed"_a = 1, "grid"_a = 64, "threads"_a = 0);

  m.def("verify", [](const std::string& suite, long replicas, std::uint64_t seed) {
    VerifyOptions o;
    o.replicas = replicas;
    o.seed = seed;
    py::list out;
    std::vector<Check> checks;
    {
      py::gil_scoped_release nogil;
      checks = run_verify(suite, o);
    }
    for (const auto& c : checks)
      out.append(py::dict("suite"_a = c.suite, "check"_a = c.name, "measured"_a = c.measured, "tolerance"_a = c.tolerance,
                          "passed"_a = c.pass));
    return out;
  }, "suite"_a, "replicas"_a = 100000, "seed"_a = 2024);
}
