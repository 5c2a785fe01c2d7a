#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/oracles.hpp"
#include "tacnode/error.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/sampler.hpp"

using namespace tacnode;

namespace {

SamplerConfig config(int N, double r, long replicas, int grid = 128, std::uint64_t seed = 11) {
  SamplerConfig c;
  c.N = N;
  c.r = r;
  c.replicas = replicas;
  c.grid_points = grid;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("validation") {
  CHECK_THROWS_AS(config(1, 1.0, 10, 0).validate(), DomainError);
  CHECK_THROWS_AS(config(0, 1.0, 10).validate(), DomainError);
  CHECK_THROWS_AS(config(1, 1.0, 0).validate(), DomainError);
  SamplerConfig c = config(1, 1.0, 10);
  c.grid = {0.5, 0.2};
  CHECK_THROWS_AS(c.validate(), DomainError);
  c.grid = {0.2, 1.0};
  CHECK_THROWS_AS(c.validate(), DomainError);
  CHECK_NOTHROW(config(1, 1.0, 10).validate());
}

TEST_CASE("grid contains requested times exactly") {
  SamplerConfig c = config(1, 1.0, 10, 7);
  const auto t = c.times({0.3, 0.125});
  CHECK(std::find(t.begin(), t.end(), 0.3) != t.end());
  CHECK(std::find(t.begin(), t.end(), 0.125) != t.end());
  CHECK(std::is_sorted(t.begin(), t.end()));
}

TEST_CASE("one bridge matches the closed form") {
  const EstimateWithCI e = estimate_stay_below(config(1, 1.0, 200000, 64));
  CHECK(std::fabs(e.value - oracle::bridge_below(1.0)) < 4.0 * e.std_error);
  // without the crossing correction the grid overestimates
  SamplerConfig raw = config(1, 1.0, 200000, 16);
  raw.crossing_correction = false;
  CHECK(estimate_stay_below(raw).value > oracle::bridge_below(1.0) + 0.01);
}

TEST_CASE("unconditioned marginal of one bridge") {
  SamplerConfig c = config(1, 100.0, 40000, 1);
  const PathEnsemble e = sample_watermelon(c);
  REQUIRE(e.times.size() == 1);
  double s = 0.0, s2 = 0.0;
  for (long k = 0; k < 40000; ++k) {
    s += e.at(k, 0);
    s2 += e.at(k, 0) * e.at(k, 0);
  }
  const double var = s2 / 40000 - (s / 40000) * (s / 40000);
  CHECK(var == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("agreement with the determinant for two bridges") {
  const EstimateWithCI e = estimate_stay_below(config(2, 1.8, 100000, 128));
  const double d = stay_below_constant(ScalingMap(2, 1.8)).value;
  CHECK(std::fabs(e.value - d) < 4.0 * e.std_error);

  const std::vector<PointConstraint> pts{{0.5, 1.2}};
  const EstimateWithCI c = estimate_conditional(config(2, 1.8, 100000, 128), ThresholdProfile::point_constraints(1.8, pts));
  const FiniteKernel k(ScalingMap(2, 1.8));
  const double g = gap_probability_multipoint(k, TimeSlices::from_constraints(k.map(), pts)).value;
  CHECK(std::fabs(c.value - g) < 4.0 * c.std_error);
}

TEST_CASE("determinism and thread independence") {
  SamplerConfig a = config(3, 2.0, 3000, 32, 99);
  a.threads = 1;
  SamplerConfig b = a;
  b.threads = 3;
  const auto x = estimate_stay_below(a), y = estimate_stay_below(b);
  CHECK(x.value == y.value);
  CHECK(x.std_error == y.std_error);
  const auto p = sample_watermelon(a), q = sample_watermelon(b);
  CHECK(p.top == q.top);
  CHECK(p.weight == q.weight);
  SamplerConfig c = a;
  c.seed = 100;
  CHECK(estimate_stay_below(c).value != x.value);
}

TEST_CASE("ratio estimator needs enough surviving replicas") {
  CHECK_THROWS_AS(estimate_conditional(config(3, 0.05, 2000, 32), ThresholdProfile::point_constraints(0.05, {{0.5, 0.0}})), NumericalError);
}

TEST_CASE("Kolmogorov-Smirnov helpers") {
  std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
  CHECK(ks_statistic(a, b) == 0.0);
  CHECK(ks_statistic({0, 1}, {5, 6}) == 1.0);
  CHECK(ks_critical(1000, 1000, 0.01) == doctest::Approx(1.6276 * std::sqrt(2.0 / 1000)).epsilon(1e-3));
  std::mt19937_64 g(5);
  std::normal_distribution<double> n;
  std::vector<double> u(5000), v(5000);
  for (auto& x : u) x = n(g);
  for (auto& x : v) x = n(g);
  CHECK(ks_statistic(u, v) < ks_critical(5000, 5000));
}

TEST_CASE("thread count") {
  CHECK(thread_count(3) == 3);
  CHECK(thread_count(0) >= 1);
}
