#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tacnode/scaling.hpp"

namespace tacnode {

struct SamplerConfig {
  int N = 1;
  double r = 1.0;
  int grid_points = 256;     // uniform grid j / (m + 1), j = 1..m
  std::vector<double> grid;  // explicit grid; overrides grid_points when non-empty
  long replicas = 10000;
  std::uint64_t seed = 1;
  bool crossing_correction = true;
  int threads = 0;  // 0: TACNODE_THREADS or hardware concurrency

  void validate() const;

  // Sorted grid with every time of `extra` inserted exactly.
  std::vector<double> times(const std::vector<double>& extra = {}) const;
};

struct EstimateWithCI {
  double value = 0.0;
  double std_error = 0.0;
  long replicas = 0;
  long accepted = 0;  // replicas with positive denominator weight
  std::string method;
  std::uint64_t seed = 0;
};

// Top-path samples on the grid, unconditioned, with the stay-below-r flag
// and the crossing-corrected survival weight (0 when not accepted).
struct PathEnsemble {
  std::vector<double> times;
  std::vector<double> top;  // replica-major, replicas x times.size()
  std::vector<unsigned char> accepted;
  std::vector<double> weight;
  long jitter_retries = 0;

  double at(long replica, std::size_t k) const { return top[static_cast<std::size_t>(replica) * times.size() + k]; }
};

PathEnsemble sample_watermelon(const SamplerConfig& cfg);

// P(B_N < r on [0, 1]).
EstimateWithCI estimate_stay_below(const SamplerConfig& cfg);

// P(profile constraints | B_N < r) by the ratio estimator; throws
// NumericalError when fewer than 100 replicas survive the denominator.
EstimateWithCI estimate_conditional(const SamplerConfig& cfg, const ThresholdProfile& profile);

// 2 N^{1/6}(B_N((1 + T N^{-1/3})/2) - sqrt N) at the requested T, with the
// conditioning weights.
struct RescaledSamples {
  std::vector<double> T;
  std::vector<double> values;  // replica-major
  std::vector<double> weight;
};
RescaledSamples rescaled_top_path(const SamplerConfig& cfg, const std::vector<double>& T);

// Worker count: explicit request, else TACNODE_THREADS, else hardware.
int thread_count(int requested);

// Two-sample Kolmogorov-Smirnov statistic and its asymptotic critical value.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_critical(std::size_t n, std::size_t m, double alpha = 0.01);

}  // namespace tacnode
