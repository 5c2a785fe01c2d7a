#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tacnode {

struct Check {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  long replicas = 100000;  // montecarlo suite
  std::uint64_t seed = 2024;
  int threads = 0;
};

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> s{"specfun", "compatibility", "conjugation", "equivalence", "limits", "montecarlo"};
  return s;
}

// Runs one suite, or every suite for "all". Unknown names throw DomainError.
std::vector<Check> run_verify(const std::string& suite, const VerifyOptions& opt = {});

// Shared measurements, also used by the acceptance driver.

// max |I_residue - I_GH| relative to the row scale of 1 - K0.
double k0_dual_route_error(int N, double r);

// max over a 3x3 (T, U) grid of |d/dR K^ext + f g| by central differences.
double rank_one_defect(double R, double h = 1e-3);

// max |conjugated K^ext(R) - extended Airy| over a fixed 4-point grid.
double airy_limit_gap(double R);

// sup over a fixed compact grid of |(N^{-1/6}/2) K_ext - K^ext| at R.
double finite_n_kernel_error(int N, double R);

}  // namespace tacnode
