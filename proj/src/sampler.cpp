#include "tacnode/sampler.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/random/normal_distribution.hpp>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "tacnode/error.hpp"

namespace tacnode {

namespace {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Engine replica_engine(std::uint64_t seed, long replica) {
  return Engine(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(replica))));
}

// Fixed-order pairwise summation, so totals do not depend on threading.
double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// Hermitian matrix Brownian bridge: diagonal entries standard real bridges,
// off-diagonal entries (X + iY)/sqrt2. Stored as the diagonal plus the real
// and imaginary parts of the strict upper triangle.
class HermitianBridge {
 public:
  explicit HermitianBridge(int n)
      : n_(n), diag_(static_cast<std::size_t>(n)), re_(static_cast<std::size_t>(n) * n), im_(re_.size()),
        sdiag_(diag_.size()), sre_(re_.size()), sim_(re_.size()), chol_(re_.size()), h_(n, n) {}

  void reset() {
    std::fill(diag_.begin(), diag_.end(), 0.0);
    std::fill(re_.begin(), re_.end(), 0.0);
    std::fill(im_.begin(), im_.end(), 0.0);
  }

  // Exact bridge transition from t to t2 (pinned to 0 at time 1). The
  // previous state is kept in the spare buffers for later exact evaluation.
  void advance(double t, double t2, Engine& eng) {
    diag_.swap(sdiag_);
    re_.swap(sre_);
    im_.swap(sim_);
    const double c = (1.0 - t2) / (1.0 - t);
    const double sd = std::sqrt(std::max(0.0, (t2 - t) * (1.0 - t2) / (1.0 - t)));
    const double so = sd / std::numbers::sqrt2;
    for (int i = 0; i < n_; ++i) {
      diag_[static_cast<std::size_t>(i)] = c * sdiag_[static_cast<std::size_t>(i)] + sd * normal_(eng);
      for (int j = i + 1; j < n_; ++j) {
        const std::size_t k = idx(i, j);
        re_[k] = c * sre_[k] + so * normal_(eng);
        im_[k] = c * sim_[k] + so * normal_(eng);
      }
    }
  }

  // Upper bound on the top eigenvalue.
  double gershgorin() const {
    double best = -HUGE_VAL;
    for (int i = 0; i < n_; ++i) {
      double s = diag_[static_cast<std::size_t>(i)];
      for (int j = 0; j < n_; ++j)
        if (j != i) {
          const std::size_t k = i < j ? idx(i, j) : idx(j, i);
          s += std::sqrt(re_[k] * re_[k] + im_[k] * im_[k]);
        }
      best = std::max(best, s);
    }
    return best;
  }

  // True when s I - H is positive definite, i.e. every eigenvalue < s.
  bool all_below(double s) {
    using C = std::complex<double>;
    for (int j = 0; j < n_; ++j) {
      double d = s - diag_[static_cast<std::size_t>(j)];
      for (int k = 0; k < j; ++k) d -= std::norm(chol_[idx(j, k)]);
      if (!(d > 0.0)) return false;
      const double ljj = std::sqrt(d);
      for (int i = j + 1; i < n_; ++i) {
        // (s I - H)(i, j) = -H(i, j) = -conj(H(j, i))
        C a(-re_[idx(j, i)], im_[idx(j, i)]);
        for (int k = 0; k < j; ++k) a -= chol_[idx(i, k)] * std::conj(chol_[idx(j, k)]);
        chol_[idx(i, j)] = a / ljj;
      }
    }
    return true;
  }

  double top(long& retries) {
    if (n_ == 1) return diag_[0];
    for (int i = 0; i < n_; ++i) {
      h_(i, i) = diag_[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < n_; ++j) {
        const std::size_t k = idx(i, j);
        h_(i, j) = {re_[k], im_[k]};
        h_(j, i) = {re_[k], -im_[k]};
      }
    }
    es_.compute(h_, Eigen::EigenvaluesOnly);
    for (int attempt = 0; es_.info() != Eigen::Success && attempt < 5; ++attempt) {
      ++retries;
      for (int i = 0; i < n_; ++i) h_(i, i) += 1e-14 * (i + 1);
      es_.compute(h_, Eigen::EigenvaluesOnly);
    }
    if (es_.info() != Eigen::Success) throw NumericalError("sampler: eigenvalue solver failed after jitter retries");
    return es_.eigenvalues()(n_ - 1);
  }

  // Swap current and previous state.
  void swap_saved() {
    diag_.swap(sdiag_);
    re_.swap(sre_);
    im_.swap(sim_);
  }

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) + j; }

  int n_;
  std::vector<double> diag_, re_, im_;
  std::vector<double> sdiag_, sre_, sim_;
  std::vector<std::complex<double>> chol_;
  Eigen::MatrixXcd h_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_;
  boost::random::normal_distribution<double> normal_;
};

// Interior times t_0 < ... < t_{M-1}; interval k runs from t_{k-1} to t_k
// with t_{-1} = 0 and t_M = 1.
struct Plan {
  std::vector<double> t;
  double r = 0.0;
  bool constrained = false;
  std::vector<double> level;  // numerator level per interval, size M + 1
  std::vector<double> point;  // numerator level at t_j, size M
  bool correction = true;
};

struct Top {
  bool exact = true;
  double value = 0.0;  // eigenvalue when exact, upper bound otherwise
  bool saved = false;  // bound refers to the saved matrix
};

struct Outcome {
  double num = 0.0;
  double den = 0.0;
};

constexpr double kNegligible = 40.0;  // exp(-40) is below double resolution of 1

class ReplicaRunner {
 public:
  ReplicaRunner(const Plan& plan, int n) : plan_(plan), bridge_(n) {}

  Outcome run(Engine& eng) {
    const std::size_t m = plan_.t.size();
    bridge_.reset();
    Top prev;  // time 0: all paths at 0
    double den = 1.0;
    double num = plan_.constrained ? 1.0 : 0.0;
    bool alive = plan_.constrained;
    double tc = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      const double tn = j < m ? plan_.t[j] : 1.0;
      const double dt = tn - tc;
      Top cur;
      if (j == m) prev.saved = false;  // no step taken: prev is the live state
      if (j < m) {
        bridge_.advance(tc, tn, eng);
        const double next_dt = (j + 1 < m ? plan_.t[j + 1] : 1.0) - tn;
        double target = plan_.r;
        if (alive) target = std::min({target, plan_.level[j], plan_.level[j + 1], plan_.point[j]});
        cur = classify(target, std::sqrt(kNegligible * std::max(dt, next_dt) / 2.0));
      }
      if (cur.exact && cur.value >= plan_.r) return {};
      if (alive && cur.exact && j < m &&
          cur.value >= std::min({plan_.level[j], plan_.level[j + 1], plan_.point[j]}))
        alive = false;
      if (plan_.correction) {
        const double fr = factor(plan_.r, prev, cur, dt);
        den *= fr;
        if (alive) num *= plan_.level[j] >= plan_.r ? fr : factor(plan_.level[j], prev, cur, dt);
      }
      prev = cur;
      prev.saved = true;
      tc = tn;
    }
    return {alive ? num : 0.0, den};
  }

  // Exact top eigenvalues along the grid.
  void path(Engine& eng, std::vector<double>& out) {
    bridge_.reset();
    double tc = 0.0;
    for (std::size_t j = 0; j < plan_.t.size(); ++j) {
      bridge_.advance(tc, plan_.t[j], eng);
      out[j] = bridge_.top(retries);
      tc = plan_.t[j];
    }
  }

  long retries = 0;

 private:
  Top classify(double target, double margin) {
    Top t;
    t.exact = false;
    t.value = bridge_.gershgorin();
    if (target - t.value >= margin) return t;
    if (bridge_.all_below(target - margin)) {
      t.value = target - margin;
      return t;
    }
    return exact_now();
  }

  Top exact_now() {
    Top t;
    t.value = bridge_.top(retries);
    return t;
  }

  // Survival factor of the top path between two grid points below `level`,
  // upgrading bounds to exact eigenvalues only when the factor is not 1.
  double factor(double level, Top& a, Top& b, double dt) {
    if ((level - a.value) * (level - b.value) * 2.0 / dt > kNegligible && level > a.value && level > b.value)
      return 1.0;
    if (!a.exact) {
      if (a.saved) bridge_.swap_saved();
      const bool saved = a.saved;
      a = exact_now();
      a.saved = saved;
      if (saved) bridge_.swap_saved();
    }
    if (!b.exact) b = exact_now();
    const double x = level - a.value;
    const double y = level - b.value;
    if (x <= 0.0 || y <= 0.0) return 0.0;
    return -std::expm1(-2.0 * x * y / dt);
  }

  const Plan& plan_;
  HermitianBridge bridge_;
};

template <class F>
void parallel_replicas(long replicas, int threads, F&& body) {
  const int nt = static_cast<int>(std::max<long>(1, std::min<long>(threads, replicas)));
  if (nt == 1) {
    body(0L, replicas);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex mu;
  const long chunk = (replicas + nt - 1) / nt;
  for (int w = 0; w < nt; ++w) {
    const long lo = w * chunk;
    const long hi = std::min(replicas, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        body(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

bool same_time(double a, double b) { return std::fabs(a - b) <= 1e-12; }

Plan make_plan(const SamplerConfig& cfg, const ThresholdProfile* profile) {
  Plan p;
  p.r = cfg.r;
  p.correction = cfg.crossing_correction;
  std::vector<double> extra;
  if (profile) {
    for (const auto& c : profile->points) extra.push_back(c.t);
    for (const auto& s : profile->segments) {
      extra.push_back(s.t_start);
      extra.push_back(s.t_end);
    }
  }
  p.t = cfg.times(extra);
  const std::size_t m = p.t.size();
  p.level.assign(m + 1, cfg.r);
  p.point.assign(m, cfg.r);
  if (!profile) return p;
  for (const auto& c : profile->points)
    for (std::size_t j = 0; j < m; ++j)
      if (same_time(p.t[j], c.t)) p.point[j] = std::min(p.point[j], c.h);
  for (const auto& s : profile->segments) {
    for (std::size_t k = 0; k <= m; ++k) {
      const double a = k == 0 ? 0.0 : p.t[k - 1];
      const double b = k == m ? 1.0 : p.t[k];
      const double mid = 0.5 * (a + b);
      if (mid > s.t_start && mid < s.t_end) p.level[k] = std::min(p.level[k], s.h);
    }
    for (std::size_t j = 0; j < m; ++j)
      if (p.t[j] >= s.t_start - 1e-12 && p.t[j] <= s.t_end + 1e-12) p.point[j] = std::min(p.point[j], s.h);
  }
  p.constrained = true;
  return p;
}

}  // namespace

// ---------------------------------------------------------------- config

void SamplerConfig::validate() const {
  require(N >= 1, "sampler: N must be >= 1");
  require(std::isfinite(r), "sampler: r must be finite");
  require(replicas >= 1, "sampler: replicas must be >= 1");
  require(threads >= 0, "sampler: threads must be >= 0");
  if (grid.empty()) {
    require(grid_points >= 1, "sampler: grid must have at least one point");
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      require(grid[i] > 0.0 && grid[i] < 1.0, "sampler: grid times must lie in (0, 1)");
      if (i > 0) require(grid[i] > grid[i - 1], "sampler: grid must be strictly increasing");
    }
  }
}

std::vector<double> SamplerConfig::times(const std::vector<double>& extra) const {
  std::vector<double> t = grid;
  if (t.empty())
    for (int j = 1; j <= grid_points; ++j) t.push_back(static_cast<double>(j) / (grid_points + 1));
  for (double e : extra) {
    require(e > 0.0 && e < 1.0, "sampler: constraint times must lie in (0, 1)");
    t.push_back(e);
  }
  std::sort(t.begin(), t.end());
  std::vector<double> out;
  for (double x : t)
    if (out.empty() || !same_time(x, out.back())) out.push_back(x);
  return out;
}

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TACNODE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------- sampling

PathEnsemble sample_watermelon(const SamplerConfig& cfg) {
  cfg.validate();
  const Plan plan = make_plan(cfg, nullptr);
  PathEnsemble out;
  out.times = plan.t;
  const std::size_t m = plan.t.size();
  const std::size_t n = static_cast<std::size_t>(cfg.replicas);
  out.top.assign(n * m, 0.0);
  out.accepted.assign(n, 0);
  out.weight.assign(n, 0.0);
  std::vector<long> retries(static_cast<std::size_t>(thread_count(cfg.threads)), 0);
  std::mutex mu;
  parallel_replicas(cfg.replicas, thread_count(cfg.threads), [&](long lo, long hi) {
    ReplicaRunner runner(plan, cfg.N);
    std::vector<double> row(m);
    for (long i = lo; i < hi; ++i) {
      Engine eng = replica_engine(cfg.seed, i);
      runner.path(eng, row);
      std::copy(row.begin(), row.end(), out.top.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * m));
      bool ok = true;
      double w = 1.0;
      double prev = 0.0, tp = 0.0;
      for (std::size_t j = 0; j <= m && ok; ++j) {
        const double v = j < m ? row[j] : 0.0;
        const double t = j < m ? plan.t[j] : 1.0;
        if (v >= cfg.r) ok = false;
        else if (cfg.crossing_correction) w *= -std::expm1(-2.0 * (cfg.r - prev) * (cfg.r - v) / (t - tp));
        prev = v;
        tp = t;
      }
      out.accepted[static_cast<std::size_t>(i)] = ok ? 1 : 0;
      out.weight[static_cast<std::size_t>(i)] = ok ? w : 0.0;
    }
    std::lock_guard<std::mutex> g(mu);
    out.jitter_retries += runner.retries;
  });
  return out;
}

namespace {

struct Weights {
  std::vector<double> num, den;
};

Weights run_weights(const SamplerConfig& cfg, const Plan& plan) {
  Weights w;
  w.num.assign(static_cast<std::size_t>(cfg.replicas), 0.0);
  w.den.assign(static_cast<std::size_t>(cfg.replicas), 0.0);
  parallel_replicas(cfg.replicas, thread_count(cfg.threads), [&](long lo, long hi) {
    ReplicaRunner runner(plan, cfg.N);
    for (long i = lo; i < hi; ++i) {
      Engine eng = replica_engine(cfg.seed, i);
      const Outcome o = runner.run(eng);
      w.num[static_cast<std::size_t>(i)] = o.num;
      w.den[static_cast<std::size_t>(i)] = o.den;
    }
  });
  return w;
}

}  // namespace

EstimateWithCI estimate_stay_below(const SamplerConfig& cfg) {
  cfg.validate();
  Plan plan = make_plan(cfg, nullptr);
  plan.constrained = false;
  const Weights w = run_weights(cfg, plan);
  const double n = static_cast<double>(cfg.replicas);
  EstimateWithCI e;
  e.value = pairwise_sum(w.den) / n;
  std::vector<double> sq(w.den.size());
  long acc = 0;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    sq[i] = (w.den[i] - e.value) * (w.den[i] - e.value);
    if (w.den[i] > 0.0) ++acc;
  }
  e.std_error = cfg.replicas > 1 ? std::sqrt(pairwise_sum(sq) / (n * (n - 1.0))) : 0.0;
  e.replicas = cfg.replicas;
  e.accepted = acc;
  e.method = cfg.crossing_correction ? "hermitian-bridge+crossing" : "hermitian-bridge";
  e.seed = cfg.seed;
  return e;
}

EstimateWithCI estimate_conditional(const SamplerConfig& cfg, const ThresholdProfile& profile) {
  cfg.validate();
  require(std::fabs(profile.r - cfg.r) <= 1e-12 * std::max(1.0, std::fabs(cfg.r)), "sampler: profile r differs from config r");
  profile.validate();
  const Plan plan = make_plan(cfg, &profile);
  const Weights w = run_weights(cfg, plan);
  long acc = 0;
  for (double d : w.den)
    if (d > 0.0) ++acc;
  if (acc < 100) throw NumericalError("sampler: fewer than 100 replicas satisfy the conditioning");
  const double n = static_cast<double>(cfg.replicas);
  const double sx = pairwise_sum(w.num), sy = pairwise_sum(w.den);
  EstimateWithCI e;
  e.value = sx / sy;
  std::vector<double> res(w.num.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double d = w.num[i] - e.value * w.den[i];
    res[i] = d * d;
  }
  // delta method: var(X/Y) ~ var(X - pY) / (n Ybar^2)
  const double ybar = sy / n;
  e.std_error = std::sqrt(pairwise_sum(res) / (n * (n - 1.0))) / ybar;
  e.replicas = cfg.replicas;
  e.accepted = acc;
  e.method = "ratio";
  e.seed = cfg.seed;
  return e;
}

RescaledSamples rescaled_top_path(const SamplerConfig& cfg, const std::vector<double>& T) {
  cfg.validate();
  const ScalingMap map(cfg.N, cfg.r);
  std::vector<double> ts;
  for (double x : T) {
    const double t = map.t_of_T(x);
    require(t > 0.0 && t < 1.0, "rescaled path: T maps outside (0, 1)");
    ts.push_back(t);
  }
  SamplerConfig c = cfg;
  c.grid = cfg.times(ts);
  const PathEnsemble e = sample_watermelon(c);
  RescaledSamples out;
  out.T = T;
  out.weight = e.weight;
  const double scale = 2.0 * std::pow(static_cast<double>(cfg.N), 1.0 / 6.0);
  const double centre = std::sqrt(static_cast<double>(cfg.N));
  std::vector<std::size_t> pos;
  for (double t : ts)
    pos.push_back(static_cast<std::size_t>(std::find_if(e.times.begin(), e.times.end(), [&](double x) { return same_time(x, t); }) -
                                           e.times.begin()));
  out.values.reserve(static_cast<std::size_t>(cfg.replicas) * T.size());
  for (long i = 0; i < cfg.replicas; ++i)
    for (std::size_t k : pos) out.values.push_back(scale * (e.at(i, k) - centre));
  return out;
}

// ---------------------------------------------------------------- KS

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(i / na - j / nb));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

}  // namespace tacnode
