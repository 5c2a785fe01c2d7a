#include "tacnode/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "tacnode/error.hpp"
#include "tacnode/fredholm.hpp"
#include "tacnode/io.hpp"
#include "tacnode/kernels_finite.hpp"
#include "tacnode/kernels_limit.hpp"
#include "tacnode/sampler.hpp"
#include "tacnode/verify.hpp"
#include "tacnode/version.hpp"

namespace tacnode {

namespace {

struct Common {
  std::string format = "csv";
  int precision = 12;
  std::string output;
  int threads = 0;
  bool timing = false;
};

struct Level {
  CLI::Option* r = nullptr;
  CLI::Option* R = nullptr;
  double r_value = 0.0;
  double R_value = 0.0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--precision", c.precision, "Significant digits for floats")->check(CLI::Range(1, 17));
  sub->add_option("--output,-o", c.output, "Write the result here instead of stdout");
  sub->add_option("--threads", c.threads, "Worker cap (default: TACNODE_THREADS or all cores)")->check(CLI::NonNegativeNumber);
  sub->add_flag("--timing", c.timing, "Add wall-clock duration to the record");
}

void add_level(CLI::App* sub, Level& l) {
  l.r = sub->add_option("--r", l.r_value, "Threshold level r");
  l.R = sub->add_option("--R", l.R_value, "Tacnode parameter: r = sqrt(N) + R N^{-1/6} / 2");
  l.r->excludes(l.R);
}

ScalingMap make_map(int N, const Level& l) {
  require(N >= 1, "--N must be >= 1");
  if (*l.R) return ScalingMap::tacnode(N, l.R_value);
  require(static_cast<bool>(*l.r), "one of --r or --R is required");
  return ScalingMap(N, l.r_value);
}

void echo_level(Record& rec, int N, const ScalingMap& m, const Level& l) {
  rec.set("N", static_cast<long long>(N));
  rec.set("r", m.r);
  if (*l.R) rec.set("R", l.R_value);
}

void put_det(Record& rec, const DetResult& d) {
  rec.set("value", d.value);
  rec.set("err_est", d.err_est);
  rec.set("method", d.method);
}

void emit(const Record& rec, const Common& c, std::ostream& out) {
  const std::string text = c.format == "json" ? to_json(rec, c.precision) : to_csv(rec, c.precision);
  if (c.output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.output, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + c.output + "'");
  f << text;
}

void write_plot_script(const std::string& path, const std::string& csv) {
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << "# Plots sampled top paths from " << csv << "\n"
    << "# columns: replica,t,topvalue,accepted,weight\n"
    << "import csv\n"
    << "import matplotlib.pyplot as plt\n\n"
    << "paths = {}\n"
    << "with open(\"" << csv << "\") as fh:\n"
    << "    for row in csv.DictReader(fh):\n"
    << "        k = int(row[\"replica\"])\n"
    << "        if k >= 50:\n"
    << "            continue\n"
    << "        p = paths.setdefault(k, ([], [], row[\"accepted\"] == \"1\"))\n"
    << "        p[0].append(float(row[\"t\"]))\n"
    << "        p[1].append(float(row[\"topvalue\"]))\n\n"
    << "for t, x, ok in paths.values():\n"
    << "    plt.plot(t, x, color=\"tab:blue\" if ok else \"tab:red\", lw=0.6, alpha=0.7)\n"
    << "plt.xlabel(\"t\")\n"
    << "plt.ylabel(\"top path\")\n"
    << "plt.savefig(\"" << csv << ".png\", dpi=150)\n";
}

void export_paths(const std::string& path, const SamplerConfig& cfg, int precision) {
  const PathEnsemble e = sample_watermelon(cfg);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path + "'");
  f << "replica,t,topvalue,accepted,weight\n";
  const long n = static_cast<long>(e.accepted.size());
  for (long k = 0; k < n; ++k)
    for (std::size_t j = 0; j < e.times.size(); ++j)
      f << k << ',' << format_number(e.times[j], precision) << ',' << format_number(e.at(k, j), precision) << ','
        << int(e.accepted[k]) << ',' << format_number(e.weight[k], precision) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-N and hard-edge tacnode kernels, gap probabilities and samplers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Common common;

  // gap / stay-below
  auto* gap = app.add_subcommand("gap", "P(top path below r), optionally with a sub-threshold profile");
  gap->alias("stay-below");
  int g_N = 0;
  Level g_level;
  std::string g_profile, g_slices, g_route = "path";
  int g_nodes = 16;
  gap->add_option("--N", g_N, "Number of bridges")->required();
  add_level(gap, g_level);
  auto* g_prof_opt = gap->add_option("--profile", g_profile, "Segments CSV t_start,t_end,h");
  gap->add_option("--slices", g_slices, "Point constraints CSV t,h")->excludes(g_prof_opt);
  gap->add_option("--route", g_route, "Determinant route for profiles")->check(CLI::IsMember({"path", "reduced"}));
  gap->add_option("--nodes", g_nodes, "Gauss-Legendre nodes per panel")->check(CLI::Range(4, 64));
  add_common(gap, common);

  // multipoint
  auto* mp = app.add_subcommand("multipoint", "Gap probability of the extended kernel on time slices");
  int m_N = 0;
  Level m_level;
  std::string m_slices;
  int m_nodes = 16;
  mp->add_option("--N", m_N, "Number of bridges")->required();
  add_level(mp, m_level);
  mp->add_option("--slices", m_slices, "Slices CSV t,h")->required();
  mp->add_option("--nodes", m_nodes, "Gauss-Legendre nodes per panel")->check(CLI::Range(4, 64));
  add_common(mp, common);

  // limit-kernel
  auto* lk = app.add_subcommand("limit-kernel", "Limiting extended kernel at one point");
  double k_R = 0.0, k_T1 = 0.0, k_U1 = 0.0, k_T2 = 0.0, k_U2 = 0.0;
  bool k_airy = false;
  auto* k_R_opt = lk->add_option("--R", k_R, "Tacnode parameter");
  lk->add_option("--T1", k_T1)->required();
  lk->add_option("--U1", k_U1)->required();
  lk->add_option("--T2", k_T2)->required();
  lk->add_option("--U2", k_U2)->required();
  lk->add_flag("--airy", k_airy, "Evaluate the extended Airy kernel instead")->excludes(k_R_opt);
  add_common(lk, common);

  // limit-gap
  auto* lg = app.add_subcommand("limit-gap", "Gap probability of the limiting kernel on windows [a, 0]");
  double lg_R = 0.0, lg_T = 0.0, lg_a = 0.0;
  std::string lg_slices;
  lg->add_option("--R", lg_R, "Tacnode parameter")->required();
  auto* lg_T_opt = lg->add_option("--T", lg_T, "Single slice time");
  auto* lg_a_opt = lg->add_option("--a", lg_a, "Single slice window start (<= 0)");
  lg_T_opt->needs(lg_a_opt);
  lg_a_opt->needs(lg_T_opt);
  lg->add_option("--slices", lg_slices, "Slices CSV T,a")->excludes(lg_T_opt)->excludes(lg_a_opt);
  add_common(lg, common);

  // limit-functional
  auto* lf = app.add_subcommand("limit-functional", "Limiting stay-below probability for a level H(T)");
  double lf_R = 0.0, lf_T1 = 0.0, lf_T2 = 0.0, lf_H = 0.0;
  std::string lf_profile;
  bool lf_airy = false;
  auto* lf_R_opt = lf->add_option("--R", lf_R, "Tacnode parameter");
  lf->add_option("--T1", lf_T1)->required();
  lf->add_option("--T2", lf_T2)->required();
  auto* lf_H_opt = lf->add_option("--H", lf_H, "Constant level on [T1, T2]");
  lf->add_option("--profile", lf_profile, "Segments CSV T_start,T_end,H")->excludes(lf_H_opt);
  lf->add_flag("--airy", lf_airy, "Airy2 process (no wall) instead of the tacnode")->excludes(lf_R_opt);
  add_common(lf, common);

  // limit-derivative-check
  auto* ld = app.add_subcommand("limit-derivative-check", "Finite-difference check of dK/dR = -f g");
  double ld_R = 0.0, ld_h = 1e-3;
  ld->add_option("--R", ld_R, "Tacnode parameter")->required();
  ld->add_option("--step", ld_h, "Central difference step")->check(CLI::PositiveNumber);
  add_common(ld, common);

  // sample
  auto* sm = app.add_subcommand("sample", "Monte Carlo estimate from the exact watermelon sampler");
  int s_N = 0;
  Level s_level;
  long s_replicas = 10000;
  std::uint64_t s_seed = 1;
  int s_grid = 256;
  bool s_nocorr = false;
  std::string s_profile, s_slices, s_export, s_plot;
  sm->add_option("--N", s_N, "Number of bridges")->required();
  add_level(sm, s_level);
  sm->add_option("--replicas", s_replicas, "Number of replicas");
  sm->add_option("--seed", s_seed, "Master seed");
  sm->add_option("--grid", s_grid, "Interior grid points");
  sm->add_flag("--no-correction", s_nocorr, "Disable the Brownian-bridge crossing correction");
  auto* s_prof_opt = sm->add_option("--profile", s_profile, "Conditional estimate: segments CSV t_start,t_end,h");
  sm->add_option("--slices", s_slices, "Conditional estimate: points CSV t,h")->excludes(s_prof_opt);
  sm->add_option("--export", s_export, "Per-replica CSV replica,t,topvalue,accepted,weight");
  sm->add_option("--plot-script", s_plot, "Write a matplotlib script for the exported CSV");
  add_common(sm, common);

  // verify
  auto* vf = app.add_subcommand("verify", "Run verification suites");
  std::string v_suite = "all";
  VerifyOptions v_opt;
  vf->add_option("--suite", v_suite, "specfun, compatibility, conjugation, equivalence, limits, montecarlo or all");
  vf->add_option("--replicas", v_opt.replicas, "Replicas per Monte Carlo check");
  vf->add_option("--seed", v_opt.seed, "Monte Carlo seed");
  add_common(vf, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitDomain;
  }

  const auto start = std::chrono::steady_clock::now();
  Record rec;
  rec.set("schema_version", static_cast<long long>(kSchemaVersion));
  int code = kExitOk;
  try {
    if (gap->parsed()) {
      rec.set("command", std::string("gap"));
      const ScalingMap map = make_map(g_N, g_level);
      echo_level(rec, g_N, map, g_level);
      FredholmOptions fo;
      fo.nodes_per_panel = g_nodes;
      if (g_profile.empty() && g_slices.empty()) {
        put_det(rec, stay_below_constant(map));
      } else {
        const ThresholdProfile p = g_profile.empty() ? ThresholdProfile::point_constraints(map.r, read_slices_csv(g_slices))
                                                     : ThresholdProfile::piecewise(map.r, read_profile_csv(g_profile));
        rec.set(g_profile.empty() ? "slices" : "profile", g_profile.empty() ? g_slices : g_profile);
        rec.set("route", g_route);
        const FiniteKernel kernel(map);
        put_det(rec, g_route == "path" ? conditional_stay_below(kernel, p, fo) : conditional_stay_below_reduced(kernel, p, fo));
      }
    } else if (mp->parsed()) {
      rec.set("command", std::string("multipoint"));
      const ScalingMap map = make_map(m_N, m_level);
      echo_level(rec, m_N, map, m_level);
      rec.set("slices", m_slices);
      FredholmOptions fo;
      fo.nodes_per_panel = m_nodes;
      const FiniteKernel kernel(map);
      put_det(rec, gap_probability_multipoint(kernel, TimeSlices::from_constraints(map, read_slices_csv(m_slices)), fo));
    } else if (lk->parsed()) {
      rec.set("command", std::string("limit-kernel"));
      if (!k_airy) {
        require(static_cast<bool>(*k_R_opt), "--R is required (or --airy)");
        rec.set("R", k_R);
      }
      rec.set("T1", k_T1).set("U1", k_U1).set("T2", k_T2).set("U2", k_U2);
      if (k_airy) {
        rec.set("value", extended_airy_kernel(k_T1, k_U1, k_T2, k_U2));
        rec.set("err_est", 0.0);
        rec.set("method", std::string("extended-airy"));
      } else {
        const LimitKernel k({k_R});
        const LimitKernel fine({k_R, 180, k.Lambda()});
        const double v = k.extended(k_T1, k_U1, k_T2, k_U2);
        rec.set("value", v);
        rec.set("err_est", std::fabs(v - fine.extended(k_T1, k_U1, k_T2, k_U2)));
        rec.set("method", std::string("nystrom-resolvent"));
      }
    } else if (lg->parsed()) {
      rec.set("command", std::string("limit-gap"));
      rec.set("R", lg_R);
      LimitSlices sl;
      if (!lg_slices.empty()) {
        sl.slices = read_limit_slices_csv(lg_slices);
        rec.set("slices", lg_slices);
      } else {
        require(static_cast<bool>(*lg_T_opt), "either --T and --a or --slices is required");
        sl.slices = {{lg_T, lg_a}};
        rec.set("T", lg_T).set("a", lg_a);
      }
      put_det(rec, limit_gap_probability(LimitKernel({lg_R}), sl));
    } else if (lf->parsed()) {
      rec.set("command", std::string("limit-functional"));
      if (!lf_airy) {
        require(static_cast<bool>(*lf_R_opt), "--R is required (or --airy)");
        rec.set("R", lf_R);
      }
      rec.set("T1", lf_T1).set("T2", lf_T2);
      std::vector<HSegment> segs;
      if (!lf_profile.empty()) {
        segs = read_limit_profile_csv(lf_profile);
        rec.set("profile", lf_profile);
      } else {
        require(static_cast<bool>(*lf_H_opt), "either --H or --profile is required");
        segs = {{lf_T1, lf_T2, lf_H}};
        rec.set("H", lf_H);
      }
      put_det(rec, lf_airy ? airy2_stay_below(lf_T1, lf_T2, segs) : functional_limit_det(LimitKernel({lf_R}), lf_T1, lf_T2, segs));
    } else if (ld->parsed()) {
      rec.set("command", std::string("limit-derivative-check"));
      rec.set("R", ld_R).set("step", ld_h);
      const double d = rank_one_defect(ld_R, ld_h);
      const double tol = 1e-5;
      rec.set("value", d).set("tolerance", tol).set("pass", d <= tol);
      rec.set("method", std::string("central-difference"));
      if (!(d <= tol)) code = kExitVerify;
    } else if (sm->parsed()) {
      rec.set("command", std::string("sample"));
      const ScalingMap map = make_map(s_N, s_level);
      echo_level(rec, s_N, map, s_level);
      SamplerConfig cfg;
      cfg.N = s_N;
      cfg.r = map.r;
      cfg.grid_points = s_grid;
      cfg.replicas = s_replicas;
      cfg.seed = s_seed;
      cfg.crossing_correction = !s_nocorr;
      cfg.threads = common.threads;
      cfg.validate();
      rec.set("replicas", static_cast<long long>(s_replicas)).set("grid", static_cast<long long>(s_grid));
      rec.set("crossing_correction", !s_nocorr);
      EstimateWithCI e;
      if (s_profile.empty() && s_slices.empty()) {
        e = estimate_stay_below(cfg);
      } else {
        const ThresholdProfile p = s_profile.empty() ? ThresholdProfile::point_constraints(map.r, read_slices_csv(s_slices))
                                                     : ThresholdProfile::piecewise(map.r, read_profile_csv(s_profile));
        rec.set(s_profile.empty() ? "slices" : "profile", s_profile.empty() ? s_slices : s_profile);
        e = estimate_conditional(cfg, p);
      }
      rec.set("value", e.value).set("std_error", e.std_error).set("accepted", static_cast<long long>(e.accepted));
      rec.set("method", e.method);
      if (!s_export.empty()) {
        export_paths(s_export, cfg, common.precision);
        rec.set("export", s_export);
      }
      if (!s_plot.empty()) {
        require(!s_export.empty(), "--plot-script needs --export");
        write_plot_script(s_plot, s_export);
      }
    } else if (vf->parsed()) {
      rec.set("command", std::string("verify"));
      rec.set("suite", v_suite);
      v_opt.threads = common.threads;
      const auto checks = run_verify(v_suite, v_opt);
      rec.columns = {"suite", "check", "measured", "tolerance", "status"};
      bool ok = true;
      for (const auto& c : checks) {
        rec.rows.push_back({c.suite, c.name, c.measured, c.tolerance, std::string(c.pass ? "pass" : "FAIL")});
        ok = ok && c.pass;
      }
      rec.set("passed", ok);
      if (!ok) code = kExitVerify;
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }

  rec.set("version", std::string(kVersion));
  if (sm->parsed()) rec.set("seed", s_seed);
  if (vf->parsed() && (v_suite == "montecarlo" || v_suite == "all")) rec.set("seed", v_opt.seed);
  if (common.timing) rec.set("duration_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  try {
    emit(rec, common, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return code;
}

}  // namespace tacnode
