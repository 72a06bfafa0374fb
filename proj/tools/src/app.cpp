// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include "agc_cli/app.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "agc/bit_alloc.hpp"
#include "agc/error.hpp"
#include "agc/quantizer.hpp"
#include "agc/verify.hpp"

namespace agc::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kProfilesTag = 100;
constexpr std::uint64_t kLossTag = 101;
constexpr std::uint64_t kDesignTag = 102;

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"", {"scenario", "seed", "trials"}},
    {"workers", {"k", "psi_min", "psi_max", "tau_th", "p"}},
    {"budget", {"z_tot", "z_res", "dim", "z_res_list"}},
    {"scheme", {"schemes", "eta"}},
    {"loss", {"kind", "partitions", "lambda", "samples_per_partition", "l2", "separation"}},
    {"optimizer",
     {"kind", "schedule", "gamma", "gamma_scale", "iterations", "batch", "adam_lambda", "beta1",
      "beta2", "eps"}},
    {"output", {"dir"}},
    {"verify", {"checks"}},
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::kConfig, what); }

std::size_t positive_size(const ConfigFile& f, const std::string& section, const std::string& key,
                          std::size_t fallback) {
  const auto v = f.integer(section, key);
  if (!v) return fallback;
  if (*v < 1) config_error("[" + section + "] " + key + " must be >= 1");
  return static_cast<std::size_t>(*v);
}

Schedule parse_schedule(const std::string& s) {
  if (s == "inv_lambda_t") return Schedule::kInvLambdaT;
  if (s == "const_sqrt") return Schedule::kConstSqrt;
  if (s == "decay_sqrt") return Schedule::kDecaySqrt;
  if (s == "fixed") return Schedule::kFixed;
  config_error("unknown schedule '" + s + "' (inv_lambda_t, const_sqrt, decay_sqrt, fixed)");
}

const char* schedule_name(Schedule s) {
  switch (s) {
    case Schedule::kInvLambdaT: return "inv_lambda_t";
    case Schedule::kConstSqrt: return "const_sqrt";
    case Schedule::kDecaySqrt: return "decay_sqrt";
    case Schedule::kFixed: return "fixed";
  }
  return "fixed";
}

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "gd") return OptimizerKind::kGd;
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  config_error("unknown optimizer '" + s + "' (gd, sgd, adam)");
}

std::vector<SchemeSpec> parse_schemes(const std::vector<std::string>& items) {
  if (items.empty()) config_error("scheme list is empty");
  std::vector<SchemeSpec> out;
  for (const auto& s : items) out.push_back(SchemeSpec::parse(s));
  return out;
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kConfig, "cannot write '" + path.string() + "'");
  f << text;
}

TrainConfig train_config(const ExperimentConfig& cfg, const SchemeSpec& scheme,
                         const Profiles& profiles, const LossModel& loss, double eta) {
  TrainConfig t;
  t.scheme = scheme;
  t.profiles = profiles;
  t.z_tot = cfg.z_tot;
  t.eta = eta;
  t.iterations = cfg.iterations;
  t.lr = cfg.lr;
  if (cfg.lr.kind == Schedule::kFixed && cfg.gamma_scale) t.lr.gamma = *cfg.gamma_scale / loss.smoothness();
  t.optimizer = cfg.optimizer;
  t.seed = cfg.seed;
  t.trials = cfg.trials;
  return t;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ExperimentConfig resolve_config(const ConfigFile& f, const Overrides& o) {
  f.require_known(kKnownKeys);
  ExperimentConfig c;
  if (auto v = f.str("", "scenario")) c.scenario = *v;
  if (auto v = f.u64("", "seed")) c.seed = *v;
  c.trials = positive_size(f, "", "trials", c.trials);

  if (auto v = f.reals("workers", "p")) {
    if (v->empty()) config_error("[workers] p is empty");
    for (double p : *v) {
      if (!(p >= 0.0 && p < 1.0)) config_error("[workers] p entries must lie in [0, 1)");
    }
    if (auto k = f.integer("workers", "k"); k && static_cast<std::size_t>(*k) != v->size()) {
      config_error("[workers] k disagrees with the length of p");
    }
    c.p = *v;
    c.k = v->size();
  } else {
    c.k = positive_size(f, "workers", "k", c.k);
  }
  if (auto v = f.real("workers", "psi_min")) c.psi_min = *v;
  if (auto v = f.real("workers", "psi_max")) c.psi_max = *v;
  if (auto v = f.real("workers", "tau_th")) c.tau_th = *v;
  if (c.p.empty()) {
    if (!(c.psi_min > 0.0 && c.psi_min <= c.psi_max)) config_error("[workers] need 0 < psi_min <= psi_max");
    if (!(c.tau_th > 1.0)) config_error("[workers] tau_th must exceed 1");
  }

  const auto k2 = 2 * static_cast<int>(c.k);
  const auto z_tot = f.integer("budget", "z_tot");
  const auto z_res = f.integer("budget", "z_res");
  if (z_tot && z_res) config_error("[budget] set z_tot or z_res, not both");
  if (z_tot) {
    c.z_tot = static_cast<int>(*z_tot);
  } else if (z_res) {
    c.z_tot = static_cast<int>(*z_res) + k2;
  } else {
    c.z_tot = 2 * k2;
  }
  c.dim = positive_size(f, "budget", "dim", c.dim);
  if (auto v = f.ints("budget", "z_res_list")) {
    for (int z : *v) {
      if (z < 0) config_error("[budget] z_res_list entries must be >= 0");
    }
    c.z_res_list = *v;
  }

  if (auto v = f.list("scheme", "schemes")) c.schemes = parse_schemes(*v);
  if (o.scheme) c.schemes = parse_schemes({*o.scheme});
  if (auto v = f.str("scheme", "eta")) c.eta = *v;
  if (o.eta) c.eta = *o.eta;
  for (const auto& s : c.schemes) {
    s.validate(c.k);
    if (s.quantized() && c.z_tot < k2) {
      config_error("Z_tot = " + std::to_string(c.z_tot) + " is below 2k = " + std::to_string(k2));
    }
  }
  if (c.z_res_list.empty()) c.z_res_list = {std::max(0, c.z_tot - k2)};

  if (auto v = f.str("loss", "kind")) {
    if (*v == "quadratic") {
      c.loss = LossKind::kQuadratic;
    } else if (*v == "logistic") {
      c.loss = LossKind::kLogistic;
    } else {
      config_error("unknown loss kind '" + *v + "' (quadratic, logistic)");
    }
  }
  c.partitions = positive_size(f, "loss", "partitions", c.partitions);
  if (auto v = f.real("loss", "lambda")) c.lambda = *v;
  c.samples_per_partition = positive_size(f, "loss", "samples_per_partition", c.samples_per_partition);
  if (auto v = f.real("loss", "l2")) c.l2 = *v;
  if (auto v = f.real("loss", "separation")) c.separation = *v;
  if (c.loss == LossKind::kQuadratic && !(c.lambda > 0.0)) config_error("[loss] lambda must be > 0");
  if (c.l2 < 0.0) config_error("[loss] l2 must be >= 0");

  if (auto v = f.str("optimizer", "kind")) c.optimizer.kind = parse_optimizer(*v);
  if (auto v = f.str("optimizer", "schedule")) c.lr.kind = parse_schedule(*v);
  if (f.has("optimizer", "gamma") && f.has("optimizer", "gamma_scale")) {
    config_error("[optimizer] set gamma or gamma_scale, not both");
  }
  if (auto v = f.real("optimizer", "gamma")) {
    if (!(*v > 0.0)) config_error("[optimizer] gamma must be > 0");
    c.lr.gamma = *v;
    c.gamma_scale.reset();
  }
  if (auto v = f.real("optimizer", "gamma_scale")) {
    if (!(*v > 0.0)) config_error("[optimizer] gamma_scale must be > 0");
    c.gamma_scale = *v;
  }
  c.iterations = positive_size(f, "optimizer", "iterations", c.iterations);
  c.optimizer.batch = positive_size(f, "optimizer", "batch", c.optimizer.batch);
  if (auto v = f.real("optimizer", "adam_lambda")) c.optimizer.adam_lambda = *v;
  if (auto v = f.real("optimizer", "beta1")) c.optimizer.beta1 = *v;
  if (auto v = f.real("optimizer", "beta2")) c.optimizer.beta2 = *v;
  if (auto v = f.real("optimizer", "eps")) c.optimizer.eps = *v;
  if (c.lr.kind == Schedule::kInvLambdaT && c.loss == LossKind::kLogistic && !(c.l2 > 0.0)) {
    config_error("schedule inv_lambda_t needs a strongly convex loss (set [loss] l2 > 0)");
  }

  if (auto v = f.ints("verify", "checks")) c.checks = *v;

  if (o.out) {
    c.out_dir = *o.out;
  } else if (auto v = f.str("output", "dir")) {
    c.out_dir = *v;
  } else if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    c.out_dir = env;
  } else {
    c.out_dir = "agc_out";
  }
  if (o.seed) c.seed = *o.seed;
  return c;
}

Profiles make_profiles(const ExperimentConfig& cfg) {
  if (!cfg.p.empty()) return profiles_from_probabilities(cfg.p);
  Rng rng = Rng::keyed(cfg.seed, {kProfilesTag});
  return sample_profiles(cfg.k, cfg.psi_min, cfg.psi_max, cfg.tau_th, rng);
}

double resolve_eta(const ExperimentConfig& cfg, const Profiles& profiles) {
  if (cfg.eta == "balance") return balance_eta(profiles, cfg.z_tot, cfg.dim);
  double v = 0.0;
  const auto* first = cfg.eta.data();
  const auto* last = first + cfg.eta.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !(v > 0.0) || !std::isfinite(v)) {
    config_error("eta must be 1, balance or a positive number, got '" + cfg.eta + "'");
  }
  return v;
}

LossModel make_loss(const ExperimentConfig& cfg) {
  Rng rng = Rng::keyed(cfg.seed, {kLossTag});
  if (cfg.loss == LossKind::kQuadratic) return LossModel::make_quadratic(cfg.partitions, cfg.dim, cfg.lambda, rng);
  return LossModel::make_logistic(cfg.partitions, cfg.dim, cfg.samples_per_partition, rng, cfg.l2,
                                  cfg.separation);
}

// ---------------------------------------------------------------- design I/O

json design_to_json(const SavedDesign& s) {
  const auto& d = s.design;
  auto nonzeros = [](const SparseRows& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (const auto& e : m.row(i)) rows.push_back({i, e.col, e.value});
    }
    return rows;
  };
  json psi = json::array();
  for (const auto& w : s.profiles) psi.push_back(w.psi());
  return {
      {"format", "agc-design"},
      {"version", 1},
      {"scheme", s.scheme},
      {"dim", s.dim},
      {"k", d.k},
      {"n", d.n},
      {"p", d.p},
      {"psi", psi},
      {"bit_widths", s.bit_widths},
      {"cost", d.cost},
      {"targets", d.targets},
      {"decoder", d.decoder},
      {"effective_decoder", d.effective_decoder},
      {"encoding", nonzeros(d.encoding)},
      {"alpha", nonzeros(d.alpha)},
  };
}

SavedDesign design_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "agc-design" || j.at("version").get<int>() != 1) {
      config_error("not an agc-design v1 file");
    }
    SavedDesign s;
    s.scheme = j.at("scheme").get<std::string>();
    s.dim = j.at("dim").get<std::size_t>();
    s.bit_widths = j.at("bit_widths").get<std::vector<int>>();
    CodeDesign& d = s.design;
    d.k = j.at("k").get<std::size_t>();
    d.n = j.at("n").get<std::size_t>();
    d.p = j.at("p").get<std::vector<double>>();
    d.cost = j.at("cost").get<std::vector<double>>();
    d.targets = j.at("targets").get<std::vector<double>>();
    d.decoder = j.at("decoder").get<std::vector<double>>();
    d.effective_decoder = j.at("effective_decoder").get<std::vector<double>>();
    if (d.p.size() != d.k || d.targets.size() != d.k || d.decoder.size() != d.k ||
        d.effective_decoder.size() != d.k || (!d.cost.empty() && d.cost.size() != d.k) ||
        (!s.bit_widths.empty() && s.bit_widths.size() != d.k)) {
      config_error("design file: per-worker arrays must have length k");
    }
    auto read = [&](const json& rows) {
      SparseRows m(d.k, d.n);
      for (const auto& r : rows) {
        const auto i = r.at(0).get<std::size_t>();
        const auto c = r.at(1).get<std::size_t>();
        if (i >= d.k || c >= d.n) config_error("design file: nonzero outside the k x n grid");
        m.push(i, c, r.at(2).get<double>());
      }
      return m;
    };
    d.encoding = read(j.at("encoding"));
    d.alpha = read(j.at("alpha"));
    const auto psi = j.at("psi").get<std::vector<double>>();
    s.profiles = profiles_from_probabilities(d.p);
    if (psi.size() == d.k) {
      for (std::size_t i = 0; i < d.k; ++i) {
        if (psi[i] > 0.0) {
          // Keep psi when the stored probability is exactly reproduced by it.
          const double tau = 1.0 - std::log(d.p[i]) / psi[i];
          if (tau > 1.0 && straggler_prob(psi[i], tau) == d.p[i]) {
            s.profiles[i] = WorkerProfile::from_latency(static_cast<int>(i + 1), psi[i], tau);
          }
        }
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("design file: ") + e.what());
  }
}

namespace {

void print_design(const SavedDesign& s, std::ostream& out) {
  const auto& d = s.design;
  out << "scheme " << s.scheme << "  k=" << d.k << "  n=" << d.n << "  l=" << s.dim << "\n";
  out << "worker  p         z  Y         w         nnz\n";
  for (std::size_t i = 0; i < d.k; ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%-7zu %-9.6f %-2s %-9.6f %-9.6f %zu\n", i + 1, d.p[i],
                  s.bit_widths.empty() ? "-" : std::to_string(s.bit_widths[i]).c_str(),
                  d.targets[i], d.decoder[i], d.encoding.row(i).size());
    out << line;
  }
  const auto cols = d.alpha.col_sums();
  const auto [lo, hi] = std::minmax_element(cols.begin(), cols.end());
  char line[200];
  std::snprintf(line, sizeof line, "load d = %.6f\ncolumn sums: min %.6f max %.6f\n", d.load(),
                cols.empty() ? 0.0 : *lo, cols.empty() ? 0.0 : *hi);
  out << line;
  if (!d.cost.empty()) {
    std::snprintf(line, sizeof line, "residual error bound / C = %.6g\n",
                  residual_error_bound(d.cost, d.n, 1.0));
    out << line;
  }
  out << "alpha nonzeros (worker partition value):\n";
  for (std::size_t i = 0; i < d.k; ++i) {
    for (const auto& e : d.alpha.row(i)) {
      std::snprintf(line, sizeof line, "  %zu %zu %.6f\n", i + 1, e.col + 1, e.value);
      out << line;
    }
  }
}

}  // namespace

// ------------------------------------------------------------------ commands

int cmd_allocate(const ExperimentConfig& cfg, std::ostream& out) {
  const auto profiles = make_profiles(cfg);
  const auto p = probabilities(profiles);
  using Solver = BitAllocation (*)(std::span<const double>, std::size_t, int);
  const std::pair<const char*, Solver> solvers[] = {
      {"dp", &dp_allocate},
      {"proposed", &proposed_allocate},
      {"greedy", &greedy_allocate},
      {"lagrangian", &lagrangian_allocation},
      {"equal", &equal_allocation},
  };
  std::string csv = "solver,Z_res,F,gap_to_DP,wall_time_ms\n";
  for (int z : cfg.z_res_list) {
    double f_dp = 0.0;
    for (const auto& [name, solve] : solvers) {
      // Repeat until at least 2 ms have passed for a stable per-call time.
      BitAllocation a;
      std::size_t reps = 0;
      const auto t0 = std::chrono::steady_clock::now();
      double elapsed = 0.0;
      do {
        a = solve(p, cfg.dim, z);
        ++reps;
        elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      } while (elapsed < 2.0 && reps < 100000);
      if (std::string_view(name) == "dp") f_dp = a.objective;
      const double gap = f_dp > 0.0 ? (f_dp - a.objective) / f_dp : 0.0;
      csv += std::string(name) + "," + std::to_string(z) + "," + csv_number(a.objective) + "," +
             csv_number(gap) + "," + csv_number(elapsed / static_cast<double>(reps)) + "\n";
    }
  }
  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "allocation.csv", csv);
  out << csv;
  return kExitOk;
}

int cmd_design(const ExperimentConfig& cfg, const std::optional<std::string>& load_path,
               std::ostream& out) {
  if (load_path) {
    std::ifstream in(*load_path, std::ios::binary);
    if (!in) config_error("cannot open design file '" + *load_path + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kConfig, "design file '" + *load_path + "': " + e.what());
    }
    print_design(design_from_json(j), out);
    return kExitOk;
  }
  const auto& scheme = cfg.schemes.front();
  if (scheme.kind == SchemeKind::kIdealSgd) config_error("ideal_sgd has no code to design");
  const auto profiles = make_profiles(cfg);
  const double eta = resolve_eta(cfg, profiles);
  Rng rng = Rng::keyed(cfg.seed, {kDesignTag});
  const auto inst = build_scheme(scheme, profiles, cfg.partitions, cfg.dim, cfg.z_tot, eta, rng);
  SavedDesign saved{scheme.name(), cfg.dim, profiles, inst.bit_widths, *inst.design};
  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "design.json", design_to_json(saved).dump(2) + "\n");
  print_design(saved, out);
  return kExitOk;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
  const auto profiles = make_profiles(cfg);
  const double eta = resolve_eta(cfg, profiles);
  const auto loss = make_loss(cfg);
  const Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.dim));
  const bool gd = cfg.optimizer.kind == OptimizerKind::kGd;
  const bool sc_check = gd && loss.kind() == LossKind::kQuadratic && cfg.lr.kind == Schedule::kInvLambdaT;
  const bool smooth_check = gd && (cfg.lr.kind == Schedule::kConstSqrt || cfg.lr.kind == Schedule::kDecaySqrt);
  double grad_bound = 0.0;
  double l_star = 0.0;
  if (sc_check || smooth_check) {
    grad_bound = calibrate_C(loss, gd_trajectory(loss, beta0, 1.0 / loss.smoothness(), 100));
  }
  if (smooth_check) l_star = reference_min_loss(loss, beta0, 100000);

  std::string csv = "scheme,iteration,mean_loss,se_loss,mean_grad_sq,mean_dist_sq,cum_bits\n";
  json summary = {
      {"scenario", cfg.scenario},
      {"seed", cfg.seed},
      {"trials", cfg.trials},
      {"iterations", cfg.iterations},
      {"schedule", schedule_name(cfg.lr.kind)},
      {"loss",
       {{"kind", loss.kind() == LossKind::kQuadratic ? "quadratic" : "logistic"},
        {"strong_convexity", loss.strong_convexity()},
        {"smoothness", loss.smoothness()},
        {"initial_loss", loss.loss(beta0)}}},
      {"schemes", json::array()},
  };
  for (const auto& scheme : cfg.schemes) {
    const auto tc = train_config(cfg, scheme, profiles, loss, eta);
    const auto m = run_experiment(loss, tc);
    const std::string name = scheme.name();
    for (std::size_t t = 0; t < m.size(); ++t) {
      csv += name + "," + std::to_string(t) + "," + csv_number(m.mean_loss[t]) + "," +
             csv_number(m.se_loss[t]) + "," + csv_number(m.mean_grad_sq[t]) + "," +
             csv_number(m.mean_dist_sq[t]) + "," + csv_number(m.cum_bits[t]) + "\n";
    }
    const std::size_t t_end = m.size() - 1;
    json entry = {
        {"scheme", name},
        {"final_loss", number_or_null(m.mean_loss[t_end])},
        {"final_grad_sq", number_or_null(m.mean_grad_sq[t_end])},
        {"final_dist_sq", number_or_null(m.mean_dist_sq[t_end])},
        {"total_bits", m.cum_bits[t_end]},
        {"bound_check", nullptr},
    };
    // Rate bounds need the cost coefficients the code was designed for.
    std::vector<double> cost;
    if (scheme.kind != SchemeKind::kIdealSgd) {
      Rng rng(0);
      cost = build_scheme(scheme, profiles, loss.partitions(), loss.dim(), cfg.z_tot, eta, rng).design->cost;
    }
    if (!cost.empty() && sc_check) {
      json points = json::array();
      bool pass = true;
      for (std::size_t t = 1; t <= t_end; t *= 10) {
        const double b = strongly_convex_bound(cost, loss.partitions(), grad_bound, loss.strong_convexity(), t);
        pass = pass && m.mean_dist_sq[t] <= b;
        points.push_back({{"t", t}, {"measured", m.mean_dist_sq[t]}, {"bound", b}});
      }
      entry["bound_check"] = {{"kind", "strongly_convex"}, {"grad_bound", grad_bound}, {"points", points}, {"pass", pass}};
    } else if (!cost.empty() && smooth_check) {
      const double gap = loss.loss(beta0) - l_star;
      const double b = cfg.lr.kind == Schedule::kConstSqrt
                           ? smooth_const_bound(cost, loss.partitions(), grad_bound, loss.smoothness(), gap, t_end)
                           : smooth_decay_bound(cost, loss.partitions(), grad_bound, loss.smoothness(), gap, t_end);
      const double avg = m.running_grad_sq(t_end);
      entry["bound_check"] = {{"kind", "smooth"},         {"grad_bound", grad_bound},
                              {"reference_min_loss", l_star}, {"measured", avg},
                              {"bound", b},               {"pass", avg <= b}};
    }
    summary["schemes"].push_back(entry);
    char line[200];
    std::snprintf(line, sizeof line, "%-16s final loss %-12s bits %s\n", name.c_str(),
                  csv_number(m.mean_loss[t_end]).c_str(), csv_number(m.cum_bits[t_end]).c_str());
    out << line;
  }
  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "metrics.csv", csv);
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
  VerifyOptions opt;
  opt.seed = cfg.seed;
  auto ids = cfg.checks.empty() ? check_ids() : cfg.checks;
  const auto all = check_ids();
  for (int id : ids) {
    if (std::find(all.begin(), all.end(), id) == all.end()) {
      config_error("no acceptance check with id " + std::to_string(id));
    }
  }
  json report = json::array();
  bool ok = true;
  for (int id : ids) {
    const auto r = run_check(id, opt);
    ok = ok && r.pass;
    char head[160];
    std::snprintf(head, sizeof head, "[%s] %2d %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id,
                  r.name.c_str(), r.seconds);
    out << head << "       " << r.measured << "\n" << std::flush;
    report.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"measured", r.measured}});
  }
  const auto dir = prepare_out_dir(cfg);
  write_text(dir / "verify.json", report.dump(2) + "\n");
  return ok ? kExitOk : kExitCheckFailed;
}

// ----------------------------------------------------------------------- CLI

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"agc: coded, quantized gradient aggregation experiments"};
  app.require_subcommand(1);
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> scheme;
  std::optional<std::string> eta;
  std::optional<std::string> load_path;
  std::vector<int> checks;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory (default: $" + std::string(kOutDirEnv) + " or agc_out)");
    sub->add_option("--scheme", scheme, "scheme override, e.g. proposed or bgc:d=2");
    sub->add_option("--eta", eta, "cost weight: 1, balance or a number");
  };
  auto* allocate = app.add_subcommand("allocate", "compare bit allocation solvers");
  auto* design = app.add_subcommand("design", "build, print and save a code");
  auto* run = app.add_subcommand("run", "train and record metrics");
  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  for (auto* sub : {allocate, design, run, verify}) common(sub);
  design->add_option("--load", load_path, "print a saved design file instead");
  verify->add_option("--checks", checks, "subset of check ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ConfigFile file;
    if (config_path) {
      file = ConfigFile::load(*config_path);
      if (file.empty()) config_error("config '" + *config_path + "' is empty\n" + app.help());
    }
    auto cfg = resolve_config(file, Overrides{seed, out_dir, scheme, eta});
    if (!checks.empty()) cfg.checks = checks;
    if (allocate->parsed()) return cmd_allocate(cfg, out);
    if (design->parsed()) return cmd_design(cfg, load_path, out);
    if (run->parsed()) return cmd_run(cfg, out);
    return cmd_verify(cfg, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::kConfig ? kExitConfig : kExitCheckFailed;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace agc::cli
