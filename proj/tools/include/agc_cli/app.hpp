// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "agc/baselines.hpp"
#include "agc/code_design.hpp"
#include "agc/sim.hpp"
#include "agc/straggler.hpp"
#include "agc_cli/config.hpp"

namespace agc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "AGC_OUT_DIR";

/// Fully resolved experiment settings; defaults reproduce the standard
/// k = 10 heterogeneous cluster.
struct ExperimentConfig {
  std::string scenario = "default";
  std::uint64_t seed = 20260101;
  std::size_t trials = 10;

  // [workers]
  std::size_t k = 10;
  double psi_min = 0.1;
  double psi_max = 2.0;
  double tau_th = 1.1;
  std::vector<double> p;  // explicit probabilities override the latency model

  // [budget]
  int z_tot = 0;  // resolved: z_tot, or z_res + 2k, or 4k
  std::size_t dim = 32;
  std::vector<int> z_res_list;  // allocate sweep; defaults to {z_tot - 2k}

  // [scheme]
  std::vector<SchemeSpec> schemes{SchemeSpec{SchemeKind::kProposed}};
  std::string eta = "1";  // "1", "balance" or a number

  // [loss]
  LossKind loss = LossKind::kQuadratic;
  std::size_t partitions = 20;
  double lambda = 1.0;
  std::size_t samples_per_partition = 5;
  double l2 = 0.0;
  double separation = 1.0;

  // [optimizer]
  OptimizerConfig optimizer;
  LrSchedule lr{Schedule::kFixed, 0.0};
  std::optional<double> gamma_scale = 0.05;  // gamma = scale / mu when set
  std::size_t iterations = 1000;

  // [output]
  std::string out_dir;

  // [verify]
  std::vector<int> checks;
};

/// Command-line overrides applied on top of the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> scheme;
  std::optional<std::string> eta;
};

ExperimentConfig resolve_config(const ConfigFile& file, const Overrides& overrides);

Profiles make_profiles(const ExperimentConfig& cfg);
double resolve_eta(const ExperimentConfig& cfg, const Profiles& profiles);
LossModel make_loss(const ExperimentConfig& cfg);

/// "%.6g" with '.' decimal; nan and inf spelled out.
std::string csv_number(double v);

/// Design file: scheme, dim, probabilities, bit widths and every CodeDesign
/// field. Doubles round-trip exactly.
struct SavedDesign {
  std::string scheme;
  std::size_t dim = 0;
  Profiles profiles;
  std::vector<int> bit_widths;
  CodeDesign design;
};
nlohmann::json design_to_json(const SavedDesign& saved);
SavedDesign design_from_json(const nlohmann::json& j);

/// Each command writes its files under cfg.out_dir and a human summary to
/// `out`. Return values are exit codes.
int cmd_allocate(const ExperimentConfig& cfg, std::ostream& out);
int cmd_design(const ExperimentConfig& cfg, const std::optional<std::string>& load_path,
               std::ostream& out);
int cmd_run(const ExperimentConfig& cfg, std::ostream& out);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out);

/// Full command line including argv[0].
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agc::cli
