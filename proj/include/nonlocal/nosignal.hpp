#pragma once

// Kick vs no-kick experiments on the delocalized boson in three models:
//
//   naive          ideal rotations, the kick phases only what sits at B
//   charged_full   rotations driven by charged coherent cavities that the kick
//                  also phases
//   gravitational  neutral boson of mass m; optionally B's local oscillator
//                  runs ahead by omega0 * chi
//
// Every run prepares the boson, kicks region B, swaps onto the two-level pair,
// rotates into the measurement basis and measures both two-level systems in
// the occupation basis.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nonlocal/protocol.hpp"

namespace nonlocal {

enum class Model { naive, charged_full, gravitational };
enum class KickTiming { before_swap, after_swap };

std::string to_string(Model model);
Model model_from_string(const std::string& name);

struct DriveConfig {
  std::array<double, 2> amplitude{4.0, 4.0};  // |alpha| at A, B
  // Overrides for arg(alpha) and interaction time; derived from the
  // measurement axes when absent.
  std::optional<std::array<double, 2>> phase;
  std::optional<std::array<double, 2>> duration;
  int truncation = 48;
  double coupling = 1.0;
};

struct ScenarioConfig {
  Model model = Model::naive;
  double phi = 0.0;
  double chi = 0.0;
  double boson_charge = -1.0;  // charge q, or mass m for gravitational
  DriveConfig drive;
  BlochAxis axis_a = BlochAxis::x();
  BlochAxis axis_b = BlochAxis::x();
  std::uint64_t shots = 10000;
  std::uint64_t seed = 0;
  bool clock_shift_enabled = true;
  std::optional<double> clock_frequency;  // omega0; defaults to m
  KickTiming kick_timing = KickTiming::before_swap;

  /// Throws std::invalid_argument / std::domain_error on inconsistent fields.
  void validate() const;
};

struct RunResult {
  OutcomeDistribution joint;
  OutcomeDistribution marginal_a;
  OutcomeDistribution marginal_b;
  CountsTable counts;
  bool truncation_warning = false;
};

struct ScenarioReport {
  ScenarioConfig config;
  RunResult reference;  // chi = 0
  RunResult kicked;
  double tv_joint = 0.0;
  double tv_marginal_a = 0.0;
  double tv_marginal_b = 0.0;
  double tv_joint_sampled = 0.0;
};

/// 1/2 sum |p_i - q_i|; throws when the outcome sets differ.
double tv_distance(const OutcomeDistribution& p, const OutcomeDistribution& q);

/// One pass of the pipeline at the given kick strength.
RunResult run_pipeline(const ScenarioConfig& config, double chi);

ScenarioReport run_scenario(const ScenarioConfig& config);

struct SweepRow {
  Model model;
  double phi;
  double chi;
  double boson_charge;
  double tv_joint;
  double tv_marginal_a;
  double tv_marginal_b;
};

std::vector<SweepRow> compensation_sweep(const std::vector<ScenarioConfig>& configs);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::string report_to_json(const ScenarioReport& report, int indent = 2);

}  // namespace nonlocal
