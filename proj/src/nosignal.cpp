#include "nonlocal/nosignal.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "nonlocal/dynamics.hpp"

namespace nonlocal {

namespace {

const std::string kBosonA = "boson_A";
const std::string kBosonB = "boson_B";
const std::string kSpinA = "spin_A";
const std::string kSpinB = "spin_B";
const std::string kDriveA = "drive_A";
const std::string kDriveB = "drive_B";

SpacePtr build_space(const ScenarioConfig& config) {
  const double q = config.boson_charge;
  // The upper level carries the absorbed quantum's charge, so the swap
  // conserves charge at each site.
  std::vector<SubsystemSpec> subsystems = {
      SubsystemSpec::mode(kBosonA, 2, Site::A, q),
      SubsystemSpec::mode(kBosonB, 2, Site::B, q),
      SubsystemSpec::two_level(kSpinA, Site::A, q),
      SubsystemSpec::two_level(kSpinB, Site::B, q),
  };
  if (config.model == Model::charged_full) {
    subsystems.push_back(SubsystemSpec::mode(kDriveA, config.drive.truncation, Site::A, q));
    subsystems.push_back(SubsystemSpec::mode(kDriveB, config.drive.truncation, Site::B, q));
  }
  return make_space(std::move(subsystems));
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.segment(i * b.size(), b.size()) = a[i] * b;
  }
  return out;
}

struct SitePulse {
  double phase;
  double duration;
};

SitePulse site_pulse(const ScenarioConfig& config, std::size_t site) {
  const BlochAxis& axis = site == 0 ? config.axis_a : config.axis_b;
  const auto pulse = drive_pulse_for(axis);
  const double amplitude = config.drive.amplitude[site];
  SitePulse out{pulse.phase, 0.0};
  if (config.drive.phase) out.phase = (*config.drive.phase)[site];
  if (config.drive.duration) {
    out.duration = (*config.drive.duration)[site];
  } else if (pulse.pulse_area != 0.0) {
    out.duration = pulse.pulse_area / (config.drive.coupling * amplitude);
  }
  return out;
}

StateVector initial_state(const ScenarioConfig& config, const SpacePtr& space) {
  if (config.model != Model::charged_full) {
    return prepare_superposition(space, kBosonA, kBosonB, config.phi);
  }
  auto core = make_space({space->subsystems().begin(), space->subsystems().begin() + 4});
  const Vector boson = prepare_superposition(core, kBosonA, kBosonB, config.phi).amplitudes();
  const int d = config.drive.truncation;
  const auto drive_a = coherent_state(
      std::polar(config.drive.amplitude[0], site_pulse(config, 0).phase), d);
  const auto drive_b = coherent_state(
      std::polar(config.drive.amplitude[1], site_pulse(config, 1).phase), d);
  return StateVector(space, kron(boson, kron(drive_a.amplitudes, drive_b.amplitudes)));
}

}  // namespace

std::string to_string(Model model) {
  switch (model) {
    case Model::naive:
      return "naive";
    case Model::charged_full:
      return "charged_full";
    case Model::gravitational:
      return "gravitational";
  }
  return "naive";
}

Model model_from_string(const std::string& name) {
  if (name == "naive") return Model::naive;
  if (name == "charged_full") return Model::charged_full;
  if (name == "gravitational") return Model::gravitational;
  throw std::invalid_argument("unknown model '" + name + "'");
}

void ScenarioConfig::validate() const {
  MeasurementSetting{kSpinA, axis_a}.validate();
  MeasurementSetting{kSpinB, axis_b}.validate();
  if (shots == 0) throw std::invalid_argument("shots must be >= 1");
  if (!std::isfinite(phi) || !std::isfinite(chi) || !std::isfinite(boson_charge)) {
    throw std::invalid_argument("phi, chi and boson charge must be finite");
  }
  if (model != Model::charged_full) return;
  if (drive.truncation < 2) throw std::invalid_argument("drive truncation must be >= 2");
  if (drive.coupling == 0.0 && !drive.duration) {
    throw std::invalid_argument("drive coupling must be nonzero");
  }
  for (std::size_t site = 0; site < 2; ++site) {
    const double amp = drive.amplitude[site];
    const double theta = site == 0 ? axis_a.theta : axis_b.theta;
    if (amp < 0.0) throw std::invalid_argument("drive amplitude must be >= 0");
    if (amp == 0.0 && theta != 0.0 && !drive.duration) {
      throw std::invalid_argument("a tilted measurement axis needs a drive with |alpha| > 0");
    }
  }
}

double tv_distance(const OutcomeDistribution& p, const OutcomeDistribution& q) {
  if (p.probabilities.size() != q.probabilities.size() ||
      p.settings.size() != q.settings.size()) {
    throw std::invalid_argument("tv_distance: outcome sets differ");
  }
  for (std::size_t k = 0; k < p.settings.size(); ++k) {
    if (p.settings[k].target != q.settings[k].target) {
      throw std::invalid_argument("tv_distance: measured targets differ");
    }
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
    sum += std::abs(p.probabilities[i] - q.probabilities[i]);
  }
  return std::min(1.0, 0.5 * sum);
}

RunResult run_pipeline(const ScenarioConfig& config, double chi) {
  config.validate();
  const SpacePtr space = build_space(config);
  StateVector state = initial_state(config, space);

  const auto kick = phase_kick(*space, {chi, Site::B});
  if (config.kick_timing == KickTiming::before_swap) state = apply_local(state, kick);
  state = apply_local(state, swap_unitary(*space, kBosonA, kSpinA));
  state = apply_local(state, swap_unitary(*space, kBosonB, kSpinB));
  if (config.kick_timing == KickTiming::after_swap) state = apply_local(state, kick);

  RunResult result;
  switch (config.model) {
    case Model::naive:
      state = apply_local(state, measurement_rotation({kSpinA, config.axis_a}));
      state = apply_local(state, measurement_rotation({kSpinB, config.axis_b}));
      break;
    case Model::gravitational: {
      BlochAxis axis_b = config.axis_b;
      if (config.clock_shift_enabled) {
        // B's oscillator phase runs ahead by omega0 * chi, which turns the
        // realized measurement axis back by the same angle.
        const double omega0 = config.clock_frequency.value_or(config.boson_charge);
        axis_b.azimuth = wrap_phase(axis_b.azimuth - omega0 * chi);
      }
      state = apply_local(state, measurement_rotation({kSpinA, config.axis_a}));
      state = apply_local(state, measurement_rotation({kSpinB, axis_b}));
      break;
    }
    case Model::charged_full: {
      const auto pa = site_pulse(config, 0);
      const auto pb = site_pulse(config, 1);
      auto ra = coherent_drive_rotation(state, kDriveA, kSpinA, config.drive.coupling,
                                        pa.duration);
      auto rb = coherent_drive_rotation(ra.state, kDriveB, kSpinB, config.drive.coupling,
                                        pb.duration);
      result.truncation_warning = ra.truncation_warning || rb.truncation_warning;
      state = std::move(rb.state);
      break;
    }
  }

  result.joint = outcome_distribution(
      state, {{kSpinA, BlochAxis::z()}, {kSpinB, BlochAxis::z()}});
  result.marginal_a = result.joint.marginal(0);
  result.marginal_b = result.joint.marginal(1);
  result.counts = sample_counts(result.joint, config.shots, config.seed);
  return result;
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
  ScenarioReport report;
  report.config = config;
  report.reference = run_pipeline(config, 0.0);
  report.kicked = run_pipeline(config, config.chi);
  report.tv_joint = tv_distance(report.reference.joint, report.kicked.joint);
  report.tv_marginal_a = tv_distance(report.reference.marginal_a, report.kicked.marginal_a);
  report.tv_marginal_b = tv_distance(report.reference.marginal_b, report.kicked.marginal_b);

  OutcomeDistribution ref_freq{report.reference.joint.settings,
                               report.reference.counts.frequencies()};
  OutcomeDistribution kick_freq{report.kicked.joint.settings,
                                report.kicked.counts.frequencies()};
  report.tv_joint_sampled = tv_distance(ref_freq, kick_freq);
  return report;
}

std::vector<SweepRow> compensation_sweep(const std::vector<ScenarioConfig>& configs) {
  if (configs.empty()) throw std::invalid_argument("sweep needs at least one config");
  std::vector<SweepRow> rows;
  rows.reserve(configs.size());
  for (const auto& config : configs) {
    const auto report = run_scenario(config);
    rows.push_back({config.model, config.phi, config.chi, config.boson_charge,
                    report.tv_joint, report.tv_marginal_a, report.tv_marginal_b});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "model,phi,chi,boson_charge,tv_joint,tv_marginal_A,tv_marginal_B\n";
  for (const auto& r : rows) {
    out << to_string(r.model) << ',' << format_double(r.phi) << ','
        << format_double(r.chi) << ',' << format_double(r.boson_charge) << ','
        << format_double(r.tv_joint) << ',' << format_double(r.tv_marginal_a) << ','
        << format_double(r.tv_marginal_b) << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json run_to_json(const RunResult& run) {
  return {{"joint", run.joint.probabilities},
          {"marginal_A", run.marginal_a.probabilities},
          {"marginal_B", run.marginal_b.probabilities},
          {"counts", run.counts.counts},
          {"truncation_warning", run.truncation_warning}};
}

}  // namespace

std::string report_to_json(const ScenarioReport& report, int indent) {
  const auto& c = report.config;
  nlohmann::json j;
  j["model"] = to_string(c.model);
  j["phi"] = c.phi;
  j["chi"] = c.chi;
  j["boson_charge"] = c.boson_charge;
  j["kick_timing"] = c.kick_timing == KickTiming::before_swap ? "before_swap" : "after_swap";
  j["axis_A"] = {c.axis_a.theta, c.axis_a.azimuth};
  j["axis_B"] = {c.axis_b.theta, c.axis_b.azimuth};
  j["shots"] = c.shots;
  j["seed"] = c.seed;
  if (c.model == Model::gravitational) {
    j["clock_shift_enabled"] = c.clock_shift_enabled;
    j["clock_frequency"] = c.clock_frequency.value_or(c.boson_charge);
  }
  j["outcome_order"] = {"++", "+-", "-+", "--"};
  j["no_kick"] = run_to_json(report.reference);
  j["kick"] = run_to_json(report.kicked);
  j["tv_joint"] = report.tv_joint;
  j["tv_marginal_A"] = report.tv_marginal_a;
  j["tv_marginal_B"] = report.tv_marginal_b;
  j["tv_joint_sampled"] = report.tv_joint_sampled;
  return j.dump(indent);
}

}  // namespace nonlocal
