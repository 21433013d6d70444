#pragma once

// State preparation, rotations, projective measurement and statistics for the
// single-boson nonlocality experiments.
//
// Spin conventions in the (lower, upper) index basis:
//   sigma_z = diag(-1, +1), sigma_x = [[0, 1], [1, 0]], sigma_y = [[0, i], [-i, 0]]
// so the upper level sits at the north pole of the Bloch sphere and outcome +1
// means "found in |+axis>".

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "nonlocal/hilbert.hpp"

namespace nonlocal {

struct BlochAxis {
  double theta = 0.0;    // polar angle, [0, pi]
  double azimuth = 0.0;  // (-pi, pi]

  static BlochAxis x() { return {std::numbers::pi / 2, 0.0}; }
  static BlochAxis y() { return {std::numbers::pi / 2, std::numbers::pi / 2}; }
  static BlochAxis z() { return {0.0, 0.0}; }
};

struct MeasurementSetting {
  std::string target;
  BlochAxis axis;

  /// Throws std::domain_error when the angles fall outside their ranges.
  void validate() const;
};

/// Wraps an angle to (-pi, pi].
double wrap_phase(double angle);

/// |+axis> and |-axis> as columns of a 2x2 matrix, (lower, upper) basis.
Matrix axis_eigenbasis(const BlochAxis& axis);

// Outcome indices enumerate joint results with +1 before -1, first target
// most significant: for two targets the order is (++, +-, -+, --).
using Outcome = std::vector<int>;

Outcome outcome_of(std::size_t index, std::size_t targets);
std::size_t index_of(const Outcome& outcome);

struct OutcomeDistribution {
  std::vector<MeasurementSetting> settings;
  std::vector<double> probabilities;

  double probability(const Outcome& outcome) const {
    return probabilities.at(index_of(outcome));
  }
  /// Marginal over a single measured target.
  OutcomeDistribution marginal(std::size_t target) const;
  /// Probability that all outcomes agree (two targets).
  double same_outcome_probability() const;
};

struct CountsTable {
  std::vector<MeasurementSetting> settings;
  std::uint64_t shots = 0;
  std::vector<std::uint64_t> counts;
  std::uint64_t seed = 0;

  std::uint64_t count(const Outcome& outcome) const {
    return counts.at(index_of(outcome));
  }
  std::vector<double> frequencies() const;
  double same_outcome_fraction() const;
};

/// (|1>_A|0>_B + e^{i phi}|0>_A|1>_B)/sqrt(2) on the two modes; every other
/// subsystem sits in `levels` (defaults to all zero when empty).
StateVector prepare_superposition(SpacePtr space, const std::string& mode_a,
                                  const std::string& mode_b, double phi,
                                  std::vector<int> levels = {});

/// (|up,down> - |down,up>)/sqrt(2) on the two two-level systems.
StateVector epr_singlet(SpacePtr space, const std::string& spin_a,
                        const std::string& spin_b, std::vector<int> levels = {});

/// exp(-i angle (n . sigma) / 2) on a two-level target.
LocalOperator ideal_rotation(const std::string& target, const BlochAxis& axis,
                             double angle);

/// The rotation taking |+axis> to |upper> (up to phase): rotation by the
/// polar angle about the equatorial axis at azimuth (axis.azimuth - pi/2).
LocalOperator measurement_rotation(const MeasurementSetting& setting);

/// Drive phase and pulse area of the coherent drive that performs
/// measurement_rotation: arg(alpha) = pi/2 - azimuth, g|alpha|t = theta/2.
struct DrivePulse {
  double phase;
  double pulse_area;
};
DrivePulse drive_pulse_for(const BlochAxis& axis);

struct DriveRotation {
  StateVector state;
  bool truncation_warning;
};

/// Jaynes-Cummings evolution of (drive_mode, target) for time t.
DriveRotation coherent_drive_rotation(const StateVector& state,
                                      const std::string& drive_mode,
                                      const std::string& target, double g,
                                      double t);

/// cos(|a| g t)|g> + (a/(i|a|)) sin(|a| g t)|e>: the classical-drive limit.
Vector classical_drive_target(Complex alpha, double g, double t);

struct RotationFidelity {
  Complex alpha;
  double fidelity;
  double deficit;
  double truncation_deficit;
  bool truncation_warning;
};

/// Starts |alpha>|g>, evolves under JC for t and compares the reduced atom
/// state with classical_drive_target.
RotationFidelity rotation_fidelity(Complex alpha, int truncation, double g,
                                   double t);

bool drive_truncation_insufficient(double alpha_abs, int truncation);

OutcomeDistribution outcome_distribution(
    const StateVector& state, const std::vector<MeasurementSetting>& settings);

/// Multinomial sample through the counter-based stream: shot k draws
/// uniform_from_counter(seed, k), so splitting the shots over `workers`
/// threads gives the same table as a sequential run.
CountsTable sample_counts(const OutcomeDistribution& dist, std::uint64_t shots,
                          std::uint64_t seed, unsigned workers = 1);
CountsTable sample_counts(const StateVector& state,
                          const std::vector<MeasurementSetting>& settings,
                          std::uint64_t shots, std::uint64_t seed);

/// SplitMix64 finalizer applied to seed + (counter + 1) * golden gamma; the
/// top 53 bits give a double in [0, 1).
double uniform_from_counter(std::uint64_t seed, std::uint64_t counter);

/// phi from the x(x)x and x(x)y same-outcome fractions:
/// cos phi = 2 s_xx - 1 and sin phi = kSinCoefficient * (2 s_xy - 1).
inline constexpr double kSinCoefficient = -1.0;
double estimate_phase(double same_xx, double same_xy);
double estimate_phase(const CountsTable& counts_xx, const CountsTable& counts_xy);
double estimate_phase(const OutcomeDistribution& dist_xx,
                      const OutcomeDistribution& dist_xy);

/// Label written for a setting in CSV output: "theta:azimuth".
std::string setting_label(const MeasurementSetting& setting);

/// CSV: setting_A,setting_B,outcome_A,outcome_B,count
std::string counts_to_csv(const CountsTable& counts);

/// Formats a double with the shortest representation that round-trips.
std::string format_double(double value);

}  // namespace nonlocal
