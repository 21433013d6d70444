#include "nonlocal/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

#include "nonlocal/dynamics.hpp"

namespace nonlocal {

using std::numbers::pi;

namespace {

constexpr double kAngleSlack = 1e-12;
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

std::vector<int> default_levels(const CompositeSpace& space,
                                std::vector<int> levels) {
  if (levels.empty()) levels.assign(space.size(), 0);
  if (levels.size() != space.size()) {
    throw std::invalid_argument("expected one level per subsystem");
  }
  return levels;
}

void require_kind(const CompositeSpace& space, const std::string& label,
                  SubsystemKind kind) {
  if (space.subsystem(label).kind != kind) {
    throw std::invalid_argument(
        "'" + label + "' is not a " +
        (kind == SubsystemKind::bosonic_mode ? "bosonic mode" : "two-level system"));
  }
}

// Equal-weight superposition of two basis kets, second weighted by `phase`.
StateVector two_ket_superposition(SpacePtr space, std::vector<int> first,
                                  std::vector<int> second, Complex phase) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(space->dim()));
  amps[static_cast<Eigen::Index>(space->encode(first))] += kInvSqrt2;
  amps[static_cast<Eigen::Index>(space->encode(second))] += phase * kInvSqrt2;
  return StateVector(std::move(space), std::move(amps));
}

}  // namespace

void MeasurementSetting::validate() const {
  if (!(axis.theta >= -kAngleSlack && axis.theta <= pi + kAngleSlack)) {
    throw std::domain_error("polar angle of '" + target + "' outside [0, pi]");
  }
  if (!(axis.azimuth > -pi && axis.azimuth <= pi + kAngleSlack)) {
    throw std::domain_error("azimuth of '" + target + "' outside (-pi, pi]");
  }
}

double wrap_phase(double angle) {
  double w = std::remainder(angle, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

Matrix axis_eigenbasis(const BlochAxis& axis) {
  const double c = std::cos(axis.theta / 2);
  const double s = std::sin(axis.theta / 2);
  const Complex e = std::polar(1.0, axis.azimuth);
  Matrix basis(2, 2);
  // |+> = cos(theta/2)|up> + e^{i az} sin(theta/2)|down>
  basis(0, 0) = e * s;
  basis(1, 0) = c;
  // |-> = sin(theta/2)|up> - e^{i az} cos(theta/2)|down>
  basis(0, 1) = -e * c;
  basis(1, 1) = s;
  return basis;
}

Outcome outcome_of(std::size_t index, std::size_t targets) {
  Outcome out(targets);
  for (std::size_t k = 0; k < targets; ++k) {
    const std::size_t bit = (index >> (targets - 1 - k)) & 1U;
    out[k] = bit == 0 ? +1 : -1;
  }
  return out;
}

std::size_t index_of(const Outcome& outcome) {
  std::size_t index = 0;
  for (int v : outcome) {
    if (v != 1 && v != -1) throw std::invalid_argument("outcomes are +1 or -1");
    index = (index << 1) | (v == -1 ? 1U : 0U);
  }
  return index;
}

OutcomeDistribution OutcomeDistribution::marginal(std::size_t target) const {
  const std::size_t n = settings.size();
  if (target >= n) throw std::out_of_range("marginal target out of range");
  OutcomeDistribution m{{settings[target]}, {0.0, 0.0}};
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const int v = outcome_of(i, n)[target];
    m.probabilities[v == 1 ? 0 : 1] += probabilities[i];
  }
  return m;
}

double OutcomeDistribution::same_outcome_probability() const {
  if (settings.size() != 2) throw std::logic_error("needs two measured targets");
  return probabilities[0] + probabilities[3];
}

std::vector<double> CountsTable::frequencies() const {
  std::vector<double> f(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(shots);
  }
  return f;
}

double CountsTable::same_outcome_fraction() const {
  if (settings.size() != 2) throw std::logic_error("needs two measured targets");
  if (shots == 0) throw std::domain_error("counts table holds zero shots");
  return static_cast<double>(counts[0] + counts[3]) / static_cast<double>(shots);
}

StateVector prepare_superposition(SpacePtr space, const std::string& mode_a,
                                  const std::string& mode_b, double phi,
                                  std::vector<int> levels) {
  require_kind(*space, mode_a, SubsystemKind::bosonic_mode);
  require_kind(*space, mode_b, SubsystemKind::bosonic_mode);
  if (mode_a == mode_b) throw std::invalid_argument("modes must differ");
  levels = default_levels(*space, std::move(levels));
  const std::size_t a = space->position(mode_a);
  const std::size_t b = space->position(mode_b);
  auto first = levels;
  auto second = levels;
  first[a] = 1;
  first[b] = 0;
  second[a] = 0;
  second[b] = 1;
  return two_ket_superposition(std::move(space), first, second,
                               std::polar(1.0, phi));
}

StateVector epr_singlet(SpacePtr space, const std::string& spin_a,
                        const std::string& spin_b, std::vector<int> levels) {
  require_kind(*space, spin_a, SubsystemKind::two_level);
  require_kind(*space, spin_b, SubsystemKind::two_level);
  if (spin_a == spin_b) throw std::invalid_argument("spins must differ");
  levels = default_levels(*space, std::move(levels));
  const std::size_t a = space->position(spin_a);
  const std::size_t b = space->position(spin_b);
  auto up_down = levels;
  auto down_up = levels;
  up_down[a] = 1;
  up_down[b] = 0;
  down_up[a] = 0;
  down_up[b] = 1;
  return two_ket_superposition(std::move(space), up_down, down_up, -1.0);
}

LocalOperator ideal_rotation(const std::string& target, const BlochAxis& axis,
                             double angle) {
  const double nx = std::sin(axis.theta) * std::cos(axis.azimuth);
  const double ny = std::sin(axis.theta) * std::sin(axis.azimuth);
  const double nz = std::cos(axis.theta);
  const Complex i(0.0, 1.0);
  Matrix n_sigma(2, 2);
  n_sigma << -nz, nx + i * ny,
             nx - i * ny, nz;
  const Matrix u = std::cos(angle / 2) * Matrix::Identity(2, 2) -
                   i * std::sin(angle / 2) * n_sigma;
  return LocalOperator({target}, u, {.unitary = true}, kConstructionTol);
}

LocalOperator measurement_rotation(const MeasurementSetting& setting) {
  setting.validate();
  return ideal_rotation(setting.target,
                        {pi / 2, wrap_phase(setting.axis.azimuth - pi / 2)},
                        setting.axis.theta);
}

DrivePulse drive_pulse_for(const BlochAxis& axis) {
  return {wrap_phase(pi / 2 - axis.azimuth), axis.theta / 2};
}

bool drive_truncation_insufficient(double alpha_abs, int truncation) {
  return alpha_abs * alpha_abs + 3.0 * alpha_abs > truncation;
}

DriveRotation coherent_drive_rotation(const StateVector& state,
                                      const std::string& drive_mode,
                                      const std::string& target, double g,
                                      double t) {
  const auto& space = state.space();
  const auto h = build_hamiltonian(space, JaynesCummings{drive_mode, target, g});

  // Mean photon number of the drive decides whether the cutoff is adequate.
  const std::size_t pos = space.position(drive_mode);
  const int d = space.dimension(pos);
  Eigen::VectorXd number = Eigen::VectorXd::LinSpaced(d, 0.0, d - 1.0);
  const LocalOperator n_op({drive_mode}, Matrix(number.cast<Complex>().asDiagonal()),
                           {.hermitian = true});
  const double mean_n = expectation(state, n_op);
  const bool warn = drive_truncation_insufficient(std::sqrt(std::max(mean_n, 0.0)), d);

  return {evolve(state, h, t), warn};
}

Vector classical_drive_target(Complex alpha, double g, double t) {
  const double r = std::abs(alpha);
  Vector psi(2);
  psi[0] = std::cos(r * g * t);
  psi[1] = r == 0.0 ? Complex(0.0)
                    : alpha / (Complex(0.0, 1.0) * r) * std::sin(r * g * t);
  return psi;
}

RotationFidelity rotation_fidelity(Complex alpha, int truncation, double g,
                                   double t) {
  const auto coherent = coherent_state(alpha, truncation);
  auto space = make_space({SubsystemSpec::mode("drive", truncation, Site::A),
                           SubsystemSpec::two_level("atom", Site::A)});
  Vector ground(2);
  ground << 1.0, 0.0;
  const auto start = product_state(space, {coherent.amplitudes, ground});
  const auto rotated = coherent_drive_rotation(start, "drive", "atom", g, t);
  const Matrix rho = partial_trace(rotated.state, {"atom"});
  const double f = fidelity(rho, classical_drive_target(alpha, g, t));
  return {alpha, f, 1.0 - f, coherent.truncation_deficit,
          coherent.truncation_warning ||
              drive_truncation_insufficient(std::abs(alpha), truncation)};
}

OutcomeDistribution outcome_distribution(
    const StateVector& state, const std::vector<MeasurementSetting>& settings) {
  if (settings.empty()) throw std::invalid_argument("no measurement settings");
  std::set<std::string> seen;
  std::vector<std::string> targets;
  for (const auto& s : settings) {
    s.validate();
    if (!seen.insert(s.target).second) {
      throw std::invalid_argument("duplicate measurement target '" + s.target + "'");
    }
    require_kind(state.space(), s.target, SubsystemKind::two_level);
    targets.push_back(s.target);
  }

  // Change each measured factor into its (+axis, -axis) basis.
  StateVector rotated = state;
  for (const auto& s : settings) {
    const Matrix to_axis = axis_eigenbasis(s.axis).adjoint();
    rotated = apply_local(rotated, LocalOperator({s.target}, to_axis,
                                                 {.unitary = true}));
  }

  const auto e = detail::embed(state.space(), targets);
  OutcomeDistribution dist{settings, std::vector<double>(e.offsets.size(), 0.0)};
  for (std::size_t base : e.bases) {
    for (std::size_t j = 0; j < e.offsets.size(); ++j) {
      dist.probabilities[j] += std::norm(rotated[base + e.offsets[j]]);
    }
  }
  double total = 0.0;
  for (double p : dist.probabilities) total += p;
  if (std::abs(total - 1.0) > kPropagatedTol) {
    throw InvariantViolation("outcome probabilities sum to " + std::to_string(total));
  }
  return dist;
}

double uniform_from_counter(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

CountsTable sample_counts(const OutcomeDistribution& dist, std::uint64_t shots,
                          std::uint64_t seed, unsigned workers) {
  if (shots == 0) throw std::domain_error("shots must be >= 1");
  const auto& p = dist.probabilities;
  std::vector<double> cdf(p.size());
  double running = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    running += std::max(p[i], 0.0);
    cdf[i] = running;
    if (p[i] > 0.0) last_nonzero = i;
  }
  if (!(running > 0.0)) throw std::domain_error("distribution has no mass");

  auto draw_range = [&](std::uint64_t first, std::uint64_t last) {
    std::vector<std::uint64_t> counts(p.size(), 0);
    for (std::uint64_t k = first; k < last; ++k) {
      const double u = uniform_from_counter(seed, k) * running;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const auto bucket = static_cast<std::size_t>(it - cdf.begin());
      ++counts[std::min(bucket, last_nonzero)];
    }
    return counts;
  };

  CountsTable table{dist.settings, shots, std::vector<std::uint64_t>(p.size(), 0), seed};
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(
                                                         std::min<std::uint64_t>(shots, 64))));
  std::vector<std::vector<std::uint64_t>> partial(workers);
  {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t first = shots * w / workers;
      const std::uint64_t last = shots * (w + 1) / workers;
      threads.emplace_back([&, w, first, last] { partial[w] = draw_range(first, last); });
    }
  }
  for (const auto& counts : partial) {
    for (std::size_t i = 0; i < counts.size(); ++i) table.counts[i] += counts[i];
  }
  return table;
}

CountsTable sample_counts(const StateVector& state,
                          const std::vector<MeasurementSetting>& settings,
                          std::uint64_t shots, std::uint64_t seed) {
  return sample_counts(outcome_distribution(state, settings), shots, seed);
}

double estimate_phase(double same_xx, double same_xy) {
  const double c = 2.0 * same_xx - 1.0;
  const double s = kSinCoefficient * (2.0 * same_xy - 1.0);
  return wrap_phase(std::atan2(s, c));
}

namespace {

bool same_axis(const BlochAxis& a, const BlochAxis& b) {
  return std::abs(a.theta - b.theta) < 1e-9 &&
         std::abs(wrap_phase(a.azimuth - b.azimuth)) < 1e-9;
}

void require_settings(const std::vector<MeasurementSetting>& settings,
                      const BlochAxis& second, const char* name) {
  if (settings.size() != 2 || !same_axis(settings[0].axis, BlochAxis::x()) ||
      !same_axis(settings[1].axis, second)) {
    throw std::invalid_argument(std::string("estimate_phase: ") + name +
                                " input must be measured along " + name);
  }
}

}  // namespace

double estimate_phase(const CountsTable& counts_xx, const CountsTable& counts_xy) {
  require_settings(counts_xx.settings, BlochAxis::x(), "xx");
  require_settings(counts_xy.settings, BlochAxis::y(), "xy");
  return estimate_phase(counts_xx.same_outcome_fraction(),
                        counts_xy.same_outcome_fraction());
}

double estimate_phase(const OutcomeDistribution& dist_xx,
                      const OutcomeDistribution& dist_xy) {
  require_settings(dist_xx.settings, BlochAxis::x(), "xx");
  require_settings(dist_xy.settings, BlochAxis::y(), "xy");
  return estimate_phase(dist_xx.same_outcome_probability(),
                        dist_xy.same_outcome_probability());
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string setting_label(const MeasurementSetting& setting) {
  return format_double(setting.axis.theta) + ":" +
         format_double(setting.axis.azimuth);
}

std::string counts_to_csv(const CountsTable& counts) {
  if (counts.settings.size() != 2) {
    throw std::invalid_argument("CSV export needs exactly two settings");
  }
  std::ostringstream out;
  out << "setting_A,setting_B,outcome_A,outcome_B,count\n";
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    const auto o = outcome_of(i, 2);
    out << setting_label(counts.settings[0]) << ','
        << setting_label(counts.settings[1]) << ',' << o[0] << ',' << o[1] << ','
        << counts.counts[i] << '\n';
  }
  return out.str();
}

}  // namespace nonlocal
