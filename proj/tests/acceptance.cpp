// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nonlocal/causality.hpp"
#include "nonlocal/cli.hpp"
#include "nonlocal/dynamics.hpp"
#include "nonlocal/nosignal.hpp"
#include "nonlocal/protocol.hpp"

using namespace nonlocal;
using std::numbers::pi;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

SpacePtr pair_space() {
  return make_space({SubsystemSpec::mode("mA", 2, Site::A),
                     SubsystemSpec::mode("mB", 2, Site::B),
                     SubsystemSpec::two_level("sA", Site::A),
                     SubsystemSpec::two_level("sB", Site::B)});
}

StateVector swapped(const SpacePtr& space, double phi) {
  auto s = prepare_superposition(space, "mA", "mB", phi);
  s = apply_local(s, swap_unitary(*space, "mA", "sA"));
  return apply_local(s, swap_unitary(*space, "mB", "sB"));
}

// Projector oracle: eigenvectors of n.sigma in the (lower, upper) basis.
Vector axis_state(const BlochAxis& a, int sign) {
  const Complex i(0.0, 1.0);
  Matrix ns(2, 2);
  const double nx = std::sin(a.theta) * std::cos(a.azimuth);
  const double ny = std::sin(a.theta) * std::sin(a.azimuth);
  const double nz = std::cos(a.theta);
  ns << -nz, nx + i * ny, nx - i * ny, nz;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(ns);
  return eig.eigenvectors().col(sign > 0 ? 1 : 0);
}

std::vector<double> oracle_probabilities(double phi, const BlochAxis& a, const BlochAxis& b) {
  Vector psi = Vector::Zero(4);  // index 2 * sA + sB
  psi[2] = 1.0 / std::sqrt(2.0);
  psi[1] = std::polar(1.0, phi) / std::sqrt(2.0);
  std::vector<double> out;
  for (int sa : {+1, -1}) {
    for (int sb : {+1, -1}) {
      Vector v(4);
      const Vector va = axis_state(a, sa), vb = axis_state(b, sb);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) v[2 * r + c] = va[r] * vb[c];
      out.push_back(std::norm(v.dot(psi)));
    }
  }
  return out;
}

Check swap_correctness() {
  Check c;
  auto space = pair_space();
  double worst = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double phi = k * pi / 4;
    Vector target = Vector::Zero(static_cast<Eigen::Index>(space->dim()));
    target[static_cast<Eigen::Index>(space->encode(std::vector<int>{0, 0, 1, 0}))] =
        1.0 / std::sqrt(2.0);
    target[static_cast<Eigen::Index>(space->encode(std::vector<int>{0, 0, 0, 1}))] =
        std::polar(1.0, phi) / std::sqrt(2.0);
    const double f = fidelity(swapped(space, phi), StateVector(space, target));
    worst = std::max(worst, 1.0 - f);
  }
  c.require(worst <= 1e-12, "1 - F = " + num(worst));
  c.detail = c.ok ? "max 1 - F = " + num(worst) : c.detail;
  return c;
}

Check coincidence_law() {
  Check c;
  auto space = pair_space();
  double worst = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double phi = -pi + (k + 1) * pi / 8;
    const auto dist =
        outcome_distribution(swapped(space, phi), {{"sA", BlochAxis::x()}, {"sB", BlochAxis::x()}});
    const auto oracle = oracle_probabilities(phi, BlochAxis::x(), BlochAxis::x());
    const double same = (1 + std::cos(phi)) / 4, diff = (1 - std::cos(phi)) / 4;
    const double law[4] = {same, diff, diff, same};
    for (int i = 0; i < 4; ++i) {
      worst = std::max({worst, std::abs(dist.probabilities[i] - law[i]),
                        std::abs(dist.probabilities[i] - oracle[i])});
    }
  }
  c.require(worst <= 1e-12, "max deviation " + num(worst));
  if (c.ok) c.detail = "max deviation " + num(worst);
  return c;
}

Check phase_estimation() {
  Check c;
  auto space = pair_space();
  double worst_exact = 0.0, worst_sampled = 0.0;
  std::uint64_t seed = 500;
  for (int k = 0; k < 16; ++k) {
    const double phi = -pi + (k + 1) * pi / 8;
    const auto s = swapped(space, phi);
    const auto xx = outcome_distribution(s, {{"sA", BlochAxis::x()}, {"sB", BlochAxis::x()}});
    const auto xy = outcome_distribution(s, {{"sA", BlochAxis::x()}, {"sB", BlochAxis::y()}});
    worst_exact = std::max(worst_exact, std::abs(wrap_phase(estimate_phase(xx, xy) - phi)));
    const double hat =
        estimate_phase(sample_counts(xx, 100000, seed), sample_counts(xy, 100000, seed + 1));
    seed += 2;
    worst_sampled = std::max(worst_sampled, std::abs(wrap_phase(hat - phi)));
  }
  c.require(worst_exact <= 1e-12, "exact error " + num(worst_exact));
  c.require(worst_sampled <= 0.05, "sampled error " + num(worst_sampled));
  if (c.ok) c.detail = "exact " + num(worst_exact) + ", sampled " + num(worst_sampled);
  return c;
}

Check classical_drive_limit() {
  Check c;
  std::vector<double> f;
  for (double r : {2.0, 4.0, 8.0}) f.push_back(rotation_fidelity(r, 128, 1.0, pi / 2 / r).fidelity);
  c.require(f[2] >= 0.99, "F(8) = " + num(f[2]));
  c.require(f[0] < f[1] && f[1] < f[2], "not increasing");
  if (c.ok) c.detail = "F = " + num(f[0]) + ", " + num(f[1]) + ", " + num(f[2]);
  return c;
}

ScenarioConfig scenario(Model model, double phi, double chi, double q) {
  ScenarioConfig s;
  s.model = model;
  s.phi = phi;
  s.chi = chi;
  s.boson_charge = q;
  s.shots = 1000;
  s.drive.amplitude = {4.0, 4.0};
  s.drive.truncation = 48;
  return s;
}

Check marginal_no_signaling() {
  Check c;
  double worst = 0.0;
  for (Model m : {Model::naive, Model::charged_full, Model::gravitational}) {
    const double q = m == Model::gravitational ? 1.0 : -1.0;
    for (double chi_q : {0.0, pi / 2, pi}) {
      for (bool shift : {true, false}) {
        auto s = scenario(m, 0.0, chi_q / q, q);
        s.clock_shift_enabled = shift;
        const auto r = run_scenario(s);
        worst = std::max({worst, r.tv_marginal_a, r.tv_marginal_b});
      }
    }
  }
  c.require(worst <= 1e-10, "max marginal TV " + num(worst));
  if (c.ok) c.detail = "max marginal TV " + num(worst);
  return c;
}

Check apparent_signaling() {
  Check c;
  const double tv = run_scenario(scenario(Model::naive, 0.0, -pi, -1.0)).tv_joint;
  c.require(std::abs(tv - 1.0) <= 1e-10, "TV = " + num(tv));
  if (c.ok) c.detail = "TV = " + num(tv);
  return c;
}

Check exact_compensation() {
  Check c;
  auto before = scenario(Model::charged_full, 0.0, -pi, -1.0);
  auto after = before;
  after.kick_timing = KickTiming::after_swap;
  const double tv1 = run_scenario(before).tv_joint;
  const double tv2 = run_scenario(after).tv_joint;
  c.require(tv1 <= 1e-10, "pre-swap TV " + num(tv1));
  c.require(tv2 <= 1e-10, "post-swap TV " + num(tv2));
  if (c.ok) c.detail = "TV " + num(tv1) + " / " + num(tv2);
  return c;
}

Check gravitational_compensation() {
  Check c;
  const double m = 1.0;
  const double compensated = run_scenario(scenario(Model::gravitational, 0.0, pi / m, m)).tv_joint;
  auto off = scenario(Model::gravitational, 0.0, pi / m, m);
  off.clock_shift_enabled = false;
  const double uncompensated = run_scenario(off).tv_joint;
  c.require(compensated <= 1e-10, "compensated TV " + num(compensated));
  c.require(std::abs(uncompensated - 1.0) <= 1e-10, "unshifted TV " + num(uncompensated));
  double previous = -1.0;
  for (double eps : {0.1, 0.2, 0.4}) {
    auto s = scenario(Model::gravitational, 0.0, 1.0, m);
    s.clock_frequency = m * (1 + eps);
    const double tv = run_scenario(s).tv_joint;
    c.require(tv > previous, "TV not increasing at eps " + num(eps));
    previous = tv;
  }
  if (c.ok) c.detail = "TV " + num(compensated) + " / " + num(uncompensated);
  return c;
}

bool in_future(const SpacetimeRegion& r, double x, double t) {
  const double dx = x < r.x_min ? r.x_min - x : (x > r.x_max ? x - r.x_max : 0.0);
  return t - r.t_min >= dx;
}

bool grid_violation(const SpacetimeRegion& a, const SpacetimeRegion& b, const SpacetimeRegion& o) {
  for (double x = -50.0; x <= 50.0; x += 0.125)
    for (double t = -20.0; t <= 100.0; t += 0.125)
      if (in_future(a, x, t) && in_future(b, x, t) && !in_future(o, x, t)) return true;
  return false;
}

Check causality_criterion() {
  Check c;
  const SpacetimeRegion a{-2.0, -1.0, 1.0, 1.5}, b{1.0, 2.0, 1.0, 1.5};
  const SpacetimeRegion central{-0.2, 0.2, 0.0, 0.1}, displaced{10.0, 10.2, 0.0, 0.1};
  c.require(jamming_allowed(a, b, central).allowed, "central layout rejected");
  const auto v = jamming_allowed(a, b, displaced);
  c.require(!v.allowed && v.witness.has_value(), "displaced layout accepted");
  if (v.witness) {
    const auto w = *v.witness;
    c.require(in_future(a, w.x, w.t) && in_future(b, w.x, w.t) && !in_future(displaced, w.x, w.t),
              "invalid witness");
  }
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> xs(-20, 20), ts(0, 20), len(0, 6);
  auto region = [&] {
    const double x0 = 0.5 * xs(rng), t0 = 0.5 * ts(rng);
    return SpacetimeRegion{x0, x0 + 0.5 * len(rng), t0, t0 + 0.5 * len(rng)};
  };
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto ra = region(), rb = region(), ro = region();
    if (jamming_allowed(ra, rb, ro).allowed == !grid_violation(ra, rb, ro)) ++agree;
  }
  c.require(agree == 100, std::to_string(agree) + "/100 agree with grid oracle");
  if (c.ok) c.detail = "100/100 agree with grid oracle";
  return c;
}

Check reproducibility() {
  Check c;
  const std::filesystem::path data = NONLOCAL_TEST_DATA;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"correlations", "correlations.json"},
      {"estimate-phase", "estimate_phase.json"},
      {"nosignal", "nosignal.json"},
      {"causality", "causality.json"},
      {"rotation-fidelity", "rotation_fidelity.json"}};
  for (const auto& [cmd, config] : cases) {
    for (const char* format : {"csv", "json"}) {
      const std::string path = (data / config).string();
      const char* argv[] = {"nonlocal_cli", cmd.c_str(), "--config", path.c_str(),
                            "--seed",       "2024",      "--format", format};
      std::string outputs[2];
      for (auto& output : outputs) {
        std::ostringstream out, err;
        const int code = cli::run(8, argv, out, err);
        c.require(code == 0, cmd + " exited with " + std::to_string(code));
        output = out.str();
      }
      c.require(!outputs[0].empty() && outputs[0] == outputs[1],
                cmd + " " + format + " output differs");
    }
  }
  if (c.ok) c.detail = "5 subcommands x 2 formats identical";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"swap correctness", swap_correctness},
      {"coincidence law", coincidence_law},
      {"phase estimation", phase_estimation},
      {"classical drive limit", classical_drive_limit},
      {"marginal no-signaling", marginal_no_signaling},
      {"apparent signaling (naive)", apparent_signaling},
      {"exact compensation (charged)", exact_compensation},
      {"gravitational compensation", gravitational_compensation},
      {"causality criterion", causality_criterion},
      {"reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (!c.ok) ++failures;
    std::printf("%s criterion %zu: %s (%s)\n", c.ok ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), c.detail.c_str());
  }
  return failures == 0 ? 0 : 1;
}
