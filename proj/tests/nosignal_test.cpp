#include "nonlocal/nosignal.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <json.hpp>

using namespace nonlocal;
using std::numbers::pi;

namespace {

ScenarioConfig naive(double phi, double chi, double q = -1.0) {
  ScenarioConfig c;
  c.model = Model::naive;
  c.phi = phi;
  c.chi = chi;
  c.boson_charge = q;
  c.shots = 2000;
  return c;
}

ScenarioConfig charged(double phi, double chi, KickTiming timing = KickTiming::before_swap) {
  ScenarioConfig c = naive(phi, chi);
  c.model = Model::charged_full;
  c.drive.amplitude = {4.0, 4.0};
  c.drive.truncation = 48;
  c.kick_timing = timing;
  return c;
}

ScenarioConfig gravitational(double phi, double chi, double m) {
  ScenarioConfig c = naive(phi, chi, m);
  c.model = Model::gravitational;
  return c;
}

// For x(x)x after the swap the same-outcome probability is (1 + cos phi)/2
// and the kick shifts the relative phase by q chi, so the two joint
// distributions differ in total variation by |cos phi - cos(phi + q chi)| / 2.
double naive_tv_oracle(double phi, double q_chi) {
  return std::abs(std::cos(phi) - std::cos(phi + q_chi)) / 2;
}

}  // namespace

TEST(TvDistance, examples) {
  const std::vector<MeasurementSetting> s = {{"a", BlochAxis::z()}};
  EXPECT_DOUBLE_EQ(tv_distance({s, {1.0, 0.0}}, {s, {0.0, 1.0}}), 1.0);
  EXPECT_DOUBLE_EQ(tv_distance({s, {0.5, 0.5}}, {s, {0.5, 0.5}}), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance({s, {0.25, 0.75}}, {s, {0.5, 0.5}}), 0.25);
  EXPECT_THROW(tv_distance({s, {1.0, 0.0}}, {{{"a", BlochAxis::z()}, {"b", BlochAxis::z()}},
                                             {1.0, 0.0, 0.0, 0.0}}),
               std::invalid_argument);
  EXPECT_THROW(tv_distance({s, {1.0, 0.0}}, {{{"b", BlochAxis::z()}}, {1.0, 0.0}}),
               std::invalid_argument);
}

TEST(Naive, full_signal_at_half_turn) {
  const auto r = run_scenario(naive(0.0, pi));
  EXPECT_NEAR(r.tv_joint, 1.0, 1e-12);
  EXPECT_NEAR(r.tv_marginal_a, 0.0, 1e-12);
  EXPECT_NEAR(r.tv_marginal_b, 0.0, 1e-12);
  EXPECT_GT(r.tv_joint_sampled, 0.95);
}

TEST(Naive, matches_closed_form_over_grid) {
  for (double phi : {-2.5, -1.0, 0.0, 0.7, 2.0, pi}) {
    for (double chi : {-3.0, -0.4, 0.0, 0.9, 2.2}) {
      for (double q : {-1.0, 0.5, 2.0}) {
        const auto r = run_scenario(naive(phi, chi, q));
        EXPECT_NEAR(r.tv_joint, naive_tv_oracle(phi, q * chi), 1e-12)
            << phi << " " << chi << " " << q;
      }
    }
  }
}

TEST(Naive, kick_timing_is_irrelevant) {
  for (double chi : {0.3, 1.7, pi}) {
    auto before = naive(0.4, chi);
    auto after = before;
    after.kick_timing = KickTiming::after_swap;
    EXPECT_NEAR(run_scenario(before).tv_joint, run_scenario(after).tv_joint, 1e-12);
  }
}

TEST(Naive, symmetric_and_periodic_in_chi) {
  const double q = -1.0;
  for (double chi : {0.3, 1.1, 2.9}) {
    EXPECT_NEAR(run_scenario(naive(0.0, chi, q)).tv_joint,
                run_scenario(naive(0.0, -chi, q)).tv_joint, 1e-12);
    EXPECT_NEAR(run_scenario(naive(0.6, chi, q)).tv_joint,
                run_scenario(naive(0.6, chi + 2 * pi / std::abs(q), q)).tv_joint, 1e-12);
  }
}

TEST(Naive, zero_kick_gives_identical_runs) {
  const auto r = run_scenario(naive(1.0, 0.0));
  EXPECT_EQ(r.tv_joint, 0.0);
  EXPECT_EQ(r.reference.counts.counts, r.kicked.counts.counts);
}

TEST(ChargedFull, kick_leaves_statistics_invariant) {
  for (auto timing : {KickTiming::before_swap, KickTiming::after_swap}) {
    for (double chi : {pi, 1.3, -2.0}) {
      const auto r = run_scenario(charged(0.0, chi, timing));
      EXPECT_LE(r.tv_joint, 1e-10) << chi;
      EXPECT_LE(r.tv_marginal_a, 1e-10);
      EXPECT_LE(r.tv_marginal_b, 1e-10);
      EXPECT_EQ(r.reference.counts.counts, r.kicked.counts.counts);
    }
  }
}

TEST(ChargedFull, reproduces_interference_approximately) {
  // With the drive in the classical regime the joint statistics approach the
  // ideal-rotation ones.
  for (double phi : {0.0, pi / 2, pi}) {
    const auto full = run_pipeline(charged(phi, 0.0), 0.0).joint;
    const auto ideal = run_pipeline(naive(phi, 0.0), 0.0).joint;
    EXPECT_LE(tv_distance(full, ideal), 0.1) << phi;
  }
}

TEST(ChargedFull, flags_tight_truncation) {
  auto c = charged(0.0, 1.0);
  c.drive.truncation = 20;
  EXPECT_TRUE(run_pipeline(c, 0.0).truncation_warning);
  EXPECT_FALSE(run_pipeline(charged(0.0, 1.0), 0.0).truncation_warning);
}

TEST(Gravitational, clock_shift_cancels_exactly) {
  for (double m : {0.5, 1.0, 3.0}) {
    for (double chi : {0.2, pi / m, 1.9}) {
      for (double phi : {0.0, 1.0}) {
        const auto r = run_scenario(gravitational(phi, chi, m));
        EXPECT_LE(r.tv_joint, 1e-12) << m << " " << chi;
        EXPECT_LE(r.tv_marginal_a, 1e-12);
        EXPECT_LE(r.tv_marginal_b, 1e-12);
      }
    }
  }
}

TEST(Gravitational, without_clock_shift_behaves_like_naive) {
  auto c = gravitational(0.0, pi, 1.0);
  c.clock_shift_enabled = false;
  EXPECT_NEAR(run_scenario(c).tv_joint, 1.0, 1e-12);
}

TEST(Gravitational, mismatched_clock_grows_with_mismatch) {
  const double m = 1.0;
  const double chi = 1.0;
  double previous = 0.0;
  for (double eps : {0.1, 0.2, 0.4}) {
    auto c = gravitational(0.0, chi, m);
    c.clock_frequency = m * (1 + eps);
    const double tv = run_scenario(c).tv_joint;
    EXPECT_NEAR(tv, naive_tv_oracle(0.0, eps * m * chi), 1e-12);
    EXPECT_GT(tv, previous);
    previous = tv;
  }
}

TEST(Sweep, endpoints_and_csv) {
  std::vector<ScenarioConfig> configs;
  for (double chi : {0.0, pi / 2, pi}) configs.push_back(naive(0.0, chi));
  const auto rows = compensation_sweep(configs);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].tv_joint, 0.0, 1e-12);
  EXPECT_NEAR(rows[1].tv_joint, 0.5, 1e-12);
  EXPECT_NEAR(rows[2].tv_joint, 1.0, 1e-12);
  const std::string csv = sweep_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,phi,chi,boson_charge,tv_joint,tv_marginal_A,tv_marginal_B");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_THROW(compensation_sweep({}), std::invalid_argument);
}

TEST(Report, json_fields) {
  const auto j = nlohmann::json::parse(report_to_json(run_scenario(gravitational(0.0, 1.0, 2.0))));
  EXPECT_EQ(j["model"], "gravitational");
  EXPECT_EQ(j["clock_frequency"], 2.0);
  EXPECT_EQ(j["no_kick"]["joint"].size(), 4u);
  EXPECT_EQ(j["kick"]["counts"].size(), 4u);
  EXPECT_TRUE(j.contains("tv_joint_sampled"));
}

TEST(ScenarioConfig, validation) {
  auto c = naive(0.0, 1.0);
  c.shots = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = naive(std::nan(""), 1.0);
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = naive(0.0, 1.0);
  c.axis_a.theta = 4.0;
  EXPECT_THROW(c.validate(), std::domain_error);
  c = charged(0.0, 1.0);
  c.drive.amplitude = {0.0, 4.0};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(model_from_string("charged_full"), Model::charged_full);
  EXPECT_THROW(model_from_string("quantum"), std::invalid_argument);
}
