#include "nonlocal/causality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace nonlocal {

namespace {

// Non-strict containment tolerates rounding at touching boundaries.
constexpr double kContactTol = 1e-12;

}  // namespace

void SpacetimeRegion::validate() const {
  for (double v : {x_min, x_max, t_min, t_max}) {
    if (!std::isfinite(v)) throw std::invalid_argument("region bounds must be finite");
  }
  if (x_min > x_max) throw std::invalid_argument("region has x_min > x_max");
  if (t_min > t_max) throw std::invalid_argument("region has t_min > t_max");
}

ConeBoundary::ConeBoundary(const SpacetimeRegion& region) {
  region.validate();
  breakpoints_ = {{region.x_min, region.t_min}, {region.x_max, region.t_min}};
}

double ConeBoundary::operator()(double x) const {
  const auto& left = breakpoints_.front();
  const auto& right = breakpoints_.back();
  return left.t + std::max({0.0, left.x - x, x - right.x});
}

ConeBoundary future_cone(const SpacetimeRegion& region) { return ConeBoundary(region); }

bool spacelike_separated(const SpacetimeRegion& a, const SpacetimeRegion& b) {
  a.validate();
  b.validate();
  const double dx = std::max({0.0, b.x_min - a.x_max, a.x_min - b.x_max});
  const double dt = std::max(std::abs(a.t_max - b.t_min), std::abs(b.t_max - a.t_min));
  return dx - dt > 0.0;
}

JammingVerdict jamming_allowed(const SpacetimeRegion& a, const SpacetimeRegion& b,
                               const SpacetimeRegion& o) {
  const ConeBoundary fa(a), fb(b), fo(o);
  auto overlap = [&](double x) { return std::max(fa(x), fb(x)); };
  auto gap = [&](double x) { return overlap(x) - fo(x); };

  std::vector<double> xs;
  for (const auto* f : {&fa, &fb, &fo}) {
    for (const auto& p : f->breakpoints()) xs.push_back(p.x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  // max(f_A, f_B) switches branch where f_A - f_B changes sign; between
  // consecutive breakpoints that difference is linear.
  std::vector<double> candidates = xs;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double d0 = fa(xs[i]) - fb(xs[i]);
    const double d1 = fa(xs[i + 1]) - fb(xs[i + 1]);
    if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
      candidates.push_back(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
    }
  }
  // Outside the outermost breakpoint all slopes agree, so the gap is constant.
  candidates.push_back(xs.front() - 1.0);
  candidates.push_back(xs.back() + 1.0);

  JammingVerdict v;
  double best_x = candidates.front();
  v.margin = gap(best_x);
  for (double x : candidates) {
    const double g = gap(x);
    if (g < v.margin) {
      v.margin = g;
      best_x = x;
    }
  }
  v.allowed = v.margin >= -kContactTol;
  if (!v.allowed) v.witness = SpacetimePoint{best_x, overlap(best_x)};
  v.ab_spacelike = spacelike_separated(a, b);
  v.ao_spacelike = spacelike_separated(a, o);
  v.bo_spacelike = spacelike_separated(b, o);
  return v;
}

std::string verdict_to_json(const JammingVerdict& verdict, int indent) {
  nlohmann::json j;
  j["allowed"] = verdict.allowed;
  j["margin"] = verdict.margin;
  if (verdict.witness) {
    j["witness"] = {{"x", verdict.witness->x}, {"t", verdict.witness->t}};
  } else {
    j["witness"] = nullptr;
  }
  j["spacelike"] = {{"A_B", verdict.ab_spacelike},
                    {"A_O", verdict.ao_spacelike},
                    {"B_O", verdict.bo_spacelike}};
  return j.dump(indent);
}

}  // namespace nonlocal
