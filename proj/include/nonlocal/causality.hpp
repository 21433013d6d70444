#pragma once

// Jamming-causality check in 1+1 Minkowski space (c = 1): an action in O may
// change joint statistics in A u B only if the overlap of the future cones of
// A and B lies inside the future cone of O.

#include <optional>
#include <string>
#include <vector>

namespace nonlocal {

struct SpacetimeRegion {
  double x_min = 0.0;
  double x_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;

  /// Throws std::invalid_argument for inverted or non-finite bounds.
  void validate() const;
};

struct SpacetimePoint {
  double x;
  double t;
};

/// Lower boundary t = f(x) of the future cone of a closed rectangle:
/// f(x) = t_min + dist(x, [x_min, x_max]), slopes -1, 0, +1.
class ConeBoundary {
 public:
  explicit ConeBoundary(const SpacetimeRegion& region);

  double operator()(double x) const;
  bool contains(const SpacetimePoint& p) const { return p.t >= (*this)(p.x); }
  /// The two corners where the slope changes, left to right.
  const std::vector<SpacetimePoint>& breakpoints() const { return breakpoints_; }

 private:
  std::vector<SpacetimePoint> breakpoints_;
};

ConeBoundary future_cone(const SpacetimeRegion& region);

bool spacelike_separated(const SpacetimeRegion& a, const SpacetimeRegion& b);

struct JammingVerdict {
  bool allowed = true;
  // A point in future(A) n future(B) outside future(O) when not allowed.
  std::optional<SpacetimePoint> witness;
  // Smallest value of max(f_A, f_B) - f_O over the line.
  double margin = 0.0;
  bool ab_spacelike = false;
  bool ao_spacelike = false;
  bool bo_spacelike = false;
};

JammingVerdict jamming_allowed(const SpacetimeRegion& a, const SpacetimeRegion& b,
                               const SpacetimeRegion& o);

std::string verdict_to_json(const JammingVerdict& verdict, int indent = 2);

}  // namespace nonlocal
