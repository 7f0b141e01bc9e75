#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace robias {

// Closed interval [lo, hi] with lo <= hi.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_);

  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Union of closed intervals kept sorted by lo with pairwise disjoint
// interiors. Overlapping or touching members are merged on construction.
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(Interval single);  // NOLINT(google-explicit-constructor)
  IntervalSet(std::initializer_list<Interval> parts);
  explicit IntervalSet(std::vector<Interval> parts);

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  std::size_t size() const { return parts_.size(); }
  double total_length() const;
  double lo() const;  // requires !empty()
  double hi() const;  // requires !empty()
  Interval hull() const;

  bool contains(double x) const;
  bool subset_of(const IntervalSet& other) const;

  IntervalSet intersect(const IntervalSet& other) const;

  std::string to_string() const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  std::vector<Interval> parts_;
};

// True when no two members of a and b share an interior point (touching
// endpoints are allowed).
bool interiors_disjoint(const IntervalSet& a, const IntervalSet& b);

// Widens [lo, hi] by the noise tolerance delta using the four-endpoint
// min/max rule: [min(lo-d, lo+d, hi-d, hi+d), max(...)] = [lo-d, hi+d].
Interval relax_interval(const Interval& b, double delta);

}  // namespace robias
