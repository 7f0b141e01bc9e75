#include "robias/interval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "robias/error.hpp"

namespace robias {

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
  if (!(lo <= hi)) {
    throw ArgumentError("interval: lo must not exceed hi");
  }
}

IntervalSet::IntervalSet(Interval single) : parts_{single} {}

IntervalSet::IntervalSet(std::initializer_list<Interval> parts)
    : IntervalSet(std::vector<Interval>(parts)) {}

IntervalSet::IntervalSet(std::vector<Interval> parts) {
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  for (const auto& p : parts) {
    if (!parts_.empty() && p.lo <= parts_.back().hi) {
      parts_.back().hi = std::max(parts_.back().hi, p.hi);
    } else {
      parts_.push_back(p);
    }
  }
}

double IntervalSet::total_length() const {
  double total = 0.0;
  for (const auto& p : parts_) total += p.length();
  return total;
}

double IntervalSet::lo() const { return parts_.front().lo; }
double IntervalSet::hi() const { return parts_.back().hi; }

Interval IntervalSet::hull() const {
  if (parts_.empty()) throw ArgumentError("interval set: hull of empty set");
  return {lo(), hi()};
}

bool IntervalSet::contains(double x) const {
  return std::any_of(parts_.begin(), parts_.end(),
                     [x](const Interval& p) { return p.contains(x); });
}

bool IntervalSet::subset_of(const IntervalSet& other) const {
  // Members of `other` are disjoint and merged, so each of ours must fit
  // inside a single one of theirs.
  return std::all_of(parts_.begin(), parts_.end(), [&](const Interval& p) {
    return std::any_of(other.parts_.begin(), other.parts_.end(),
                       [&](const Interval& q) { return q.contains(p); });
  });
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Interval> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < parts_.size() && j < other.parts_.size()) {
    const double lo = std::max(parts_[i].lo, other.parts_[j].lo);
    const double hi = std::min(parts_[i].hi, other.parts_[j].hi);
    if (lo <= hi) out.emplace_back(lo, hi);
    if (parts_[i].hi < other.parts_[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return IntervalSet(std::move(out));
}

std::string IntervalSet::to_string() const {
  if (parts_.empty()) return "{}";
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    if (k) os << " u ";
    os << '[' << parts_[k].lo << ", " << parts_[k].hi << ']';
  }
  return os.str();
}

bool interiors_disjoint(const IntervalSet& a, const IntervalSet& b) {
  for (const auto& p : a.parts()) {
    for (const auto& q : b.parts()) {
      if (std::max(p.lo, q.lo) < std::min(p.hi, q.hi)) return false;
    }
  }
  return true;
}

Interval relax_interval(const Interval& b, double delta) {
  if (!(delta >= 0.0)) throw ArgumentError("relax_interval: delta must be >= 0");
  const double candidates[] = {b.lo - delta, b.lo + delta, b.hi - delta, b.hi + delta};
  return {*std::min_element(std::begin(candidates), std::end(candidates)),
          *std::max_element(std::begin(candidates), std::end(candidates))};
}

}  // namespace robias
