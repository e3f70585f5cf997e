#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "riemedia/error.hpp"
#include "riemedia/expr.hpp"
#include "riemedia/rng.hpp"

namespace riemedia {

/// Open interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return lo < x && x < hi; }
};

/// A coordinate system: ordered spatial variable names, an optional time
/// variable, and per-variable open domains used to draw probe points.
class Chart {
 public:
  Chart() = default;

  explicit Chart(std::vector<std::string> space_vars, std::optional<std::string> time_var = std::nullopt)
      : space_(std::move(space_vars)), time_(std::move(time_var)) {
    if (space_.empty()) throw GeometryError("chart needs at least one spatial variable");
    std::set<std::string> seen(space_.begin(), space_.end());
    if (seen.size() != space_.size()) throw GeometryError("chart variable names must be distinct");
    if (time_ && seen.count(*time_)) throw GeometryError("time variable '" + *time_ + "' is also a spatial variable");
  }

  std::size_t dim() const noexcept { return space_.size(); }
  const std::vector<std::string>& space_vars() const noexcept { return space_; }
  const std::string& space_var(std::size_t i) const { return space_.at(i); }
  const std::optional<std::string>& time_var() const noexcept { return time_; }
  bool has_time() const noexcept { return time_.has_value(); }

  /// Time variable (if any) followed by the spatial variables.
  std::vector<std::string> all_vars() const {
    std::vector<std::string> out;
    if (time_) out.push_back(*time_);
    out.insert(out.end(), space_.begin(), space_.end());
    return out;
  }

  Chart& set_domain(const std::string& name, Interval d) {
    auto vars = all_vars();
    if (std::find(vars.begin(), vars.end(), name) == vars.end()) {
      throw GeometryError("domain given for unknown chart variable '" + name + "'");
    }
    if (!(d.lo < d.hi)) throw GeometryError("domain of '" + name + "' is empty");
    domains_[name] = d;
    return *this;
  }

  const Interval& domain(const std::string& name) const {
    auto it = domains_.find(name);
    if (it == domains_.end()) throw GeometryError("no domain declared for '" + name + "'");
    return it->second;
  }

  bool has_domain(const std::string& name) const { return domains_.count(name) != 0; }

  /// Same variables in the same order (domains are not compared).
  bool same_coordinates(const Chart& other) const { return space_ == other.space_ && time_ == other.time_; }

 private:
  std::vector<std::string> space_;
  std::optional<std::string> time_;
  std::map<std::string, Interval> domains_;
};

inline void require_same_chart(const Chart& a, const Chart& b) {
  if (!a.same_coordinates(b)) throw GeometryError("chart mismatch");
}

/// Probe points drawn uniformly from the chart's declared domains. Variables
/// are sampled in all_vars() order, so a given seed always yields the same
/// points.
inline std::vector<Bindings> sample_probes(const Chart& chart, std::size_t count, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Bindings> out;
  out.reserve(count);
  const auto vars = chart.all_vars();
  for (std::size_t k = 0; k < count; ++k) {
    Bindings b;
    for (const auto& v : vars) {
      const Interval& d = chart.domain(v);
      b[v] = rng.uniform(d.lo, d.hi);
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace riemedia
