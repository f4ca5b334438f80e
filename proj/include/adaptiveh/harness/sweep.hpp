#pragma once

#include <string>
#include <vector>

#include "adaptiveh/harness/config.hpp"

namespace adaptiveh::harness {

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses `key=v1,v2,...`. Throws ConfigError when malformed.
SweepAxis parse_vary(const std::string& spec);

struct SweepPoint {
  KeyValues kv;
  // Directory name such as "drift.rate=0.04_agent=fixed-h".
  std::string name;
};

/// Cartesian product of the axes applied on top of `base`, first axis
/// varying slowest.
std::vector<SweepPoint> expand_sweep(const KeyValues& base,
                                     const std::vector<SweepAxis>& axes);

}  // namespace adaptiveh::harness
