#include "adaptiveh/harness/sweep.hpp"

#include <sstream>

namespace adaptiveh::harness {

SweepAxis parse_vary(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--vary '" + spec + "': expected key=v1,v2,...");
  }
  SweepAxis axis;
  axis.key = spec.substr(0, eq);
  std::stringstream ss(spec.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (v.empty()) throw ConfigError("--vary '" + spec + "': empty value");
    axis.values.push_back(v);
  }
  if (axis.values.empty()) throw ConfigError("--vary '" + spec + "': no values");
  return axis;
}

std::vector<SweepPoint> expand_sweep(const KeyValues& base,
                                     const std::vector<SweepAxis>& axes) {
  std::vector<SweepPoint> points{{base, ""}};
  for (const auto& axis : axes) {
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        SweepPoint q = p;
        q.kv[axis.key] = v;
        if (!q.name.empty()) q.name += '_';
        q.name += axis.key + "=" + v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

}  // namespace adaptiveh::harness
