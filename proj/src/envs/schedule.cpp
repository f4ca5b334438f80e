#include "adaptiveh/envs/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace adaptiveh {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kConstant:
      return "constant";
    case ScheduleKind::kSinusoidal:
      return "sinusoidal";
    case ScheduleKind::kRandomWalk:
      return "random-walk";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "constant") return ScheduleKind::kConstant;
  if (name == "sinusoidal") return ScheduleKind::kSinusoidal;
  if (name == "random-walk") return ScheduleKind::kRandomWalk;
  throw std::invalid_argument("unknown schedule kind '" + std::string(name) +
                              "' (expected constant|sinusoidal|random-walk)");
}

Schedule::Schedule(ScheduleParams params) : params_(params) {
  if (!std::isfinite(params_.min) || !std::isfinite(params_.max) ||
      params_.min > params_.max) {
    throw std::invalid_argument("Schedule: require finite min <= max");
  }
  if (!std::isfinite(params_.base) || !std::isfinite(params_.amplitude) ||
      !std::isfinite(params_.rate) || params_.amplitude < 0.0 ||
      params_.rate < 0.0) {
    throw std::invalid_argument(
        "Schedule: base must be finite, amplitude and rate >= 0");
  }
  value_ = clamp(params_.base);
}

double Schedule::clamp(double v) const {
  return std::clamp(v, params_.min, params_.max);
}

double Schedule::reflect(double v) const {
  const double lo = params_.min;
  const double hi = params_.max;
  const double span = hi - lo;
  if (span <= 0.0) return lo;
  // Fold onto a period of 2 * span, then mirror the upper half.
  double r = std::fmod(v - lo, 2.0 * span);
  if (r < 0.0) r += 2.0 * span;
  if (r > span) r = 2.0 * span - r;
  return clamp(lo + r);
}

double Schedule::sinusoid() const {
  return clamp(params_.base +
               params_.amplitude *
                   std::sin(params_.rate * static_cast<double>(epoch_) +
                            phase_));
}

void Schedule::reset(Rng& rng) {
  epoch_ = 0;
  phase_ = 0.0;
  switch (params_.kind) {
    case ScheduleKind::kConstant:
      value_ = clamp(params_.base);
      break;
    case ScheduleKind::kSinusoidal:
      if (params_.random_phase) {
        phase_ = std::uniform_real_distribution<double>(
            0.0, 2.0 * std::numbers::pi)(rng);
      }
      value_ = sinusoid();
      break;
    case ScheduleKind::kRandomWalk:
      value_ = params_.random_phase
                   ? std::uniform_real_distribution<double>(params_.min,
                                                            params_.max)(rng)
                   : clamp(params_.base);
      break;
  }
}

void Schedule::advance(Rng& rng) {
  ++epoch_;
  switch (params_.kind) {
    case ScheduleKind::kConstant:
      break;
    case ScheduleKind::kSinusoidal:
      value_ = sinusoid();
      break;
    case ScheduleKind::kRandomWalk: {
      const double xi = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      value_ = reflect(value_ + params_.amplitude * params_.rate * xi);
      break;
    }
  }
}

}  // namespace adaptiveh
