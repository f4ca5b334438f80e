#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "adaptiveh/random.hpp"

namespace adaptiveh {

enum class ScheduleKind { kConstant, kSinusoidal, kRandomWalk };

std::string_view to_string(ScheduleKind kind);
/// Throws std::invalid_argument for unknown names.
ScheduleKind parse_schedule_kind(std::string_view name);

struct ScheduleParams {
  ScheduleKind kind = ScheduleKind::kConstant;
  double base = 0.0;
  double amplitude = 0.0;
  // Per-epoch rate: angular frequency for sinusoids, step scale for walks.
  double rate = 0.0;
  double min = 0.0;
  double max = 0.0;
  // Randomize the sinusoid phase / walk start at every reset.
  bool random_phase = true;

  bool operator==(const ScheduleParams&) const = default;
};

/// Time-indexed physics parameter. Every emitted value lies in [min, max]:
///   constant:    clamp(base)
///   sinusoidal:  clamp(base + amplitude sin(rate t + phase))
///   random walk: reflect(p_t + amplitude rate xi_t), xi_t ~ U[-1, 1]
class Schedule {
 public:
  explicit Schedule(ScheduleParams params);

  /// Restarts at epoch 0, drawing the phase or start point from rng.
  void reset(Rng& rng);
  /// Moves to the next epoch.
  void advance(Rng& rng);

  double value() const { return value_; }
  std::int64_t epoch() const { return epoch_; }
  const ScheduleParams& params() const { return params_; }

 private:
  double clamp(double v) const;
  double reflect(double v) const;
  double sinusoid() const;

  ScheduleParams params_;
  std::int64_t epoch_ = 0;
  double phase_ = 0.0;
  double value_ = 0.0;
};

}  // namespace adaptiveh
