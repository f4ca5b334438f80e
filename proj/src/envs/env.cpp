#include "adaptiveh/envs/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace adaptiveh {

NsEnv::NsEnv(ScheduleParams drift, int max_steps)
    : schedule_(drift), max_steps_(max_steps) {
  if (max_steps < 1) throw std::invalid_argument("NsEnv: max_steps must be >= 1");
}

StateVector NsEnv::reset(std::uint64_t seed) {
  Rng init_rng(seed);
  drift_rng_ = make_rng(seed, Stream::kDrift);
  noise_rng_ = make_rng(seed, Stream::kObservationNoise);
  t_ = 0;
  done_ = false;
  schedule_.reset(drift_rng_);
  return do_reset(init_rng);
}

ActionVector NsEnv::clamp_action(const ActionVector& a) const {
  const ActionBounds& b = action_bounds();
  if (a.size() != b.lo.size()) {
    throw std::invalid_argument("NsEnv::step: action dimension mismatch");
  }
  ActionVector out(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out[i] = std::clamp(a[i], b.lo[i], b.hi[i]);
  }
  return out;
}

StepResult NsEnv::step(const ActionVector& a) {
  if (done_) throw std::logic_error("NsEnv::step: episode is over; call reset()");
  if (!a.allFinite()) throw std::invalid_argument("NsEnv::step: non-finite action");
  StepResult r = do_step(clamp_action(a));
  ++t_;
  schedule_.advance(drift_rng_);
  if (!r.terminal && t_ >= max_steps_) {
    r.terminal = true;
    r.truncated = true;
  }
  done_ = r.terminal;
  return r;
}

}  // namespace adaptiveh
