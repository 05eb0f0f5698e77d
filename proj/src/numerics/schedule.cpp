#include "alternator/numerics/schedule.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "alternator/errors.hpp"

namespace alternator {

void LrSchedule::validate() const {
  require(min_lr >= 0.0 && min_lr <= base_lr, "lr schedule: need 0 <= min_lr <= base_lr");
  require(total_epochs >= 1, "lr schedule: total_epochs must be >= 1");
  require(warmup_epochs < total_epochs, "lr schedule: warmup_epochs must be < total_epochs");
}

double lr_at_epoch(const LrSchedule& sched, std::size_t epoch) {
  sched.validate();
  if (epoch >= sched.total_epochs) {
    throw ContractError("lr schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                        std::to_string(sched.total_epochs) + ")");
  }
  if (epoch < sched.warmup_epochs) {
    return sched.base_lr * static_cast<double>(epoch) / static_cast<double>(sched.warmup_epochs);
  }
  const std::size_t span = sched.total_epochs - 1 - sched.warmup_epochs;
  if (span == 0) return sched.base_lr;
  const double progress = static_cast<double>(epoch - sched.warmup_epochs) / static_cast<double>(span);
  return sched.min_lr + 0.5 * (sched.base_lr - sched.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace alternator
