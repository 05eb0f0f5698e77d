#pragma once

#include <cstddef>

namespace alternator {

// Linear warm-up from 0 to base_lr, then cosine decay to min_lr at the last epoch.
struct LrSchedule {
  double base_lr = 0.01;
  double min_lr = 1e-4;
  std::size_t warmup_epochs = 10;
  std::size_t total_epochs = 500;

  void validate() const;
};

double lr_at_epoch(const LrSchedule& sched, std::size_t epoch);

}  // namespace alternator
