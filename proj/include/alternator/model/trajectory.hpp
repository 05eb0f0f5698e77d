#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "alternator/numerics/tensor.hpp"

namespace alternator {

// Observations x_1..x_T (T x D_x), features z_0..z_T ((T+1) x D_z) or
// z_1..z_T (T x D_z) for data sets, and an optional per-step mask
// (true = observed; empty = fully observed).
struct Trajectory {
  Tensor x;
  Tensor z;
  std::vector<bool> mask;

  std::size_t length() const { return x.rows(); }
  bool observed(std::size_t t) const { return mask.empty() || mask[t - 1]; }  // 1-based
};

// CSV: header `t,x_0..x_{Dx-1}[,z_0..z_{Dz-1}][,mask]`, one row per step
// t = 1..T. When z carries z_0 an extra t = 0 row holds it, with x = nan
// and mask = 0.
std::string trajectory_to_csv(const Trajectory& traj);
Trajectory trajectory_from_csv(std::string_view text);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// Plain matrix with a generated header `prefix_0..prefix_{cols-1}`.
std::string matrix_to_csv(const Tensor& m, const std::string& prefix);
Tensor matrix_from_csv(std::string_view text);

}  // namespace alternator
