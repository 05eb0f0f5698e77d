#include "alternator/model/trajectory.hpp"

#include <cmath>

#include "alternator/csv.hpp"
#include "alternator/errors.hpp"
#include "alternator/numerics/checkpoint.hpp"

namespace alternator {

std::string trajectory_to_csv(const Trajectory& traj) {
  const std::size_t T = traj.x.rows();
  const std::size_t dx = traj.x.cols();
  const bool has_z = !traj.z.empty();
  const bool has_z0 = has_z && traj.z.rows() == T + 1;
  if (has_z && !has_z0 && traj.z.rows() != T) {
    throw DimensionError("trajectory: z has " + std::to_string(traj.z.rows()) + " rows for T = " + std::to_string(T));
  }
  if (!traj.mask.empty() && traj.mask.size() != T) throw DimensionError("trajectory: mask length != T");
  const bool has_mask = !traj.mask.empty() || has_z0;
  const std::size_t dz = has_z ? traj.z.cols() : 0;

  std::vector<std::string> header{"t"};
  for (std::size_t j = 0; j < dx; ++j) header.push_back("x_" + std::to_string(j));
  for (std::size_t j = 0; j < dz; ++j) header.push_back("z_" + std::to_string(j));
  if (has_mask) header.push_back("mask");
  std::string out = csv::join(header) + "\n";

  auto emit = [&](std::size_t t) {
    std::vector<std::string> cells{std::to_string(t)};
    for (std::size_t j = 0; j < dx; ++j) cells.push_back(t == 0 ? "nan" : csv::format_double(traj.x(t - 1, j)));
    if (has_z) {
      const std::size_t zr = has_z0 ? t : t - 1;
      for (std::size_t j = 0; j < dz; ++j) cells.push_back(csv::format_double(traj.z(zr, j)));
    }
    if (has_mask) cells.push_back(t == 0 ? "0" : (traj.observed(t) ? "1" : "0"));
    out += csv::join(cells) + "\n";
  };
  if (has_z0) emit(0);
  for (std::size_t t = 1; t <= T; ++t) emit(t);
  return out;
}

Trajectory trajectory_from_csv(std::string_view text) {
  const auto table = csv::parse(text);
  if (table.header.empty() || table.header[0] != "t") throw FormatError("trajectory csv: first column must be 't'");
  std::size_t dx = 0, dz = 0;
  bool has_mask = false;
  for (std::size_t i = 1; i < table.header.size(); ++i) {
    const auto& h = table.header[i];
    if (h == "x_" + std::to_string(dx)) {
      ++dx;
    } else if (h == "z_" + std::to_string(dz)) {
      ++dz;
    } else if (h == "mask" && i + 1 == table.header.size()) {
      has_mask = true;
    } else {
      throw FormatError("trajectory csv: unexpected column '" + h + "'");
    }
  }
  if (dx == 0) throw FormatError("trajectory csv: no x columns");
  const bool has_z0 = !table.rows.empty() && table.rows.front()[0] == "0";
  const std::size_t T = table.rows.size() - (has_z0 ? 1 : 0);
  if (T == 0) throw ContractError("trajectory csv: empty sequence");

  Trajectory traj;
  traj.x = Tensor::zeros(T, dx);
  if (dz) traj.z = Tensor::zeros(has_z0 ? T + 1 : T, dz);
  std::vector<bool> mask;
  bool any_missing = false;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t t = std::stoul(row[0]);
    const std::size_t expect = has_z0 ? r : r + 1;
    if (t != expect) throw FormatError("trajectory csv: row " + std::to_string(r + 1) + " has t = " + row[0]);
    if (dz) {
      const std::size_t zr = has_z0 ? t : t - 1;
      for (std::size_t j = 0; j < dz; ++j) traj.z(zr, j) = csv::parse_double(row[1 + dx + j]);
    }
    if (t == 0) continue;
    for (std::size_t j = 0; j < dx; ++j) traj.x(t - 1, j) = csv::parse_double(row[1 + j]);
    if (has_mask) {
      const bool obs = row.back() == "1";
      if (!obs && row.back() != "0") throw FormatError("trajectory csv: mask must be 0 or 1");
      mask.push_back(obs);
      any_missing = any_missing || !obs;
    }
  }
  if (any_missing) traj.mask = std::move(mask);
  return traj;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  write_file_atomic(path, trajectory_to_csv(traj));
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) { return trajectory_from_csv(read_file(path)); }

std::string matrix_to_csv(const Tensor& m, const std::string& prefix) {
  std::vector<std::string> header;
  for (std::size_t j = 0; j < m.cols(); ++j) header.push_back(prefix + "_" + std::to_string(j));
  std::string out = csv::join(header) + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<std::string> cells;
    for (std::size_t j = 0; j < m.cols(); ++j) cells.push_back(csv::format_double(m(i, j)));
    out += csv::join(cells) + "\n";
  }
  return out;
}

Tensor matrix_from_csv(std::string_view text) {
  const auto table = csv::parse(text);
  Tensor m = Tensor::zeros(table.rows.size(), table.header.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < table.header.size(); ++j) m(i, j) = csv::parse_double(table.rows[i][j]);
  }
  return m;
}

}  // namespace alternator
