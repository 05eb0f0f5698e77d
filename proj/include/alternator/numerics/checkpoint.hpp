#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "alternator/numerics/tensor.hpp"

namespace alternator {

struct NamedTensor {
  std::string name;
  Tensor value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// Binary parameter container:
//   "ALTN1" | u64 digest | u32 count | count x { u32 name_len | name |
//   u32 rank | rank x u64 extent | extent-product x f64 }
// All integers and floats little-endian.
struct Checkpoint {
  std::uint64_t digest = 0;
  std::vector<NamedTensor> tensors;

  const Tensor& at(std::string_view name) const;
  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::string_view kCheckpointMagic = "ALTN1";

// FNV-1a over a canonical description string (architecture + dimensions).
std::uint64_t spec_digest(std::string_view description);

// Writes to a sibling temp file then renames over `path`.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Lossless text export (17 significant digits), one block per tensor:
//   tensor <name>
//   shape <d0> <d1> ...
//   values <v0> <v1> ...
std::string export_text(const Checkpoint& ckpt);
Checkpoint import_text(std::string_view text);

// Replace `path` atomically with `contents`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace alternator
