#pragma once

// Binary checkpoints of parameters, optimiser velocity and epoch.
//
// Layout, little-endian throughout:
//   "DRWT"  u32 version  i32 epoch  u64 d_in  u64 embed  u64 hidden  u32 count
//   count x { u32 name_len, name bytes, u64 rows, u64 cols, rows*cols f64 }
// Parameter arrays are named "param/<name>", velocities "velocity/<name>".

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "derwent/trainer.hpp"

namespace derwent {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const TrainState& state);
// Throws FormatError on a bad magic, unknown version, truncation or any
// array that does not match the declared dimensions.
TrainState read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const TrainState& state);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace derwent
