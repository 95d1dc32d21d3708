#pragma once

#include <string>

#include "hypalign/model.hpp"

namespace hypalign::checkpoint {

// Versioned binary container for trained channel parameters.
//
// Layout (little-endian):
//   magic   8 bytes  "HYPALNCK"
//   version u32      currently 1
//   kind    u8       0 = structure, 1 = visual
//   seed    u64      RNG seed the training run used
//   rows    i64      feature matrix rows
//   cols    i64      feature matrix cols
//   data    f64[rows*cols] row-major
//   layers  u32
//   per layer:
//     d_in  i64, d_out i64, c_in f64, c_out f64, activation u8 (0 relu, 1 none)
//     data  f64[d_in*d_out] row-major
//
// Matrices round-trip bit-exactly.
inline constexpr uint32_t kCheckpointVersion = 1;

struct ChannelCheckpoint {
  model::ChannelModel model;
  uint64_t rng_seed = 0;
};

void save_checkpoint(const ChannelCheckpoint& ckpt, const std::string& path);
ChannelCheckpoint load_checkpoint(const std::string& path);

}  // namespace hypalign::checkpoint
