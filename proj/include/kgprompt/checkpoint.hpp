#pragma once

// Versioned JSON checkpoint: run config, seed, frozen prompt material, every
// trainable tensor, the dev threshold, and the encoder fingerprint.
// Serialization is deterministic, so identical runs give identical bytes.

#include <cstdint>
#include <string>
#include <string_view>

#include "kgprompt/config.hpp"
#include "kgprompt/evaluation.hpp"
#include "kgprompt/model.hpp"

namespace kgprompt {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    RunConfig config;
    Model model;
    Threshold threshold;
    double dev_eer = 0.0;
    std::uint64_t encoder_checksum = 0;
};

std::string serialize_checkpoint(const Checkpoint& ck);
// MalformedFile on any structural problem or version mismatch.
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace kgprompt
