#pragma once

// Run configuration: a flat `key = value` file. `#` starts a comment, blank
// lines are ignored, unknown keys and repeated keys are rejected. Relative
// paths resolve against the config file's directory.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kgprompt/trainer.hpp"

namespace kgprompt {

struct RunConfig {
    TrainConfig train;

    std::size_t image_size = kDefaultImageSize;
    std::size_t patch_grid = kDefaultPatchGrid;
    std::size_t embed_dim = 16;
    std::size_t encoder_dim = 64;
    std::size_t hidden_dim = 64;
    std::size_t context_len = kDefaultContextLength;

    std::string encoder = "toy";  // toy | http
    std::string encoder_url;
    std::uint64_t encoder_seed = 7;
    std::uint64_t embedding_seed = 11;
    std::string embedding_table;

    std::string kg_path;
    std::string cache_path;
    std::string llm_url;
    std::string llm_model;
    std::string kg_source_url;

    std::string train_manifest;
    std::string test_manifest;
    std::string out_dir = "out";

    std::string real_category = "real face";
    std::string mask_category = "3D mask";

    std::size_t rounds = 20;
    std::size_t loocv_train_subjects = 1;
    std::size_t loocv_dev_subjects = 1;

    // Throws Config naming the first bad field.
    void validate() const;
};

RunConfig parse_config(std::string_view text, const std::string& base_dir = {});
RunConfig load_config(const std::string& path);

// (key, value) pairs in a fixed order, suitable for writing back out.
// out_dir is left out: it says where results go, not how they were made.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

// Applies one key; throws Config on an unknown key or unparsable value.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::string format_double(double v);

}  // namespace kgprompt
