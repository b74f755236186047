#pragma once

// Command-line surface. Exit codes: 0 success, 1 I/O, 2 validation,
// 3 runtime. Every file a command writes lands under its output directory.

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kgprompt/checkpoint.hpp"
#include "kgprompt/pipeline.hpp"

namespace kgprompt::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::unique_ptr<EncoderBackend> make_encoder(const RunConfig& cfg);
std::unique_ptr<EmbeddingProvider> make_embedding(const RunConfig& cfg);

// Loads the graph and description cache named by `cfg` and builds prompts.
// Descriptions missing from the cache are requested through `client`.
Experiment experiment_from_config(const RunConfig& cfg, DescriptionCache& cache, LlmClient* client);

// Reuses the frozen prompt material stored in a checkpoint.
Experiment experiment_from_checkpoint(const Checkpoint& ck, const RunConfig& cfg);

}  // namespace kgprompt::cli
