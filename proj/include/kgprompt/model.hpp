#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kgprompt/encoder.hpp"
#include "kgprompt/knowledge_filter.hpp"
#include "kgprompt/prompt_assembly.hpp"

namespace kgprompt {

// Everything the trainer is allowed to change.
struct ModelParams {
    std::vector<Matrix> context;  // per class, context_len x width
    AdaptationLayer adapter;
    KnowledgeFilter entity_filter;
    KnowledgeFilter description_filter;

    bool operator==(const ModelParams&) const = default;
};

// Visits every trainable tensor as (name, flat values) in a fixed order.
void for_each_tensor(ModelParams& p, const std::function<void(const std::string&, std::span<double>)>& fn);
void for_each_tensor(const ModelParams& p,
                     const std::function<void(const std::string&, std::span<const double>)>& fn);

ModelParams zeros_like(const ModelParams& p);
std::size_t parameter_count(const ModelParams& p);

struct Model {
    std::vector<std::string> categories;
    // Frozen prompt material, one entry per class.
    std::vector<Matrix> entity_rows;
    std::vector<Matrix> description_rows;
    std::vector<Vector> class_embeddings;
    ModelParams params;

    std::size_t num_classes() const { return categories.size(); }
    std::size_t width() const { return class_embeddings.empty() ? 0 : class_embeddings.front().size(); }

    bool operator==(const Model&) const = default;
};

struct ModelShape {
    std::size_t encoder_dim = 64;
    std::size_t hidden_dim = 64;
};

// Adapter weights are Gaussian (He scaling for the first layer), biases zero;
// both filter projections start at the identity.
Model build_model(const std::vector<PromptBundle>& bundles, const ModelShape& shape, std::uint64_t seed);

// Text features f_t^k (unit vectors) for an adapted image feature.
std::vector<Vector> text_features(const Model& model, std::span<const double> visual);

}  // namespace kgprompt
