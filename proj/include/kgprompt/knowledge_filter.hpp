#pragma once

// Visual-specific knowledge filtering. An image feature attends over the
// pooled rows of a knowledge prompt (scaled dot-product, single head); the
// attention-weighted row is linearly projected to one output token. Two such
// filters (entities, descriptions) feed the composed text-encoder input.

#include <memory>
#include <vector>

#include "kgprompt/linalg.hpp"
#include "kgprompt/prompt_assembly.hpp"

namespace kgprompt {

// Two fully connected layers with a rectifier in between:
// f_v = W2 relu(W1 x + b1) + b2.
struct AdaptationLayer {
    Matrix w1;  // hidden x encoder_dim
    Vector b1;
    Matrix w2;  // width x hidden
    Vector b2;

    std::size_t input_dim() const { return w1.cols(); }
    std::size_t output_dim() const { return w2.rows(); }
    bool operator==(const AdaptationLayer&) const = default;
};

struct AdaptationTrace {
    Vector pre_activation;  // W1 x + b1
    Vector hidden;          // relu(pre_activation)
    Vector output;
};

Vector adapt_visual(std::span<const double> raw_feature, const AdaptationLayer& layer);
AdaptationTrace adapt_visual_traced(std::span<const double> raw_feature, const AdaptationLayer& layer);

struct KnowledgeFilter {
    Matrix psi;  // width x width
    Vector bias;

    bool operator==(const KnowledgeFilter&) const = default;
};

// softmax(rows f_v / sqrt(m)), computed with max subtraction.
Vector attention_weights(const Matrix& rows, std::span<const double> visual);

struct FilterTrace {
    Vector weights;
    Vector pooled;  // sum_i weights_i rows_i
    Vector output;  // psi pooled + bias
};

Vector filter(const Matrix& rows, std::span<const double> visual, const KnowledgeFilter& f);
FilterTrace filter_traced(const Matrix& rows, std::span<const double> visual, const KnowledgeFilter& f);

// Rows: [entity token, description token, context rows..., class row].
struct ComposedPrompt {
    Matrix rows;
};

ComposedPrompt compose_prompt(std::span<const double> entity_token, std::span<const double> description_token,
                              const Matrix& context, std::span<const double> class_embedding);

class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    virtual Vector encode(const Matrix& rows) const = 0;
};

// Mean of the rows. Frozen and parameter-free.
class MeanPoolTextEncoder : public TextEncoder {
public:
    Vector encode(const Matrix& rows) const override;
};

// Encodes and L2-normalizes. Throws EncoderFailure on a zero or non-finite
// encoding.
Vector encode_text(const ComposedPrompt& prompt, const TextEncoder& encoder);

}  // namespace kgprompt
