#include "kgprompt/knowledge_filter.hpp"

#include <algorithm>
#include <cmath>

#include "kgprompt/error.hpp"

namespace kgprompt {

AdaptationTrace adapt_visual_traced(std::span<const double> raw_feature, const AdaptationLayer& layer) {
    if (raw_feature.size() != layer.w1.cols() || layer.b1.size() != layer.w1.rows() ||
        layer.w2.cols() != layer.w1.rows() || layer.b2.size() != layer.w2.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "adaptation layer shapes do not match input of width " +
                                                      std::to_string(raw_feature.size()));
    }
    AdaptationTrace t;
    t.pre_activation = matvec(layer.w1, raw_feature);
    axpy(1.0, layer.b1, t.pre_activation);
    t.hidden = t.pre_activation;
    for (double& h : t.hidden) h = std::max(h, 0.0);
    t.output = matvec(layer.w2, t.hidden);
    axpy(1.0, layer.b2, t.output);
    return t;
}

Vector adapt_visual(std::span<const double> raw_feature, const AdaptationLayer& layer) {
    return adapt_visual_traced(raw_feature, layer).output;
}

Vector attention_weights(const Matrix& rows, std::span<const double> visual) {
    if (rows.cols() != visual.size()) {
        throw Error(ErrorKind::DimensionMismatch, "filter: prompt width " + std::to_string(rows.cols()) +
                                                      " vs visual width " + std::to_string(visual.size()));
    }
    if (rows.rows() == 0) throw Error(ErrorKind::DimensionMismatch, "filter: empty prompt");
    Vector logits = matvec(rows, visual);
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(rows.cols()));
    double hi = -INFINITY;
    for (double& z : logits) {
        z *= inv_sqrt_m;
        hi = std::max(hi, z);
    }
    double sum = 0.0;
    for (double& z : logits) {
        z = std::exp(z - hi);
        sum += z;
    }
    for (double& z : logits) z /= sum;
    return logits;
}

FilterTrace filter_traced(const Matrix& rows, std::span<const double> visual, const KnowledgeFilter& f) {
    if (f.psi.rows() != rows.cols() || f.psi.cols() != rows.cols() || f.bias.size() != rows.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "filter projection does not match prompt width");
    }
    FilterTrace t;
    t.weights = attention_weights(rows, visual);
    t.pooled.assign(rows.cols(), 0.0);
    matvec_t_acc(rows, t.weights, t.pooled);
    t.output = matvec(f.psi, t.pooled);
    axpy(1.0, f.bias, t.output);
    return t;
}

Vector filter(const Matrix& rows, std::span<const double> visual, const KnowledgeFilter& f) {
    return filter_traced(rows, visual, f).output;
}

ComposedPrompt compose_prompt(std::span<const double> entity_token, std::span<const double> description_token,
                              const Matrix& context, std::span<const double> class_embedding) {
    const std::size_t m = entity_token.size();
    if (description_token.size() != m || context.cols() != m || class_embedding.size() != m) {
        throw Error(ErrorKind::DimensionMismatch, "compose_prompt: all rows must share one width");
    }
    ComposedPrompt p{Matrix(context.rows() + 3, m)};
    std::copy(entity_token.begin(), entity_token.end(), p.rows.row(0).begin());
    std::copy(description_token.begin(), description_token.end(), p.rows.row(1).begin());
    for (std::size_t i = 0; i < context.rows(); ++i) {
        auto src = context.row(i);
        std::copy(src.begin(), src.end(), p.rows.row(2 + i).begin());
    }
    std::copy(class_embedding.begin(), class_embedding.end(), p.rows.row(p.rows.rows() - 1).begin());
    return p;
}

Vector MeanPoolTextEncoder::encode(const Matrix& rows) const {
    Vector acc(rows.cols(), 0.0);
    for (std::size_t i = 0; i < rows.rows(); ++i) axpy(1.0, rows.row(i), acc);
    if (rows.rows() > 0) scale(acc, 1.0 / static_cast<double>(rows.rows()));
    return acc;
}

Vector encode_text(const ComposedPrompt& prompt, const TextEncoder& encoder) {
    Vector f = encoder.encode(prompt.rows);
    const double n = norm(f);
    if (!std::isfinite(n) || n == 0.0) throw Error(ErrorKind::EncoderFailure, "text encoding has zero or non-finite norm");
    scale(f, 1.0 / n);
    return f;
}

}  // namespace kgprompt
