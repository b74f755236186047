#include "kgprompt/model.hpp"

#include <cmath>
#include <random>

#include "kgprompt/error.hpp"

namespace kgprompt {

void for_each_tensor(ModelParams& p, const std::function<void(const std::string&, std::span<double>)>& fn) {
    for (std::size_t k = 0; k < p.context.size(); ++k) fn("context." + std::to_string(k), p.context[k].flat());
    fn("adapter.w1", p.adapter.w1.flat());
    fn("adapter.b1", p.adapter.b1);
    fn("adapter.w2", p.adapter.w2.flat());
    fn("adapter.b2", p.adapter.b2);
    fn("entity_filter.psi", p.entity_filter.psi.flat());
    fn("entity_filter.bias", p.entity_filter.bias);
    fn("description_filter.psi", p.description_filter.psi.flat());
    fn("description_filter.bias", p.description_filter.bias);
}

void for_each_tensor(const ModelParams& p,
                     const std::function<void(const std::string&, std::span<const double>)>& fn) {
    for_each_tensor(const_cast<ModelParams&>(p),
                    [&](const std::string& name, std::span<double> v) { fn(name, std::span<const double>(v)); });
}

ModelParams zeros_like(const ModelParams& p) {
    ModelParams z = p;
    for_each_tensor(z, [](const std::string&, std::span<double> v) { std::fill(v.begin(), v.end(), 0.0); });
    return z;
}

std::size_t parameter_count(const ModelParams& p) {
    std::size_t n = 0;
    for_each_tensor(p, [&](const std::string&, std::span<const double> v) { n += v.size(); });
    return n;
}

Model build_model(const std::vector<PromptBundle>& bundles, const ModelShape& shape, std::uint64_t seed) {
    if (bundles.size() < 2) throw Error(ErrorKind::InvalidArgument, "model needs at least two classes");
    Model model;
    const std::size_t m = bundles.front().class_embedding.size();
    for (const auto& b : bundles) {
        if (b.class_embedding.size() != m || b.entity_prompt.rows.cols() != m ||
            b.description_prompt.rows.cols() != m || b.context.cols() != m) {
            throw Error(ErrorKind::DimensionMismatch, "prompt bundle widths differ");
        }
        model.categories.push_back(b.category);
        model.entity_rows.push_back(b.entity_prompt.rows);
        model.description_rows.push_back(b.description_prompt.rows);
        model.class_embeddings.push_back(b.class_embedding);
        model.params.context.push_back(b.context);
    }
    std::mt19937_64 rng(seed);
    auto gaussian = [&](Matrix& w, double stddev) {
        std::normal_distribution<double> dist(0.0, stddev);
        for (double& x : w.flat()) x = dist(rng);
    };
    auto& ad = model.params.adapter;
    ad.w1 = Matrix(shape.hidden_dim, shape.encoder_dim);
    gaussian(ad.w1, std::sqrt(2.0 / static_cast<double>(shape.encoder_dim)));
    ad.b1.assign(shape.hidden_dim, 0.0);
    ad.w2 = Matrix(m, shape.hidden_dim);
    gaussian(ad.w2, std::sqrt(1.0 / static_cast<double>(shape.hidden_dim)));
    ad.b2.assign(m, 0.0);
    model.params.entity_filter = {Matrix::identity(m), Vector(m, 0.0)};
    model.params.description_filter = {Matrix::identity(m), Vector(m, 0.0)};
    return model;
}

std::vector<Vector> text_features(const Model& model, std::span<const double> visual) {
    static const MeanPoolTextEncoder encoder;
    std::vector<Vector> out;
    out.reserve(model.num_classes());
    for (std::size_t k = 0; k < model.num_classes(); ++k) {
        const Vector ep = filter(model.entity_rows[k], visual, model.params.entity_filter);
        const Vector dp = filter(model.description_rows[k], visual, model.params.description_filter);
        out.push_back(encode_text(compose_prompt(ep, dp, model.params.context[k], model.class_embeddings[k]), encoder));
    }
    return out;
}

}  // namespace kgprompt
