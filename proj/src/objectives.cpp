#include "kgprompt/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "kgprompt/error.hpp"

namespace kgprompt {

namespace {

void check_tau(double tau) {
    if (!(tau > 0.0)) throw Error(ErrorKind::NonPositiveTemperature, "temperature must be > 0");
}

// In-place log-softmax; returns nothing, `z` becomes log-probabilities.
void log_softmax(std::span<double> z) {
    const double hi = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - hi);
    const double lse = hi + std::log(sum);
    for (double& v : z) v -= lse;
}

Vector softmax_of_cosines(std::span<const double> cosines, double tau) {
    Vector z(cosines.begin(), cosines.end());
    for (double& v : z) v /= tau;
    log_softmax(z);
    for (double& v : z) v = std::exp(v);
    return z;
}

}  // namespace

SimilarityMatrix patch_similarity(const std::vector<Vector>& patch_features, const std::vector<Vector>& text_features,
                                  double tau) {
    check_tau(tau);
    SimilarityMatrix s{Matrix(patch_features.size(), text_features.size()), tau};
    Vector cosines(text_features.size());
    for (std::size_t j = 0; j < patch_features.size(); ++j) {
        for (std::size_t k = 0; k < text_features.size(); ++k) {
            if (patch_features[j].size() != text_features[k].size()) {
                throw Error(ErrorKind::DimensionMismatch, "patch and text features differ in width");
            }
            cosines[k] = cosine(patch_features[j], text_features[k]);
        }
        const Vector row = softmax_of_cosines(cosines, tau);
        std::copy(row.begin(), row.end(), s.values.row(j).begin());
    }
    return s;
}

std::vector<std::size_t> irrelevant_set(const SimilarityMatrix& s, std::size_t label) {
    if (label >= s.values.cols()) throw Error(ErrorKind::InvalidArgument, "label out of range");
    std::vector<std::size_t> omega;
    for (std::size_t j = 0; j < s.values.rows(); ++j) {
        const auto row = s.values.row(j);
        const double best = *std::max_element(row.begin(), row.end());
        if (row[label] < best) omega.push_back(j);
    }
    return omega;
}

double sce_loss(const SimilarityMatrix& s, std::span<const std::size_t> omega) {
    double acc = 0.0;
    for (std::size_t j : omega) {
        for (double p : s.values.row(j)) {
            const double q = std::clamp(p, kProbabilityFloor, 1.0);
            acc += q * std::log(q);
        }
    }
    return acc;
}

Vector class_probs(std::span<const double> visual, const std::vector<Vector>& text_features, double tau) {
    check_tau(tau);
    Vector cosines(text_features.size());
    for (std::size_t k = 0; k < text_features.size(); ++k) {
        if (text_features[k].size() != visual.size()) {
            throw Error(ErrorKind::DimensionMismatch, "image and text features differ in width");
        }
        cosines[k] = cosine(visual, text_features[k]);
    }
    return softmax_of_cosines(cosines, tau);
}

double srd_loss(std::span<const double> probs, std::size_t label) {
    if (label >= probs.size()) throw Error(ErrorKind::InvalidArgument, "label out of range");
    return -std::log(std::clamp(probs[label], kProbabilityFloor, 1.0));
}

double total_loss(double srd, double sce, double lambda) {
    if (!(lambda >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
    return srd + lambda * sce;
}

namespace {

struct ClassTrace {
    FilterTrace entity;
    FilterTrace description;
    double u_norm = 0.0;
    Vector text;  // unit
};

struct SampleTrace {
    AdaptationTrace global;
    std::vector<AdaptationTrace> patches;
    std::vector<ClassTrace> classes;
    Vector probs;              // d
    Matrix patch_cos;          // J x K
    Matrix patch_log_probs;    // J x K
    LossBreakdown loss;
};

SampleTrace forward(const Model& model, const EncodedSample& sample, const ObjectiveOptions& opt,
                    const std::vector<std::size_t>* fixed_omega) {
    check_tau(opt.tau);
    const std::size_t K = model.num_classes();
    if (sample.label >= K) throw Error(ErrorKind::InvalidArgument, "sample label out of range");
    static const MeanPoolTextEncoder encoder;

    SampleTrace tr;
    tr.global = adapt_visual_traced(sample.global, model.params.adapter);
    const Vector& f = tr.global.output;

    std::vector<Vector> texts;
    for (std::size_t k = 0; k < K; ++k) {
        ClassTrace ct;
        ct.entity = filter_traced(model.entity_rows[k], f, model.params.entity_filter);
        ct.description = filter_traced(model.description_rows[k], f, model.params.description_filter);
        const auto prompt =
            compose_prompt(ct.entity.output, ct.description.output, model.params.context[k], model.class_embeddings[k]);
        Vector u = encoder.encode(prompt.rows);
        ct.u_norm = norm(u);
        if (!std::isfinite(ct.u_norm) || ct.u_norm == 0.0) {
            throw Error(ErrorKind::EncoderFailure, "text encoding has zero or non-finite norm");
        }
        scale(u, 1.0 / ct.u_norm);
        ct.text = std::move(u);
        texts.push_back(ct.text);
        tr.classes.push_back(std::move(ct));
    }

    Vector logits(K);
    for (std::size_t k = 0; k < K; ++k) logits[k] = cosine(f, texts[k]) / opt.tau;
    log_softmax(logits);
    tr.probs = logits;
    for (double& p : tr.probs) p = std::exp(p);
    tr.loss.srd = -logits[sample.label];
    tr.loss.class_probs = tr.probs;

    const std::size_t J = sample.patches.size();
    tr.patch_cos = Matrix(J, K);
    tr.patch_log_probs = Matrix(J, K);
    SimilarityMatrix sim{Matrix(J, K), opt.tau};
    for (std::size_t j = 0; j < J; ++j) {
        tr.patches.push_back(adapt_visual_traced(sample.patches[j], model.params.adapter));
        const Vector& fj = tr.patches.back().output;
        auto lp = tr.patch_log_probs.row(j);
        for (std::size_t k = 0; k < K; ++k) {
            tr.patch_cos(j, k) = cosine(fj, texts[k]);
            lp[k] = tr.patch_cos(j, k) / opt.tau;
        }
        log_softmax(lp);
        for (std::size_t k = 0; k < K; ++k) sim.values(j, k) = std::exp(lp[k]);
    }
    tr.loss.omega = fixed_omega ? *fixed_omega : irrelevant_set(sim, sample.label);
    double sce = 0.0;
    for (std::size_t j : tr.loss.omega) {
        if (j >= J) throw Error(ErrorKind::InvalidArgument, "irrelevant patch index out of range");
        for (std::size_t k = 0; k < K; ++k) sce += sim.values(j, k) * tr.patch_log_probs(j, k);
    }
    tr.loss.sce = sce;
    tr.loss.total = total_loss(tr.loss.srd, tr.loss.sce, opt.lambda);
    return tr;
}

// d cos(f, t) / d f for unit t, scaled by `upstream`, accumulated into g_f;
// d cos / d t accumulated into g_t.
void cosine_backward(std::span<const double> f, std::span<const double> t, double upstream, std::span<double> g_f,
                     std::span<double> g_t) {
    const double nf = norm(f);
    if (nf == 0.0 || upstream == 0.0) return;
    const double c = dot(f, t) / nf;
    axpy(upstream / nf, t, g_f);
    axpy(-upstream * c / (nf * nf), f, g_f);
    axpy(upstream / nf, f, g_t);
}

void filter_backward(const Matrix& rows, std::span<const double> visual, const KnowledgeFilter& filt,
                     const FilterTrace& tr, std::span<const double> g_out, KnowledgeFilter& g_filt,
                     std::span<double> g_visual) {
    add_outer(g_filt.psi, 1.0, g_out, tr.pooled);
    axpy(1.0, g_out, g_filt.bias);
    Vector g_pooled(rows.cols(), 0.0);
    matvec_t_acc(filt.psi, g_out, g_pooled);
    const Vector g_weights = matvec(rows, g_pooled);
    const double mean = dot(tr.weights, g_weights);
    Vector g_logits(rows.rows());
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(rows.cols()));
    for (std::size_t i = 0; i < g_logits.size(); ++i) {
        g_logits[i] = tr.weights[i] * (g_weights[i] - mean) * inv_sqrt_m;
    }
    (void)visual;
    matvec_t_acc(rows, g_logits, g_visual);
}

void adapter_backward(std::span<const double> input, const AdaptationLayer& layer, const AdaptationTrace& tr,
                      std::span<const double> g_out, AdaptationLayer& g_layer) {
    add_outer(g_layer.w2, 1.0, g_out, tr.hidden);
    axpy(1.0, g_out, g_layer.b2);
    Vector g_hidden(layer.w2.cols(), 0.0);
    matvec_t_acc(layer.w2, g_out, g_hidden);
    for (std::size_t i = 0; i < g_hidden.size(); ++i) {
        if (!(tr.pre_activation[i] > 0.0)) g_hidden[i] = 0.0;
    }
    add_outer(g_layer.w1, 1.0, g_hidden, input);
    axpy(1.0, g_hidden, g_layer.b1);
}

void backward(const Model& model, const EncodedSample& sample, const SampleTrace& tr, const ObjectiveOptions& opt,
              double weight, ModelParams& g) {
    const std::size_t K = model.num_classes();
    const std::size_t m = model.width();
    const Vector& f = tr.global.output;

    Vector g_f(m, 0.0);
    std::vector<Vector> g_text(K, Vector(m, 0.0));

    for (std::size_t k = 0; k < K; ++k) {
        const double g_logit = weight * (tr.probs[k] - (k == sample.label ? 1.0 : 0.0));
        cosine_backward(f, tr.classes[k].text, g_logit / opt.tau, g_f, g_text[k]);
    }

    std::vector<Vector> g_patch(sample.patches.size());
    if (opt.lambda != 0.0) {
        for (std::size_t j : tr.loss.omega) {
            const auto lp = tr.patch_log_probs.row(j);
            double row_sce = 0.0;
            for (std::size_t k = 0; k < K; ++k) row_sce += std::exp(lp[k]) * lp[k];
            g_patch[j].assign(m, 0.0);
            const Vector& fj = tr.patches[j].output;
            for (std::size_t k = 0; k < K; ++k) {
                const double g_logit = weight * opt.lambda * std::exp(lp[k]) * (lp[k] - row_sce);
                cosine_backward(fj, tr.classes[k].text, g_logit / opt.tau, g_patch[j], g_text[k]);
            }
        }
    }

    const double rows_in_prompt = static_cast<double>(model.params.context[0].rows() + 3);
    for (std::size_t k = 0; k < K; ++k) {
        const ClassTrace& ct = tr.classes[k];
        // Through the L2 normalization, then the mean over prompt rows.
        Vector g_row = g_text[k];
        axpy(-dot(g_text[k], ct.text), ct.text, g_row);
        scale(g_row, 1.0 / (ct.u_norm * rows_in_prompt));

        auto& ctx = g.context[k];
        for (std::size_t l = 0; l < ctx.rows(); ++l) axpy(1.0, g_row, ctx.row(l));
        filter_backward(model.entity_rows[k], f, model.params.entity_filter, ct.entity, g_row, g.entity_filter, g_f);
        filter_backward(model.description_rows[k], f, model.params.description_filter, ct.description, g_row,
                        g.description_filter, g_f);
    }

    adapter_backward(sample.global, model.params.adapter, tr.global, g_f, g.adapter);
    for (std::size_t j = 0; j < g_patch.size(); ++j) {
        if (g_patch[j].empty()) continue;
        adapter_backward(sample.patches[j], model.params.adapter, tr.patches[j], g_patch[j], g.adapter);
    }
}

const std::vector<std::size_t>* omega_for(const ObjectiveOptions& opt, std::size_t i, std::size_t batch) {
    if (!opt.fixed_omega) return nullptr;
    if (opt.fixed_omega->size() != batch) {
        throw Error(ErrorKind::InvalidArgument, "fixed_omega must have one entry per sample");
    }
    return &(*opt.fixed_omega)[i];
}

}  // namespace

LossBreakdown sample_loss(const Model& model, const EncodedSample& sample, const ObjectiveOptions& opt,
                          const std::vector<std::size_t>* fixed_omega) {
    return forward(model, sample, opt, fixed_omega).loss;
}

BatchLoss batch_loss(const Model& model, std::span<const EncodedSample> batch, const ObjectiveOptions& opt) {
    BatchLoss out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.per_sample.push_back(sample_loss(model, batch[i], opt, omega_for(opt, i, batch.size())));
        out.srd += out.per_sample.back().srd;
        out.sce += out.per_sample.back().sce;
        out.total += out.per_sample.back().total;
    }
    if (!batch.empty()) {
        const double n = static_cast<double>(batch.size());
        out.srd /= n;
        out.sce /= n;
        out.total /= n;
    }
    return out;
}

GradientResult gradients(const Model& model, std::span<const EncodedSample> batch, const ObjectiveOptions& opt) {
    GradientResult res{{}, zeros_like(model.params)};
    if (batch.empty()) return res;
    const double weight = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const SampleTrace tr = forward(model, batch[i], opt, omega_for(opt, i, batch.size()));
        backward(model, batch[i], tr, opt, weight, res.grad);
        res.loss.srd += weight * tr.loss.srd;
        res.loss.sce += weight * tr.loss.sce;
        res.loss.total += weight * tr.loss.total;
        res.loss.per_sample.push_back(tr.loss);
    }
    for_each_tensor(res.grad, [](const std::string& name, std::span<const double> v) {
        for (double x : v) {
            if (!std::isfinite(x)) throw Error(ErrorKind::NonFiniteGradient, "non-finite gradient in " + name);
        }
    });
    return res;
}

Vector predict(const Model& model, std::span<const double> raw_global, double tau) {
    const Vector f = adapt_visual(raw_global, model.params.adapter);
    return class_probs(f, text_features(model, f), tau);
}

}  // namespace kgprompt
