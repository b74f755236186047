#pragma once

// Training objective: a cross-entropy term aligning the global image feature
// with its class text feature, plus a negative-entropy penalty over patches
// whose most similar class is not the ground truth. All logarithms are
// natural.

#include <optional>
#include <span>
#include <vector>

#include "kgprompt/model.hpp"

namespace kgprompt {

inline constexpr double kDefaultTau = 0.01;
inline constexpr double kDefaultLambda = 0.5;
inline constexpr double kProbabilityFloor = 1e-12;

// Row j is the class distribution of patch j.
struct SimilarityMatrix {
    Matrix values;  // patches x classes
    double tau = kDefaultTau;
};

struct LossBreakdown {
    double srd = 0.0;
    double sce = 0.0;
    double total = 0.0;
    std::vector<std::size_t> omega;
    Vector class_probs;
};

SimilarityMatrix patch_similarity(const std::vector<Vector>& patch_features, const std::vector<Vector>& text_features,
                                  double tau);

// Patches whose most similar class is not `label`. A tie that includes the
// label counts as relevant.
std::vector<std::size_t> irrelevant_set(const SimilarityMatrix& s, std::size_t label);

// sum over omega rows of sum_k s log s, probabilities floored at 1e-12.
double sce_loss(const SimilarityMatrix& s, std::span<const std::size_t> omega);

Vector class_probs(std::span<const double> visual, const std::vector<Vector>& text_features, double tau);

// -log d[label], floored at 1e-12.
double srd_loss(std::span<const double> probs, std::size_t label);

double total_loss(double srd, double sce, double lambda);

// Raw (pre-adaptation) encoder features of one training sample.
struct EncodedSample {
    Vector global;
    std::vector<Vector> patches;
    std::size_t label = 0;
};

struct BatchLoss {
    double srd = 0.0;  // batch means
    double sce = 0.0;
    double total = 0.0;
    std::vector<LossBreakdown> per_sample;
};

struct ObjectiveOptions {
    double tau = kDefaultTau;
    double lambda = kDefaultLambda;
    // When set, the irrelevant-patch sets are taken from here instead of
    // being recomputed (one entry per sample).
    const std::vector<std::vector<std::size_t>>* fixed_omega = nullptr;
};

// Full forward pass for one sample. The cross-entropy and entropy terms are
// evaluated through log-softmax so saturated logits keep finite gradients.
LossBreakdown sample_loss(const Model& model, const EncodedSample& sample, const ObjectiveOptions& opt,
                          const std::vector<std::size_t>* fixed_omega = nullptr);

BatchLoss batch_loss(const Model& model, std::span<const EncodedSample> batch, const ObjectiveOptions& opt);

struct GradientResult {
    BatchLoss loss;
    ModelParams grad;
};

// Exact gradients of the batch-mean objective with respect to every
// trainable tensor. The irrelevant-patch selection is treated as constant.
// Throws NonFiniteGradient.
GradientResult gradients(const Model& model, std::span<const EncodedSample> batch, const ObjectiveOptions& opt);

// Class distribution for an image given its raw encoder output.
Vector predict(const Model& model, std::span<const double> raw_global, double tau);

}  // namespace kgprompt
