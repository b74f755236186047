#pragma once

#include <cstdint>
#include <vector>

#include "kgprompt/objectives.hpp"

namespace kgprompt {

struct TrainConfig {
    double lr0 = 0.001;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    std::size_t batch_size = 128;
    std::size_t epochs = 30;
    double lambda = kDefaultLambda;
    double tau = kDefaultTau;
    std::uint64_t seed = 0;

    // Throws Config naming the offending field.
    void validate() const;
};

// lr0 * (1 + cos(pi t / T)) / 2
double cosine_lr(std::size_t step, std::size_t total_steps, double lr0);

// v <- momentum v - lr (g + weight_decay theta); theta <- theta + v.
// Throws NonFiniteUpdate if any updated value is not finite.
void sgd_step(ModelParams& params, const ModelParams& grads, ModelParams& velocity, double lr, double momentum,
              double weight_decay);

struct EpochLog {
    std::size_t epoch = 0;
    double lr = 0.0;  // learning rate of the last step in the epoch
    double srd = 0.0;
    double sce = 0.0;
    double total = 0.0;
};

struct FitResult {
    Model model;
    std::vector<EpochLog> log;
};

// Seeded reshuffle every epoch; the last partial batch is kept. Only
// ModelParams change. Throws EmptyClass when a class has no training sample
// and NonFiniteLoss if the objective diverges.
FitResult fit(const std::vector<EncodedSample>& train, Model model, const TrainConfig& cfg);

}  // namespace kgprompt
