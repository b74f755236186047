#include "kgprompt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "kgprompt/error.hpp"

namespace kgprompt {

void TrainConfig::validate() const {
    if (!(lr0 > 0.0)) throw Error(ErrorKind::Config, "lr0 must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorKind::Config, "momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw Error(ErrorKind::Config, "weight_decay must be >= 0");
    if (!(lambda >= 0.0)) throw Error(ErrorKind::Config, "lambda must be >= 0");
    if (!(tau > 0.0)) throw Error(ErrorKind::Config, "tau must be > 0");
    if (batch_size == 0) throw Error(ErrorKind::Config, "batch_size must be >= 1");
}

double cosine_lr(std::size_t step, std::size_t total_steps, double lr0) {
    if (total_steps == 0) throw Error(ErrorKind::InvalidArgument, "total steps must be >= 1");
    if (step > total_steps) throw Error(ErrorKind::InvalidArgument, "step beyond schedule");
    if (step == total_steps) return 0.0;
    const double ratio = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * ratio));
}

void sgd_step(ModelParams& params, const ModelParams& grads, ModelParams& velocity, double lr, double momentum,
              double weight_decay) {
    std::vector<std::span<double>> theta;
    std::vector<std::span<const double>> g;
    std::vector<std::span<double>> v;
    for_each_tensor(params, [&](const std::string&, std::span<double> x) { theta.push_back(x); });
    for_each_tensor(grads, [&](const std::string&, std::span<const double> x) { g.push_back(x); });
    for_each_tensor(velocity, [&](const std::string&, std::span<double> x) { v.push_back(x); });
    if (theta.size() != g.size() || theta.size() != v.size()) {
        throw Error(ErrorKind::DimensionMismatch, "sgd_step: parameter structure mismatch");
    }
    for (std::size_t t = 0; t < theta.size(); ++t) {
        if (theta[t].size() != g[t].size() || theta[t].size() != v[t].size()) {
            throw Error(ErrorKind::DimensionMismatch, "sgd_step: tensor shape mismatch");
        }
        for (std::size_t i = 0; i < theta[t].size(); ++i) {
            v[t][i] = momentum * v[t][i] - lr * (g[t][i] + weight_decay * theta[t][i]);
            theta[t][i] += v[t][i];
            if (!std::isfinite(theta[t][i]) || !std::isfinite(v[t][i])) {
                throw Error(ErrorKind::NonFiniteUpdate, "non-finite parameter after SGD step");
            }
        }
    }
}

FitResult fit(const std::vector<EncodedSample>& train, Model model, const TrainConfig& cfg) {
    cfg.validate();
    FitResult res{std::move(model), {}};
    if (cfg.epochs == 0) return res;

    std::vector<std::size_t> per_class(res.model.num_classes(), 0);
    for (const auto& s : train) {
        if (s.label >= per_class.size()) throw Error(ErrorKind::InvalidArgument, "training label out of range");
        ++per_class[s.label];
    }
    for (std::size_t k = 0; k < per_class.size(); ++k) {
        if (per_class[k] == 0) {
            throw Error(ErrorKind::EmptyClass, "no training samples for class '" + res.model.categories[k] + "'");
        }
    }

    const std::size_t n = train.size();
    const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
    const std::size_t total_steps = steps_per_epoch * cfg.epochs;
    const ObjectiveOptions opt{cfg.tau, cfg.lambda, nullptr};

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    ModelParams velocity = zeros_like(res.model.params);
    std::vector<EncodedSample> batch;
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        EpochLog log{epoch + 1, 0.0, 0.0, 0.0, 0.0};
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
            const GradientResult gr = gradients(res.model, batch, opt);
            if (!std::isfinite(gr.loss.total)) throw Error(ErrorKind::NonFiniteLoss, "training loss is not finite");
            const double w = static_cast<double>(end - start) / static_cast<double>(n);
            log.srd += w * gr.loss.srd;
            log.sce += w * gr.loss.sce;
            log.total += w * gr.loss.total;
            log.lr = cosine_lr(step, total_steps, cfg.lr0);
            sgd_step(res.model.params, gr.grad, velocity, log.lr, cfg.momentum, cfg.weight_decay);
            ++step;
        }
        res.log.push_back(log);
    }
    return res;
}

}  // namespace kgprompt
