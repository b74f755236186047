#include <doctest.h>

#include <cmath>

#include "check_kind.hpp"
#include "fixtures.hpp"
#include "kgprompt/trainer.hpp"
#include "problems.hpp"

using namespace kgprompt;

namespace {

ModelParams scalar_params(double x) {
    ModelParams p;
    p.context.push_back(Matrix::from_rows({{x}}));
    return p;
}

double scalar(const ModelParams& p) { return p.context[0](0, 0); }

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.lr0 = 0.05;
    cfg.batch_size = 5;
    cfg.epochs = 6;
    cfg.tau = 0.2;
    cfg.seed = 17;
    return cfg;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("cosine schedule") {
    CHECK(cosine_lr(0, 10, 0.001) == 0.001);
    CHECK(cosine_lr(10, 10, 0.001) == 0.0);
    CHECK(cosine_lr(5, 10, 0.001) == doctest::Approx(0.0005).epsilon(1e-12));
    CHECK(cosine_lr(1, 4, 1.0) == doctest::Approx((1.0 + std::cos(M_PI / 4)) / 2));
    double prev = cosine_lr(0, 997, 0.3);
    for (std::size_t t = 1; t <= 997; ++t) {
        const double lr = cosine_lr(t, 997, 0.3);
        CHECK(lr <= prev);
        prev = lr;
    }
    CHECK_KIND(cosine_lr(0, 0, 1.0), ErrorKind::InvalidArgument);
    CHECK_KIND(cosine_lr(11, 10, 1.0), ErrorKind::InvalidArgument);
}

TEST_CASE("momentum step arithmetic") {
    auto p = scalar_params(1.0);
    auto v = scalar_params(0.0);
    sgd_step(p, scalar_params(2.0), v, 0.1, 0.9, 0.0);
    CHECK(scalar(v) == doctest::Approx(-0.2));
    CHECK(scalar(p) == doctest::Approx(0.8));
    // Second step carries the velocity.
    sgd_step(p, scalar_params(0.0), v, 0.1, 0.9, 0.0);
    CHECK(scalar(v) == doctest::Approx(-0.18));
    CHECK(scalar(p) == doctest::Approx(0.62));

    auto q = scalar_params(1.0);
    auto w = scalar_params(0.0);
    sgd_step(q, scalar_params(0.0), w, 1.0, 0.9, 0.0005);
    CHECK(scalar(q) == doctest::Approx(0.9995).epsilon(1e-12));

    auto r = scalar_params(3.5);
    auto z = scalar_params(0.0);
    sgd_step(r, scalar_params(0.0), z, 0.7, 0.9, 0.0);
    CHECK(scalar(r) == 3.5);

    auto bad = scalar_params(1.0);
    auto bv = scalar_params(0.0);
    CHECK_KIND(sgd_step(bad, scalar_params(INFINITY), bv, 0.1, 0.9, 0.0), ErrorKind::NonFiniteUpdate);
    ModelParams two = scalar_params(1.0);
    two.context.push_back(Matrix::from_rows({{2.0}}));
    auto tv = scalar_params(0.0);
    CHECK_KIND(sgd_step(two, scalar_params(1.0), tv, 0.1, 0.9, 0.0), ErrorKind::DimensionMismatch);
}

TEST_CASE("configuration checks") {
    CHECK_NOTHROW(TrainConfig{}.validate());
    auto c = TrainConfig{};
    c.lambda = -0.1;
    CHECK_KIND(c.validate(), ErrorKind::Config);
    c = TrainConfig{};
    c.momentum = 1.0;
    CHECK_KIND(c.validate(), ErrorKind::Config);
    c = TrainConfig{};
    c.lr0 = 0.0;
    CHECK_KIND(c.validate(), ErrorKind::Config);
    c = TrainConfig{};
    c.weight_decay = -1e-9;
    CHECK_KIND(c.validate(), ErrorKind::Config);
    c = TrainConfig{};
    c.batch_size = 0;
    CHECK_KIND(c.validate(), ErrorKind::Config);
}

TEST_CASE("zero epochs leave the model untouched") {
    const auto p = problems::random_problem(2, 4, 3, 2, 6);
    auto cfg = quick_config();
    cfg.epochs = 0;
    const auto r = fit(p.batch, p.model, cfg);
    CHECK(r.model == p.model);
    CHECK(r.log.empty());
}

TEST_CASE("fit is deterministic and only moves trainable tensors") {
    const auto p = problems::random_problem(4, 5, 4, 2, 12);
    const auto cfg = quick_config();
    const auto a = fit(p.batch, p.model, cfg);
    const auto b = fit(p.batch, p.model, cfg);
    CHECK(a.model == b.model);
    REQUIRE(a.log.size() == cfg.epochs);
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        CHECK(a.log[e].epoch == e + 1);
        CHECK(a.log[e].total == b.log[e].total);
        CHECK(a.log[e].sce <= 0.0);
        CHECK(a.log[e].total == doctest::Approx(a.log[e].srd + cfg.lambda * a.log[e].sce));
    }
    // The last epoch ends on the final step before the schedule reaches 0.
    CHECK(a.log.back().lr == doctest::Approx(cosine_lr(17, 18, cfg.lr0)));
    CHECK(a.model.params != p.model.params);
    CHECK(a.model.categories == p.model.categories);
    CHECK(a.model.entity_rows == p.model.entity_rows);
    CHECK(a.model.description_rows == p.model.description_rows);
    CHECK(a.model.class_embeddings == p.model.class_embeddings);

    auto other = cfg;
    other.seed = 18;
    CHECK(fit(p.batch, p.model, other).model != a.model);
}

TEST_CASE("training lowers the objective") {
    const auto p = problems::random_problem(6, 6, 4, 2, 20);
    auto cfg = quick_config();
    cfg.epochs = 40;
    const auto r = fit(p.batch, p.model, cfg);
    const ObjectiveOptions opt{cfg.tau, cfg.lambda, nullptr};
    CHECK(batch_loss(r.model, p.batch, opt).srd < batch_loss(p.model, p.batch, opt).srd);
    CHECK(r.log.back().total < r.log.front().total);
}

TEST_CASE("pure cross-entropy when lambda is zero") {
    const auto p = problems::random_problem(8, 4, 3, 2, 8);
    auto cfg = quick_config();
    cfg.lambda = 0.0;
    const auto r = fit(p.batch, p.model, cfg);
    for (const auto& e : r.log) CHECK(e.total == e.srd);
}

TEST_CASE("a missing class is rejected") {
    auto p = problems::random_problem(3, 4, 3, 2, 6);
    for (auto& s : p.batch) s.label = 0;
    CHECK_KIND(fit(p.batch, p.model, quick_config()), ErrorKind::EmptyClass);
    p.batch[0].label = 5;
    CHECK_KIND(fit(p.batch, p.model, quick_config()), ErrorKind::InvalidArgument);
    auto bad = quick_config();
    bad.lambda = -1.0;
    CHECK_KIND(fit(p.batch, p.model, bad), ErrorKind::Config);
}

TEST_CASE("the encoder is frozen during training") {
    auto cfg = fixtures::toy_config();
    cfg.train.epochs = 2;
    const auto exp = fixtures::toy_experiment(cfg);
    const ToyEncoder enc(cfg.image_size, cfg.patch_grid, cfg.encoder_dim, cfg.encoder_seed);
    const auto before = enc.checksum();
    SyntheticSpec spec;
    spec.subjects = 2;
    spec.images_per_subject_per_class = 3;
    const auto samples = encode_synthetic(make_synthetic(spec), enc, exp.classes, Split::Train);
    std::vector<EncodedSample> train;
    for (const auto& s : samples) train.push_back(s.features);
    const auto r = fit(train, exp.initial_model(1), cfg.train);
    CHECK(r.log.size() == 2);
    CHECK(enc.checksum() == before);
    CHECK(enc.checksum() == ToyEncoder(cfg.image_size, cfg.patch_grid, cfg.encoder_dim, cfg.encoder_seed).checksum());
}

}
