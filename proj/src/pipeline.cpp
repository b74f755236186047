#include "kgprompt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kgprompt/error.hpp"

namespace kgprompt {

ClassMapping map_classes(const std::vector<std::string>& categories, const std::string& real_category,
                         const std::string& mask_category) {
    auto index = [&](const std::string& name) {
        const auto it = std::find(categories.begin(), categories.end(), name);
        if (it == categories.end()) throw Error(ErrorKind::UnknownCategory, "no category named '" + name + "'");
        return static_cast<std::size_t>(it - categories.begin());
    };
    ClassMapping c{index(real_category), index(mask_category)};
    if (c.real == c.mask) throw Error(ErrorKind::Config, "real and mask categories must differ");
    return c;
}

LabeledSample make_sample(const EncoderOutput& out, Label label, const ClassMapping& classes, std::string subject,
                          std::string attack_type, std::string path, Split split) {
    LabeledSample s;
    s.features.global = out.global_feature;
    s.features.patches = out.patch_features;
    s.features.label = label == Label::Real ? classes.real : classes.mask;
    s.label = label;
    s.subject = std::move(subject);
    s.attack_type = std::move(attack_type);
    s.path = std::move(path);
    s.split = split;
    return s;
}

std::vector<LabeledSample> encode_manifest(const Manifest& m, const EncoderBackend& backend,
                                           const ClassMapping& classes) {
    std::vector<LabeledSample> out;
    out.reserve(m.rows.size());
    for (const auto& row : m.rows) {
        const auto path = m.resolve(row);
        out.push_back(make_sample(encode(read_ppm(path), backend), row.label, classes, row.subject,
                                  row.attack_type, path, row.split));
    }
    return out;
}

std::vector<LabeledSample> encode_synthetic(const std::vector<SyntheticImage>& images, const EncoderBackend& backend,
                                            const ClassMapping& classes, Split split) {
    std::vector<LabeledSample> out;
    out.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& img = images[i];
        out.push_back(make_sample(encode(img.image, backend), img.label, classes, img.subject, img.attack_type,
                                  "synthetic:" + img.subject + ":" + std::to_string(i), split));
    }
    return out;
}

double real_score(const Model& model, const LabeledSample& s, const ClassMapping& classes, double tau) {
    return predict(model, s.features.global, tau)[classes.real];
}

ScoreSet score_set(const Model& model, const std::vector<LabeledSample>& samples, const ClassMapping& classes,
                   double tau) {
    ScoreSet set;
    for (const auto& s : samples) {
        const double p = real_score(model, s, classes, tau);
        if (s.label == Label::Real) {
            set.genuine.push_back(p);
        } else {
            set.attack.push_back(p);
            set.attack_types.push_back(s.attack_type);
        }
    }
    return set;
}

Model Experiment::initial_model(std::uint64_t seed) const {
    auto b = bundles;
    if (b.empty()) throw Error(ErrorKind::InvalidArgument, "experiment has no prompt bundles");
    auto ctx = init_context(b.size(), context_len, b.front().class_embedding.size(), seed);
    for (std::size_t k = 0; k < b.size(); ++k) b[k].context = std::move(ctx[k]);
    return build_model(b, shape, seed ^ 0x9e3779b97f4a7c15ull);
}

namespace {

std::vector<EncodedSample> features_of(const std::vector<LabeledSample>& samples) {
    std::vector<EncodedSample> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.features);
    return out;
}

void require_classes(const std::vector<LabeledSample>& samples, const std::string& what) {
    const bool real = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.label == Label::Real; });
    const bool mask = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.label == Label::Mask; });
    if (!real) throw Error(ErrorKind::EmptyClass, what + " has no real-face samples");
    if (!mask) throw Error(ErrorKind::EmptyClass, what + " has no mask samples");
}

}  // namespace

TrainedDetector train_detector(const Experiment& exp, const std::vector<LabeledSample>& train,
                               const std::vector<LabeledSample>& dev, std::uint64_t seed) {
    require_classes(train, "training set");
    require_classes(dev, "dev set");
    TrainConfig cfg = exp.train;
    cfg.seed = seed;
    TrainedDetector d{fit(features_of(train), exp.initial_model(seed), cfg), {}};
    d.dev = eer_threshold(score_set(d.fit.model, dev, exp.classes, cfg.tau));
    return d;
}

void assign_auto_splits(std::vector<LabeledSample>& samples, std::uint64_t seed) {
    std::set<std::string> auto_subjects;
    for (const auto& s : samples) {
        if (s.split == Split::Auto) auto_subjects.insert(s.subject);
    }
    if (auto_subjects.empty()) return;
    std::vector<std::string> order(auto_subjects.begin(), auto_subjects.end());
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_train = static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(order.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, order.size() > 1 ? order.size() - 1 : 1);
    const std::set<std::string> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    for (auto& s : samples) {
        if (s.split == Split::Auto) s.split = train.count(s.subject) ? Split::Train : Split::Dev;
    }
}

std::vector<LabeledSample> select_split(const std::vector<LabeledSample>& samples, Split split) {
    std::vector<LabeledSample> out;
    for (const auto& s : samples) {
        if (s.split == split) out.push_back(s);
    }
    return out;
}

void check_disjoint(const Manifest& train, const Manifest& test) {
    if (!train.source.empty() && train.source == test.source) {
        throw Error(ErrorKind::InvalidArgument, "train and test manifests are the same file");
    }
    std::set<std::string> seen;
    for (const auto& r : train.rows) seen.insert(train.resolve(r));
    for (const auto& r : test.rows) {
        if (seen.count(test.resolve(r))) {
            throw Error(ErrorKind::InvalidArgument, "image '" + r.path + "' appears in both manifests");
        }
    }
}

CrossResult run_cross_dataset(const Experiment& exp, std::vector<LabeledSample> train_side,
                              const std::vector<LabeledSample>& test_side, std::uint64_t seed) {
    std::set<std::string> paths;
    for (const auto& s : train_side) paths.insert(s.path);
    for (const auto& s : test_side) {
        if (paths.count(s.path)) throw Error(ErrorKind::InvalidArgument, "sample '" + s.path + "' is in both sets");
    }
    require_classes(test_side, "test set");
    assign_auto_splits(train_side, seed);
    CrossResult r{train_detector(exp, select_split(train_side, Split::Train), select_split(train_side, Split::Dev), seed),
                  {}};
    const auto& model = r.detector.fit.model;
    r.report = evaluate(score_set(model, select_split(train_side, Split::Dev), exp.classes, exp.train.tau),
                        score_set(model, test_side, exp.classes, exp.train.tau));
    return r;
}

MetricSummary summarize(const std::vector<double>& values) {
    MetricSummary s;
    if (values.empty()) return s;
    const double n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / n);
    return s;
}

LoocvReport run_loocv(const Experiment& exp, const std::vector<LabeledSample>& samples, const LoocvOptions& opt) {
    std::set<std::string> subject_set;
    for (const auto& s : samples) subject_set.insert(s.subject);
    const std::vector<std::string> subjects(subject_set.begin(), subject_set.end());
    const std::size_t need = opt.train_subjects + opt.dev_subjects + 1;
    if (opt.train_subjects == 0 || opt.dev_subjects == 0 || subjects.size() < need) {
        throw Error(ErrorKind::TooFewSubjects, "LOOCV needs " + std::to_string(need) + " subjects, manifest has " +
                                                   std::to_string(subjects.size()));
    }
    if (opt.rounds == 0) throw Error(ErrorKind::InvalidArgument, "rounds must be >= 1");

    LoocvReport rep;
    for (std::size_t r = 0; r < opt.rounds; ++r) {
        const std::uint64_t seed = opt.seed + r;
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pick(0, subjects.size() - 1);
        LoocvRound round;
        round.round = r;
        round.held_out = subjects[pick(rng)];
        std::vector<std::string> rest;
        for (const auto& s : subjects) {
            if (s != round.held_out) rest.push_back(s);
        }
        std::shuffle(rest.begin(), rest.end(), rng);
        round.train_subjects.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(opt.train_subjects));
        round.dev_subjects.assign(rest.begin() + static_cast<std::ptrdiff_t>(opt.train_subjects),
                                  rest.begin() + static_cast<std::ptrdiff_t>(opt.train_subjects + opt.dev_subjects));
        std::sort(round.train_subjects.begin(), round.train_subjects.end());
        std::sort(round.dev_subjects.begin(), round.dev_subjects.end());

        auto members = [&](const std::vector<std::string>& group) {
            std::vector<LabeledSample> out;
            for (const auto& s : samples) {
                if (std::binary_search(group.begin(), group.end(), s.subject)) out.push_back(s);
            }
            return out;
        };
        const auto train = members(round.train_subjects);
        const auto dev = members(round.dev_subjects);
        const auto test = members({round.held_out});
        require_classes(test, "held-out subject '" + round.held_out + "'");
        const auto det = train_detector(exp, train, dev, seed);
        round.report = evaluate(score_set(det.fit.model, dev, exp.classes, exp.train.tau),
                                score_set(det.fit.model, test, exp.classes, exp.train.tau));
        rep.rounds.push_back(std::move(round));
    }

    auto collect = [&](auto field) {
        std::vector<double> v;
        for (const auto& r : rep.rounds) v.push_back(r.report.*field);
        return summarize(v);
    };
    rep.eer = collect(&EvaluationReport::eer);
    rep.hter = collect(&EvaluationReport::hter);
    rep.auc = collect(&EvaluationReport::auc);
    rep.apcer = collect(&EvaluationReport::apcer);
    rep.bpcer = collect(&EvaluationReport::bpcer);
    rep.acer = collect(&EvaluationReport::acer);
    auto collect_opt = [&](std::optional<double> EvaluationReport::*field) -> std::optional<MetricSummary> {
        std::vector<double> v;
        for (const auto& r : rep.rounds) {
            if ((r.report.*field).has_value()) v.push_back(*(r.report.*field));
        }
        if (v.empty()) return std::nullopt;
        return summarize(v);
    };
    rep.b_at_a_01 = collect_opt(&EvaluationReport::b_at_a_01);
    rep.b_at_a_001 = collect_opt(&EvaluationReport::b_at_a_001);
    return rep;
}

}  // namespace kgprompt
