#pragma once

// Glue between datasets, the trainer and the metrics: encode once, fit,
// score, and run the LOOCV and cross-dataset protocols.

#include <cstdint>
#include <string>
#include <vector>

#include "kgprompt/dataset.hpp"
#include "kgprompt/evaluation.hpp"
#include "kgprompt/trainer.hpp"

namespace kgprompt {

struct ClassMapping {
    std::size_t real = 0;
    std::size_t mask = 1;
};

// Throws UnknownCategory if either name is not a model category.
ClassMapping map_classes(const std::vector<std::string>& categories, const std::string& real_category,
                         const std::string& mask_category);

struct LabeledSample {
    EncodedSample features;  // label holds the class index
    Label label = Label::Real;
    std::string subject;
    std::string attack_type;
    std::string path;
    Split split = Split::Auto;
};

LabeledSample make_sample(const EncoderOutput& out, Label label, const ClassMapping& classes, std::string subject,
                          std::string attack_type, std::string path, Split split);

// Images are read as PPM relative to the manifest.
std::vector<LabeledSample> encode_manifest(const Manifest& m, const EncoderBackend& backend,
                                           const ClassMapping& classes);

std::vector<LabeledSample> encode_synthetic(const std::vector<SyntheticImage>& images, const EncoderBackend& backend,
                                            const ClassMapping& classes, Split split);

// Probability of the real-face class.
double real_score(const Model& model, const LabeledSample& s, const ClassMapping& classes, double tau);

ScoreSet score_set(const Model& model, const std::vector<LabeledSample>& samples, const ClassMapping& classes,
                   double tau);

// Everything needed to start a fresh fit.
struct Experiment {
    std::vector<PromptBundle> bundles;
    ModelShape shape;
    std::size_t context_len = kDefaultContextLength;
    TrainConfig train;
    ClassMapping classes;

    // Context vectors and adapter weights drawn from `seed`.
    Model initial_model(std::uint64_t seed) const;
};

struct TrainedDetector {
    FitResult fit;
    EerResult dev;
};

// Fits on `train`, then takes the EER threshold on `dev`.
TrainedDetector train_detector(const Experiment& exp, const std::vector<LabeledSample>& train,
                               const std::vector<LabeledSample>& dev, std::uint64_t seed);

// Rows with split auto are assigned to train or dev by subject: a seeded
// shuffle of the auto subjects, first 75% (at least one) to train.
void assign_auto_splits(std::vector<LabeledSample>& samples, std::uint64_t seed);

std::vector<LabeledSample> select_split(const std::vector<LabeledSample>& samples, Split split);

struct CrossResult {
    TrainedDetector detector;
    EvaluationReport report;
};

// Throws InvalidArgument when the two sets share a source manifest or any
// image path; EmptyClass when a side lacks genuine or attack samples.
CrossResult run_cross_dataset(const Experiment& exp, std::vector<LabeledSample> train_side,
                              const std::vector<LabeledSample>& test_side, std::uint64_t seed);

void check_disjoint(const Manifest& train, const Manifest& test);

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // population
};

struct LoocvRound {
    std::size_t round = 0;
    std::string held_out;
    std::vector<std::string> train_subjects;
    std::vector<std::string> dev_subjects;
    EvaluationReport report;
};

struct LoocvReport {
    std::vector<LoocvRound> rounds;
    MetricSummary eer, hter, auc, apcer, bpcer, acer;
    // Absent when no round reached the operating point.
    std::optional<MetricSummary> b_at_a_01, b_at_a_001;
};

struct LoocvOptions {
    std::size_t rounds = 20;
    std::size_t train_subjects = 1;
    std::size_t dev_subjects = 1;
    std::uint64_t seed = 0;
};

// Per round r (seed + r): draw one held-out subject, shuffle the rest, take
// the first train_subjects for training and the next dev_subjects for the
// threshold. Throws TooFewSubjects when fewer than
// train_subjects + dev_subjects + 1 subjects exist.
LoocvReport run_loocv(const Experiment& exp, const std::vector<LabeledSample>& samples, const LoocvOptions& opt);

MetricSummary summarize(const std::vector<double>& values);

}  // namespace kgprompt
