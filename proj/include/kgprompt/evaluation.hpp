#pragma once

// Biometric error rates over real-face probability scores. A sample is
// accepted as genuine when its score is >= the threshold.
//
//   FAR(t) = #{attack >= t} / #attack      FRR(t) = #{genuine < t} / #genuine
//
// Threshold candidates are -inf, every distinct score, and +inf; rates are
// step functions with no interpolation. All reported metrics are
// percentages.

#include <optional>
#include <string>
#include <vector>

namespace kgprompt {

struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> attack;
    // Parallel to `attack`; empty means a single anonymous attack type.
    std::vector<std::string> attack_types;
};

struct RocPoint {
    double threshold;
    double far;  // fractions in [0, 1]
    double frr;
};

struct Threshold {
    double value = 0.0;
    std::string source;
};

// Ascending thresholds, including both infinite sentinels.
std::vector<RocPoint> roc_curve(const ScoreSet& s);

struct EerResult {
    Threshold threshold;
    double eer = 0.0;  // percent
};

// Minimizes |FAR - FRR|; ties go to the smaller FAR + FRR, then the smaller
// threshold. EER is the mean of FAR and FRR at that point.
EerResult eer_threshold(const ScoreSet& dev, std::string source = "dev");

double far_at(const ScoreSet& s, double threshold);
double frr_at(const ScoreSet& s, double threshold);

double hter(const ScoreSet& test, const Threshold& t);

// P(genuine > attack) + P(genuine == attack) / 2, in percent.
double auc(const ScoreSet& s);

struct PresentationErrors {
    double apcer = 0.0;
    double bpcer = 0.0;
    double acer = 0.0;
};

// APCER is the worst per-attack-type acceptance rate.
PresentationErrors apcer_bpcer_acer(const ScoreSet& s, const Threshold& t);

// BPCER at the lowest threshold whose APCER does not exceed `target_apcer`
// (a fraction, e.g. 0.1). Throws UnreachableOperatingPoint when some attack
// type has fewer than 1/target samples.
double bpcer_at_apcer(const ScoreSet& s, double target_apcer);

struct EvaluationReport {
    Threshold threshold;
    double eer = 0.0;
    double hter = 0.0;
    double auc = 0.0;
    double apcer = 0.0;
    double bpcer = 0.0;
    double acer = 0.0;
    std::optional<double> b_at_a_01;
    std::optional<double> b_at_a_001;
    std::vector<RocPoint> roc;  // on the test scores
};

// Threshold and EER from `dev`; everything else on `test` at that threshold.
EvaluationReport evaluate(const ScoreSet& dev, const ScoreSet& test);

// Same, with a threshold and dev EER fixed elsewhere (e.g. a checkpoint).
EvaluationReport evaluate_at(const Threshold& threshold, double dev_eer, const ScoreSet& test);

}  // namespace kgprompt
