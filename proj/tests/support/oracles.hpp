#pragma once

// Independent reference computations. Everything here is written the slow,
// obvious way (explicit loops, long double, no shared helpers with the
// library) so that agreement means something.

#include <optional>
#include <string>
#include <vector>

#include "kgprompt/evaluation.hpp"
#include "kgprompt/linalg.hpp"

namespace oracle {

std::vector<double> softmax(const std::vector<double>& logits);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct Metrics {
    double eer = 0.0;
    double threshold = 0.0;
    double hter = 0.0;
    double auc = 0.0;
    double apcer = 0.0;
    double bpcer = 0.0;
    double acer = 0.0;
    std::optional<double> b_at_a_01;
    std::optional<double> b_at_a_001;
};

// Exhaustive sweep over every candidate threshold with per-sample counting.
// EER and threshold come from `dev`, the rest from `test`.
Metrics brute_metrics(const kgprompt::ScoreSet& dev, const kgprompt::ScoreSet& test);

double brute_auc(const kgprompt::ScoreSet& s);
double brute_hter(const kgprompt::ScoreSet& s, double threshold);
// nullopt when some attack type has fewer than 1/target samples.
std::optional<double> brute_bpcer_at_apcer(const kgprompt::ScoreSet& s, double target);

// Random score set with deliberate ties (scores on a coarse grid part of the
// time) and 1-3 attack types.
kgprompt::ScoreSet random_scores(unsigned seed, std::size_t min_size, std::size_t max_size);

}  // namespace oracle
