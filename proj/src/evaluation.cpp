#include "kgprompt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "kgprompt/error.hpp"

namespace kgprompt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_both(const ScoreSet& s) {
    if (s.genuine.empty()) throw Error(ErrorKind::EmptyClass, "score set has no genuine samples");
    if (s.attack.empty()) throw Error(ErrorKind::EmptyClass, "score set has no attack samples");
    if (!s.attack_types.empty() && s.attack_types.size() != s.attack.size()) {
        throw Error(ErrorKind::InvalidArgument, "attack_types must parallel attack scores");
    }
}

// Integer counts behind one ROC point.
struct Counts {
    double threshold;
    long long false_accepts;
    long long false_rejects;
};

std::vector<double> sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<Counts> sweep(const ScoreSet& s) {
    const auto g = sorted(s.genuine);
    const auto a = sorted(s.attack);
    std::vector<double> thresholds;
    thresholds.reserve(g.size() + a.size());
    std::merge(g.begin(), g.end(), a.begin(), a.end(), std::back_inserter(thresholds));
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    const auto na = static_cast<long long>(a.size());
    std::vector<Counts> out;
    out.reserve(thresholds.size() + 2);
    out.push_back({-kInf, na, 0});
    for (double t : thresholds) {
        const auto fa = static_cast<long long>(a.end() - std::lower_bound(a.begin(), a.end(), t));
        const auto fr = static_cast<long long>(std::lower_bound(g.begin(), g.end(), t) - g.begin());
        out.push_back({t, fa, fr});
    }
    out.push_back({kInf, 0, static_cast<long long>(g.size())});
    return out;
}

std::map<std::string, std::vector<double>> attacks_by_type(const ScoreSet& s) {
    std::map<std::string, std::vector<double>> out;
    for (std::size_t i = 0; i < s.attack.size(); ++i) {
        out[s.attack_types.empty() ? std::string() : s.attack_types[i]].push_back(s.attack[i]);
    }
    return out;
}

}  // namespace

std::vector<RocPoint> roc_curve(const ScoreSet& s) {
    require_both(s);
    const double na = static_cast<double>(s.attack.size());
    const double ng = static_cast<double>(s.genuine.size());
    std::vector<RocPoint> out;
    for (const auto& c : sweep(s)) {
        out.push_back({c.threshold, static_cast<double>(c.false_accepts) / na, static_cast<double>(c.false_rejects) / ng});
    }
    return out;
}

EerResult eer_threshold(const ScoreSet& dev, std::string source) {
    require_both(dev);
    const auto na = static_cast<long long>(dev.attack.size());
    const auto ng = static_cast<long long>(dev.genuine.size());
    // Compare rates exactly on the common denominator na * ng.
    const Counts* best = nullptr;
    long long best_gap = 0;
    long long best_sum = 0;
    const auto counts = sweep(dev);
    for (const auto& c : counts) {
        const long long far_scaled = c.false_accepts * ng;
        const long long frr_scaled = c.false_rejects * na;
        const long long gap = std::llabs(far_scaled - frr_scaled);
        const long long sum = far_scaled + frr_scaled;
        if (!best || gap < best_gap || (gap == best_gap && sum < best_sum)) {
            best = &c;
            best_gap = gap;
            best_sum = sum;
        }
    }
    const double far = static_cast<double>(best->false_accepts) / static_cast<double>(na);
    const double frr = static_cast<double>(best->false_rejects) / static_cast<double>(ng);
    return {{best->threshold, std::move(source)}, 100.0 * (far + frr) / 2.0};
}

double far_at(const ScoreSet& s, double threshold) {
    if (s.attack.empty()) throw Error(ErrorKind::EmptyClass, "score set has no attack samples");
    const auto n = std::count_if(s.attack.begin(), s.attack.end(), [&](double x) { return x >= threshold; });
    return static_cast<double>(n) / static_cast<double>(s.attack.size());
}

double frr_at(const ScoreSet& s, double threshold) {
    if (s.genuine.empty()) throw Error(ErrorKind::EmptyClass, "score set has no genuine samples");
    const auto n = std::count_if(s.genuine.begin(), s.genuine.end(), [&](double x) { return x < threshold; });
    return static_cast<double>(n) / static_cast<double>(s.genuine.size());
}

double hter(const ScoreSet& test, const Threshold& t) {
    require_both(test);
    return 100.0 * (far_at(test, t.value) + frr_at(test, t.value)) / 2.0;
}

double auc(const ScoreSet& s) {
    require_both(s);
    const auto a = sorted(s.attack);
    // Twice the number of ordered pairs, ties counting one.
    long long doubled = 0;
    for (double g : s.genuine) {
        const auto lo = std::lower_bound(a.begin(), a.end(), g);
        const auto hi = std::upper_bound(lo, a.end(), g);
        doubled += 2 * (lo - a.begin()) + (hi - lo);
    }
    const double pairs = static_cast<double>(s.genuine.size()) * static_cast<double>(s.attack.size());
    return 100.0 * static_cast<double>(doubled) / (2.0 * pairs);
}

PresentationErrors apcer_bpcer_acer(const ScoreSet& s, const Threshold& t) {
    require_both(s);
    PresentationErrors e;
    for (const auto& [type, scores] : attacks_by_type(s)) {
        e.apcer = std::max(e.apcer, 100.0 * far_at(ScoreSet{{}, scores, {}}, t.value));
    }
    e.bpcer = 100.0 * frr_at(s, t.value);
    e.acer = (e.apcer + e.bpcer) / 2.0;
    return e;
}

double bpcer_at_apcer(const ScoreSet& s, double target_apcer) {
    require_both(s);
    const auto groups = attacks_by_type(s);
    std::vector<std::pair<std::vector<double>, long long>> typed;  // sorted scores, allowed false accepts
    for (const auto& [type, scores] : groups) {
        const double allowed = std::floor(target_apcer * static_cast<double>(scores.size()) + 1e-9);
        if (allowed < 1.0 && target_apcer < 1.0) {
            throw Error(ErrorKind::UnreachableOperatingPoint,
                        "APCER " + std::to_string(target_apcer) + " needs at least " +
                            std::to_string(static_cast<long long>(std::ceil(1.0 / target_apcer - 1e-9))) +
                            " attack samples per type, have " + std::to_string(scores.size()));
        }
        typed.emplace_back(sorted(scores), static_cast<long long>(allowed));
    }
    // FRR is non-decreasing and every APCER non-increasing in the threshold,
    // so the first feasible candidate is optimal.
    for (const auto& c : sweep(s)) {
        const bool feasible = std::all_of(typed.begin(), typed.end(), [&](const auto& tp) {
            const auto& sc = tp.first;
            const auto fa = static_cast<long long>(sc.end() - std::lower_bound(sc.begin(), sc.end(), c.threshold));
            return fa <= tp.second;
        });
        if (feasible) return 100.0 * static_cast<double>(c.false_rejects) / static_cast<double>(s.genuine.size());
    }
    return 100.0;  // unreachable: +inf is always feasible
}

EvaluationReport evaluate(const ScoreSet& dev, const ScoreSet& test) {
    const auto e = eer_threshold(dev);
    return evaluate_at(e.threshold, e.eer, test);
}

EvaluationReport evaluate_at(const Threshold& threshold, double dev_eer, const ScoreSet& test) {
    EvaluationReport r;
    r.threshold = threshold;
    r.eer = dev_eer;
    r.hter = hter(test, r.threshold);
    r.auc = auc(test);
    const auto pe = apcer_bpcer_acer(test, r.threshold);
    r.apcer = pe.apcer;
    r.bpcer = pe.bpcer;
    r.acer = pe.acer;
    try {
        r.b_at_a_01 = bpcer_at_apcer(test, 0.1);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::UnreachableOperatingPoint) throw;
    }
    try {
        r.b_at_a_001 = bpcer_at_apcer(test, 0.01);
    } catch (const Error& err) {
        if (err.kind() != ErrorKind::UnreachableOperatingPoint) throw;
    }
    r.roc = roc_curve(test);
    return r;
}

}  // namespace kgprompt
