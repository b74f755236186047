#include "kgprompt/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "kgprompt/config.hpp"
#include "kgprompt/error.hpp"

namespace kgprompt {

namespace {

using ojson = nlohmann::ordered_json;

ojson optional_metric(const std::optional<double>& v) {
    if (!v) return nullptr;
    return round2(*v);
}

ojson threshold_json(const Threshold& t) {
    ojson j;
    if (std::isfinite(t.value)) {
        j["value"] = t.value;
    } else {
        j["value"] = t.value > 0 ? "inf" : "-inf";
    }
    j["source"] = t.source;
    return j;
}

ojson metrics_json(const EvaluationReport& r) {
    ojson m;
    m["EER"] = round2(r.eer);
    m["HTER"] = round2(r.hter);
    m["AUC"] = round2(r.auc);
    m["APCER"] = round2(r.apcer);
    m["BPCER"] = round2(r.bpcer);
    m["ACER"] = round2(r.acer);
    m["BPCER@APCER=0.1"] = optional_metric(r.b_at_a_01);
    m["BPCER@APCER=0.01"] = optional_metric(r.b_at_a_001);
    return m;
}

ojson roc_json(const std::vector<RocPoint>& roc) {
    ojson arr = ojson::array();
    for (const auto& p : roc) {
        ojson pt;
        pt["threshold"] = std::isfinite(p.threshold) ? ojson(p.threshold) : ojson(p.threshold > 0 ? "inf" : "-inf");
        pt["far"] = p.far;
        pt["frr"] = p.frr;
        arr.push_back(pt);
    }
    return arr;
}

ojson summary_json(const MetricSummary& s) { return {{"mean", round2(s.mean)}, {"std", round2(s.std)}}; }

ojson optional_summary(const std::optional<MetricSummary>& s) {
    if (!s) return nullptr;
    return summary_json(*s);
}

}  // namespace

double round2(double v) { return std::round(v * 100.0) / 100.0; }

std::string cross_report_json(const EvaluationReport& r, const std::string& train_source,
                              const std::string& test_source) {
    ojson j;
    j["protocol"] = "cross";
    j["train"] = train_source;
    j["test"] = test_source;
    j["threshold"] = threshold_json(r.threshold);
    j["dev_eer"] = round2(r.eer);
    j["metrics"] = metrics_json(r);
    j["roc"] = roc_json(r.roc);
    return j.dump(2) + "\n";
}

std::string loocv_report_json(const LoocvReport& r, const std::string& source) {
    ojson j;
    j["protocol"] = "loocv";
    j["manifest"] = source;
    j["rounds"] = r.rounds.size();
    ojson summary;
    summary["EER"] = summary_json(r.eer);
    summary["HTER"] = summary_json(r.hter);
    summary["AUC"] = summary_json(r.auc);
    summary["APCER"] = summary_json(r.apcer);
    summary["BPCER"] = summary_json(r.bpcer);
    summary["ACER"] = summary_json(r.acer);
    summary["BPCER@APCER=0.1"] = optional_summary(r.b_at_a_01);
    summary["BPCER@APCER=0.01"] = optional_summary(r.b_at_a_001);
    j["summary"] = summary;
    ojson rounds = ojson::array();
    for (const auto& rd : r.rounds) {
        ojson o;
        o["round"] = rd.round;
        o["held_out"] = rd.held_out;
        o["train_subjects"] = rd.train_subjects;
        o["dev_subjects"] = rd.dev_subjects;
        o["threshold"] = threshold_json(rd.report.threshold);
        o["dev_eer"] = round2(rd.report.eer);
        o["metrics"] = metrics_json(rd.report);
        o["roc"] = roc_json(rd.report.roc);
        rounds.push_back(o);
    }
    j["per_round"] = rounds;
    return j.dump(2) + "\n";
}

std::string roc_svg(const std::vector<RocPoint>& roc, const std::string& title) {
    constexpr double size = 400.0;
    constexpr double margin = 50.0;
    auto px = [&](double far) { return margin + far * size; };
    auto py = [&](double tpr) { return margin + (1.0 - tpr) * size; };
    char buf[128];
    std::string pts;
    // Thresholds ascend, so walk backwards to go from (0,0) to (1,1).
    for (auto it = roc.rbegin(); it != roc.rend(); ++it) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(it->far), py(1.0 - it->frr));
        pts += buf;
    }
    std::string escaped;
    for (char c : title) {
        if (c == '<') escaped += "&lt;";
        else if (c == '>') escaped += "&gt;";
        else if (c == '&') escaped += "&amp;";
        else escaped += c;
    }
    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" viewBox=\"0 0 500 500\">\n";
    svg += "<rect width=\"500\" height=\"500\" fill=\"white\"/>\n";
    svg += "<text x=\"250\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" + escaped +
           "</text>\n";
    svg += "<rect x=\"50\" y=\"50\" width=\"400\" height=\"400\" fill=\"none\" stroke=\"black\"/>\n";
    svg += "<line x1=\"50\" y1=\"450\" x2=\"450\" y2=\"50\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
    svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    svg += "<text x=\"250\" y=\"485\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
           "False acceptance rate</text>\n";
    svg += "<text x=\"18\" y=\"250\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 250)\">1 - false rejection rate</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string loss_log_csv(const std::vector<EpochLog>& log) {
    std::string out = "epoch,lr,srd,sce,total\n";
    for (const auto& e : log) {
        out += std::to_string(e.epoch) + "," + format_double(e.lr) + "," + format_double(e.srd) + "," +
               format_double(e.sce) + "," + format_double(e.total) + "\n";
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    out << contents;
    if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

}  // namespace kgprompt
