#include "kgprompt/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "kgprompt/error.hpp"

namespace kgprompt {

namespace {

using ojson = nlohmann::ordered_json;

ojson matrix_json(const Matrix& m) {
    ojson j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = std::vector<double>(m.flat().begin(), m.flat().end());
    return j;
}

Matrix matrix_from(const ojson& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto data = j.at("data").get<std::vector<double>>();
    if (data.size() != m.flat().size()) throw Error(ErrorKind::MalformedFile, "checkpoint matrix size mismatch");
    std::copy(data.begin(), data.end(), m.flat().begin());
    return m;
}

// JSON has no infinities; the two sentinel thresholds travel as strings.
ojson number_json(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

double number_from(const ojson& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::MalformedFile, "checkpoint: bad number '" + s + "'");
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
    const Model& m = ck.model;
    ojson j;
    j["format"] = "kgprompt-checkpoint";
    j["version"] = kCheckpointVersion;
    j["seed"] = ck.config.train.seed;
    ojson cfg = ojson::object();
    for (const auto& [k, v] : config_entries(ck.config)) cfg[k] = v;
    j["config"] = cfg;
    j["categories"] = m.categories;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(ck.encoder_checksum));
    j["encoder_checksum"] = hex;
    j["threshold"] = {{"value", number_json(ck.threshold.value)}, {"source", ck.threshold.source},
                      {"dev_eer", ck.dev_eer}};

    ojson prompts = ojson::array();
    for (std::size_t k = 0; k < m.num_classes(); ++k) {
        ojson p;
        p["category"] = m.categories[k];
        p["class_embedding"] = m.class_embeddings[k];
        p["entity_rows"] = matrix_json(m.entity_rows[k]);
        p["description_rows"] = matrix_json(m.description_rows[k]);
        prompts.push_back(p);
    }
    j["prompts"] = prompts;

    const auto& p = m.params;
    ojson params;
    ojson ctx = ojson::array();
    for (const auto& c : p.context) ctx.push_back(matrix_json(c));
    params["context"] = ctx;
    params["adapter"] = {{"w1", matrix_json(p.adapter.w1)},
                         {"b1", p.adapter.b1},
                         {"w2", matrix_json(p.adapter.w2)},
                         {"b2", p.adapter.b2}};
    params["entity_filter"] = {{"psi", matrix_json(p.entity_filter.psi)}, {"bias", p.entity_filter.bias}};
    params["description_filter"] = {{"psi", matrix_json(p.description_filter.psi)},
                                    {"bias", p.description_filter.bias}};
    j["params"] = params;
    return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view bytes) {
    ojson j;
    try {
        j = ojson::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedFile, std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "kgprompt-checkpoint") {
            throw Error(ErrorKind::MalformedFile, "not a kgprompt checkpoint");
        }
        if (j.at("version").get<int>() != kCheckpointVersion) {
            throw Error(ErrorKind::MalformedFile, "unsupported checkpoint version");
        }
        Checkpoint ck;
        for (const auto& [k, v] : j.at("config").items()) set_config_value(ck.config, k, v.get<std::string>());
        ck.config.validate();
        ck.encoder_checksum = std::stoull(j.at("encoder_checksum").get<std::string>(), nullptr, 16);
        const auto& th = j.at("threshold");
        ck.threshold = {number_from(th.at("value")), th.at("source").get<std::string>()};
        ck.dev_eer = th.at("dev_eer").get<double>();

        Model& m = ck.model;
        m.categories = j.at("categories").get<std::vector<std::string>>();
        const auto& prompts = j.at("prompts");
        if (prompts.size() != m.categories.size()) throw Error(ErrorKind::MalformedFile, "prompt count mismatch");
        for (const auto& p : prompts) {
            m.class_embeddings.push_back(p.at("class_embedding").get<Vector>());
            m.entity_rows.push_back(matrix_from(p.at("entity_rows")));
            m.description_rows.push_back(matrix_from(p.at("description_rows")));
        }
        const auto& params = j.at("params");
        for (const auto& c : params.at("context")) m.params.context.push_back(matrix_from(c));
        const auto& ad = params.at("adapter");
        m.params.adapter = {matrix_from(ad.at("w1")), ad.at("b1").get<Vector>(), matrix_from(ad.at("w2")),
                            ad.at("b2").get<Vector>()};
        const auto& ef = params.at("entity_filter");
        m.params.entity_filter = {matrix_from(ef.at("psi")), ef.at("bias").get<Vector>()};
        const auto& df = params.at("description_filter");
        m.params.description_filter = {matrix_from(df.at("psi")), df.at("bias").get<Vector>()};
        if (m.params.context.size() != m.categories.size()) {
            throw Error(ErrorKind::MalformedFile, "context count does not match categories");
        }
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedFile, std::string("checkpoint: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw Error(ErrorKind::MalformedFile, "checkpoint: bad encoder checksum");
    }
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint '" + path + "'");
    out << serialize_checkpoint(ck);
    if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open checkpoint '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_checkpoint(ss.str());
}

}  // namespace kgprompt
