#include "kgprompt/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "kgprompt/error.hpp"
#include "kgprompt/text.hpp"

namespace kgprompt {

namespace {

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw Error(ErrorKind::Config, key + ": expected a number, got '" + v + "'");
    }
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw Error(ErrorKind::Config, key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
}

const std::set<std::string> kPathKeys{"embedding_table", "kg_path",        "cache_path",
                                      "train_manifest",  "test_manifest", "out_dir"};

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void RunConfig::validate() const {
    train.validate();
    if (patch_grid == 0) throw Error(ErrorKind::Config, "patch_grid must be >= 1");
    if (image_size == 0 || image_size % patch_grid != 0) {
        throw Error(ErrorKind::Config, "image_size must be a positive multiple of patch_grid");
    }
    if (embed_dim == 0) throw Error(ErrorKind::Config, "embed_dim must be >= 1");
    if (encoder_dim == 0) throw Error(ErrorKind::Config, "encoder_dim must be >= 1");
    if (hidden_dim == 0) throw Error(ErrorKind::Config, "hidden_dim must be >= 1");
    if (context_len == 0) throw Error(ErrorKind::Config, "context_len must be >= 1");
    if (encoder != "toy" && encoder != "http") throw Error(ErrorKind::Config, "encoder must be 'toy' or 'http'");
    if (encoder == "http" && encoder_url.empty()) throw Error(ErrorKind::Config, "encoder 'http' needs encoder_url");
    if (rounds == 0) throw Error(ErrorKind::Config, "rounds must be >= 1");
    if (loocv_train_subjects == 0) throw Error(ErrorKind::Config, "loocv_train_subjects must be >= 1");
    if (loocv_dev_subjects == 0) throw Error(ErrorKind::Config, "loocv_dev_subjects must be >= 1");
    if (real_category == mask_category) throw Error(ErrorKind::Config, "real_category and mask_category must differ");
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& v) {
    auto size = [&] { return static_cast<std::size_t>(parse_uint(key, v)); };
    if (key == "lr0") c.train.lr0 = parse_double(key, v);
    else if (key == "momentum") c.train.momentum = parse_double(key, v);
    else if (key == "weight_decay") c.train.weight_decay = parse_double(key, v);
    else if (key == "batch_size") c.train.batch_size = size();
    else if (key == "epochs") c.train.epochs = size();
    else if (key == "lambda") c.train.lambda = parse_double(key, v);
    else if (key == "tau") c.train.tau = parse_double(key, v);
    else if (key == "seed") c.train.seed = parse_uint(key, v);
    else if (key == "image_size") c.image_size = size();
    else if (key == "patch_grid") c.patch_grid = size();
    else if (key == "embed_dim") c.embed_dim = size();
    else if (key == "encoder_dim") c.encoder_dim = size();
    else if (key == "hidden_dim") c.hidden_dim = size();
    else if (key == "context_len") c.context_len = size();
    else if (key == "encoder") c.encoder = v;
    else if (key == "encoder_url") c.encoder_url = v;
    else if (key == "encoder_seed") c.encoder_seed = parse_uint(key, v);
    else if (key == "embedding_seed") c.embedding_seed = parse_uint(key, v);
    else if (key == "embedding_table") c.embedding_table = v;
    else if (key == "kg_path") c.kg_path = v;
    else if (key == "cache_path") c.cache_path = v;
    else if (key == "llm_url") c.llm_url = v;
    else if (key == "llm_model") c.llm_model = v;
    else if (key == "kg_source_url") c.kg_source_url = v;
    else if (key == "train_manifest") c.train_manifest = v;
    else if (key == "test_manifest") c.test_manifest = v;
    else if (key == "out_dir") c.out_dir = v;
    else if (key == "real_category") c.real_category = v;
    else if (key == "mask_category") c.mask_category = v;
    else if (key == "rounds") c.rounds = size();
    else if (key == "loocv_train_subjects") c.loocv_train_subjects = size();
    else if (key == "loocv_dev_subjects") c.loocv_dev_subjects = size();
    else throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
}

RunConfig parse_config(std::string_view text, const std::string& base_dir) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const auto key = text::trim(std::string_view(trimmed).substr(0, eq));
        auto value = text::trim(std::string_view(trimmed).substr(eq + 1));
        if (key.empty()) throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": empty key");
        if (!seen.insert(key).second) throw Error(ErrorKind::Config, "duplicate config key '" + key + "'");
        if (kPathKeys.count(key) && !value.empty() && !base_dir.empty() && std::filesystem::path(value).is_relative()) {
            value = (std::filesystem::path(base_dir) / value).lexically_normal().string();
        }
        set_config_value(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
    return {
        {"lr0", format_double(c.train.lr0)},
        {"momentum", format_double(c.train.momentum)},
        {"weight_decay", format_double(c.train.weight_decay)},
        {"batch_size", std::to_string(c.train.batch_size)},
        {"epochs", std::to_string(c.train.epochs)},
        {"lambda", format_double(c.train.lambda)},
        {"tau", format_double(c.train.tau)},
        {"seed", std::to_string(c.train.seed)},
        {"image_size", std::to_string(c.image_size)},
        {"patch_grid", std::to_string(c.patch_grid)},
        {"embed_dim", std::to_string(c.embed_dim)},
        {"encoder_dim", std::to_string(c.encoder_dim)},
        {"hidden_dim", std::to_string(c.hidden_dim)},
        {"context_len", std::to_string(c.context_len)},
        {"encoder", c.encoder},
        {"encoder_url", c.encoder_url},
        {"encoder_seed", std::to_string(c.encoder_seed)},
        {"embedding_seed", std::to_string(c.embedding_seed)},
        {"embedding_table", c.embedding_table},
        {"kg_path", c.kg_path},
        {"cache_path", c.cache_path},
        {"llm_url", c.llm_url},
        {"llm_model", c.llm_model},
        {"kg_source_url", c.kg_source_url},
        {"train_manifest", c.train_manifest},
        {"test_manifest", c.test_manifest},
        {"real_category", c.real_category},
        {"mask_category", c.mask_category},
        {"rounds", std::to_string(c.rounds)},
        {"loocv_train_subjects", std::to_string(c.loocv_train_subjects)},
        {"loocv_dev_subjects", std::to_string(c.loocv_dev_subjects)},
    };
}

}  // namespace kgprompt
