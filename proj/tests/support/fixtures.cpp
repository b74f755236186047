#include "fixtures.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fixtures {

namespace fs = std::filesystem;

std::string source_path(const std::string& relative) { return std::string(KGPROMPT_SOURCE_DIR) + "/" + relative; }
std::string kg_fixture() { return source_path("data/maskpad_kg.json"); }
std::string cache_fixture() { return source_path("data/maskpad_descriptions.json"); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

TempDir::TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "kgprompt-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const { return (fs::path(path_) / name).string(); }

kgprompt::KnowledgeGraph minimal_graph() {
    using kgprompt::Dimension;
    return kgprompt::KnowledgeGraph::create({"a", "b"}, {"related_to"},
                                            {{"x", "alpha", Dimension::CategoryRelatedTerm, "a"},
                                             {"y", "beta", Dimension::InherentCharacteristic, "b"}},
                                            {});
}

LocalServer::LocalServer(const std::function<void(httplib::Server&)>& routes) {
    routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
}

LocalServer::~LocalServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
}

std::string LocalServer::url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
}

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = kgprompt::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

CliResult run_binary(const std::vector<std::string>& args) {
    std::string cmd = std::string("'") + KGPROMPT_CLI_PATH + "'";
    for (const auto& a : args) cmd += " '" + a + "'";
    cmd += " 2>/dev/null";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("popen failed");
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

kgprompt::RunConfig toy_config() {
    kgprompt::RunConfig cfg;
    cfg.kg_path = kg_fixture();
    cfg.cache_path = cache_fixture();
    cfg.image_size = 64;
    cfg.patch_grid = 4;
    cfg.embed_dim = 16;
    cfg.train.batch_size = 16;
    cfg.train.epochs = 30;
    cfg.train.seed = 1;
    return cfg;
}

kgprompt::Experiment toy_experiment(const kgprompt::RunConfig& cfg) {
    auto cache = kgprompt::load_cache(cfg.cache_path);
    return kgprompt::cli::experiment_from_config(cfg, cache, nullptr);
}

std::string write_synthetic(const std::string& dir, const std::vector<std::string>& extra_args) {
    std::vector<std::string> args{"synth", "--out", dir};
    args.insert(args.end(), extra_args.begin(), extra_args.end());
    const auto r = run_cli(args);
    if (r.code != 0) throw std::runtime_error("synth failed: " + r.err);
    return (fs::path(dir) / "manifest.csv").string();
}

void write_config(const std::string& path, const kgprompt::RunConfig& cfg, const std::string& out_dir) {
    std::string text = "# toy run\n";
    for (const auto& [k, v] : kgprompt::config_entries(cfg)) {
        if (!v.empty()) text += k + " = " + v + "\n";
    }
    text += "out_dir = " + out_dir + "\n";
    write_file(path, text);
}

}  // namespace fixtures
