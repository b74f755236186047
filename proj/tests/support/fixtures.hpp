#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "kgprompt/cli.hpp"
#include "kgprompt/config.hpp"
#include "kgprompt/description_gen.hpp"
#include "kgprompt/kg_store.hpp"
#include "kgprompt/pipeline.hpp"

namespace fixtures {

std::string source_path(const std::string& relative);
std::string kg_fixture();
std::string cache_fixture();

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const;

private:
    std::string path_;
};

// Two categories "a" and "b" with one entity each and no triples.
kgprompt::KnowledgeGraph minimal_graph();

class CountingLlm : public kgprompt::LlmClient {
public:
    explicit CountingLlm(std::string answer) : answer_(std::move(answer)) {}
    std::string complete(const std::string& question) override {
        ++calls;
        questions.push_back(question);
        return answer_;
    }
    int calls = 0;
    std::vector<std::string> questions;

private:
    std::string answer_;
};

class CannedKgSource : public kgprompt::KgSourceClient {
public:
    explicit CannedKgSource(std::string body) : body_(std::move(body)) {}
    std::string query(const std::string& category) override {
        last_category = category;
        return body_;
    }
    std::string last_category;

private:
    std::string body_;
};

// httplib server on 127.0.0.1 with an ephemeral port, stopped on
// destruction.
class LocalServer {
public:
    explicit LocalServer(const std::function<void(httplib::Server&)>& routes);
    ~LocalServer();
    std::string url(const std::string& path) const;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

// In-process.
CliResult run_cli(const std::vector<std::string>& args);
// The built executable, as a child process; captures stdout only.
CliResult run_binary(const std::vector<std::string>& args);

// Toy run configuration over the bundled graph and cache.
kgprompt::RunConfig toy_config();
kgprompt::Experiment toy_experiment(const kgprompt::RunConfig& cfg);

// Writes a synthetic dataset under `dir` with the CLI `synth` command and
// returns the manifest path.
std::string write_synthetic(const std::string& dir, const std::vector<std::string>& extra_args);

// Writes `cfg` as a key = value file.
void write_config(const std::string& path, const kgprompt::RunConfig& cfg, const std::string& out_dir);

}  // namespace fixtures
