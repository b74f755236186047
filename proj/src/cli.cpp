#include "kgprompt/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgprompt/error.hpp"
#include "kgprompt/kernels.hpp"
#include "kgprompt/report.hpp"

namespace kgprompt::cli {

namespace fs = std::filesystem;

std::unique_ptr<EncoderBackend> make_encoder(const RunConfig& cfg) {
    if (cfg.encoder == "http") {
        return std::make_unique<HttpEncoderBackend>(cfg.encoder_url, cfg.encoder_dim, cfg.patch_grid);
    }
    return std::make_unique<ToyEncoder>(cfg.image_size, cfg.patch_grid, cfg.encoder_dim, cfg.encoder_seed);
}

std::unique_ptr<EmbeddingProvider> make_embedding(const RunConfig& cfg) {
    auto hashed = std::make_shared<HashEmbedding>(cfg.embed_dim, cfg.embedding_seed);
    if (cfg.embedding_table.empty()) return std::make_unique<HashEmbedding>(cfg.embed_dim, cfg.embedding_seed);
    auto table = std::make_unique<TableEmbedding>(cfg.embedding_table, hashed);
    if (table->dim() != cfg.embed_dim) {
        throw Error(ErrorKind::Config, "embedding_table width differs from embed_dim");
    }
    return table;
}

Experiment experiment_from_config(const RunConfig& cfg, DescriptionCache& cache, LlmClient* client) {
    if (cfg.kg_path.empty()) throw Error(ErrorKind::Config, "kg_path is not set");
    const auto graph = load_kg_file(cfg.kg_path);
    const auto table = make_embedding(cfg);
    Experiment exp;
    exp.bundles = build_prompt_bundles(graph, cache, client, *table, cfg.context_len, cfg.train.seed);
    exp.shape = {cfg.encoder_dim, cfg.hidden_dim};
    exp.context_len = cfg.context_len;
    exp.train = cfg.train;
    std::vector<std::string> cats;
    for (const auto& b : exp.bundles) cats.push_back(b.category);
    exp.classes = map_classes(cats, cfg.real_category, cfg.mask_category);
    return exp;
}

Experiment experiment_from_checkpoint(const Checkpoint& ck, const RunConfig& cfg) {
    const Model& m = ck.model;
    Experiment exp;
    for (std::size_t k = 0; k < m.num_classes(); ++k) {
        PromptBundle b;
        b.category = m.categories[k];
        b.entity_prompt.rows = m.entity_rows[k];
        b.description_prompt.rows = m.description_rows[k];
        b.context = m.params.context[k];
        b.class_embedding = m.class_embeddings[k];
        exp.bundles.push_back(std::move(b));
    }
    exp.shape = {m.params.adapter.w1.cols(), m.params.adapter.w1.rows()};
    exp.context_len = m.params.context.empty() ? cfg.context_len : m.params.context.front().rows();
    exp.train = cfg.train;
    exp.classes = map_classes(m.categories, cfg.real_category, cfg.mask_category);
    return exp;
}

namespace {

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

DescriptionCache load_cache_if_present(const RunConfig& cfg) {
    if (cfg.cache_path.empty() || !fs::exists(cfg.cache_path)) return {};
    return load_cache(cfg.cache_path);
}

std::unique_ptr<LlmClient> make_llm(const RunConfig& cfg) {
    if (cfg.llm_url.empty()) return nullptr;
    return std::make_unique<HttpLlmClient>(cfg.llm_url, cfg.llm_model);
}

std::string ensure_out_dir(const std::string& dir) {
    if (dir.empty()) throw Error(ErrorKind::Config, "output directory is empty");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
    return dir;
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

RunConfig resolve_config(const std::string& path, const std::optional<std::uint64_t>& seed,
                         const std::string& out) {
    RunConfig cfg = load_config(path);
    if (seed) cfg.train.seed = *seed;
    if (!out.empty()) cfg.out_dir = out;
    cfg.validate();
    return cfg;
}

void check_encoder(const Checkpoint& ck, const EncoderBackend& enc) {
    if (enc.checksum() != ck.encoder_checksum) {
        throw Error(ErrorKind::EncoderFailure, "encoder weights differ from the ones used in training");
    }
}

int cmd_kg_validate(const std::string& path, Streams s) {
    const auto g = load_kg_file(path);
    s.out << "ok: " << g.entities().size() << " entities, " << g.relations().size() << " relations, "
          << g.triples().size() << " triples, " << g.categories().size() << " categories\n";
    return 0;
}

int cmd_kg_fetch(const RunConfig& cfg, const std::string& category, Streams s) {
    if (cfg.kg_source_url.empty()) throw Error(ErrorKind::Config, "kg_source_url is not set");
    HttpKgSourceClient client(cfg.kg_source_url);
    const auto edges = fetch_subgraph(client, category);
    nlohmann::ordered_json j;
    j["category"] = category;
    j["source"] = cfg.kg_source_url;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : edges) arr.push_back({{"head", e.head}, {"relation", e.relation}, {"tail", e.tail}});
    j["candidates"] = arr;
    const auto dir = ensure_out_dir(cfg.out_dir);
    std::string slug;
    for (char c : category) slug += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    const auto path = join(dir, "candidates_" + slug + ".json");
    write_text_file(path, j.dump(2) + "\n");
    s.out << edges.size() << " candidate edges for '" << category << "' written to " << path << "\n";
    return 0;
}

int cmd_describe(const RunConfig& cfg, Streams s) {
    if (cfg.kg_path.empty()) throw Error(ErrorKind::Config, "kg_path is not set");
    const auto g = load_kg_file(cfg.kg_path);
    auto cache = load_cache_if_present(cfg);
    const auto before = cache.size();
    auto llm = make_llm(cfg);
    std::size_t total = 0;
    for (const auto& c : g.categories()) total += generate_descriptions(g, c, llm.get(), cache).size();
    const auto dir = ensure_out_dir(cfg.out_dir);
    const auto path = join(dir, "descriptions.json");
    save_cache(cache, path);
    s.out << total << " descriptions (" << cache.size() - before << " newly generated) written to " << path << "\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, Streams s) {
    if (cfg.train_manifest.empty()) throw Error(ErrorKind::Config, "train_manifest is not set");
    auto cache = load_cache_if_present(cfg);
    const auto cached = cache.size();
    auto llm = make_llm(cfg);
    const Experiment exp = experiment_from_config(cfg, cache, llm.get());
    const auto encoder = make_encoder(cfg);
    const auto manifest = load_manifest(cfg.train_manifest);
    auto samples = encode_manifest(manifest, *encoder, exp.classes);
    assign_auto_splits(samples, cfg.train.seed);
    const auto train = select_split(samples, Split::Train);
    auto dev = select_split(samples, Split::Dev);
    std::string source = "dev";
    if (dev.empty()) {
        dev = train;
        source = "train";
    }
    auto det = train_detector(exp, train, dev, cfg.train.seed);
    det.dev.threshold.source = source;

    const auto dir = ensure_out_dir(cfg.out_dir);
    Checkpoint ck{cfg, det.fit.model, det.dev.threshold, det.dev.eer, encoder->checksum()};
    save_checkpoint(ck, join(dir, "checkpoint.json"));
    write_text_file(join(dir, "loss_log.csv"), loss_log_csv(det.fit.log));
    if (cache.size() != cached) save_cache(cache, join(dir, "descriptions.json"));
    s.out << "trained " << det.fit.log.size() << " epochs on " << train.size() << " samples ("
          << kernels::isa_name(kernels::active().isa) << " kernels)\n";
    if (!det.fit.log.empty()) {
        const auto& last = det.fit.log.back();
        s.out << "final loss " << last.total << " (srd " << last.srd << ", sce " << last.sce << ")\n";
    }
    s.out << "threshold " << det.dev.threshold.value << " from " << source << ", EER " << round2(det.dev.eer)
          << "%\n";
    s.out << "checkpoint written to " << join(dir, "checkpoint.json") << "\n";
    return 0;
}

void print_metrics(std::ostream& out, const EvaluationReport& r) {
    auto opt = [](const std::optional<double>& v) {
        if (!v) return std::string("unreachable");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", *v);
        return std::string(buf);
    };
    char buf[256];
    std::snprintf(buf, sizeof buf, "EER %.2f  HTER %.2f  AUC %.2f  APCER %.2f  BPCER %.2f  ACER %.2f\n", r.eer,
                  r.hter, r.auc, r.apcer, r.bpcer, r.acer);
    out << buf << "BPCER@APCER=0.1 " << opt(r.b_at_a_01) << "  BPCER@APCER=0.01 " << opt(r.b_at_a_001) << "\n";
}

int cmd_eval(const Checkpoint& ck, RunConfig cfg, const std::string& protocol, std::optional<std::size_t> rounds,
             const std::string& manifest_override, Streams s) {
    const auto encoder = make_encoder(cfg);
    check_encoder(ck, *encoder);
    const Experiment exp = experiment_from_checkpoint(ck, cfg);
    const auto dir = ensure_out_dir(cfg.out_dir);

    if (protocol == "cross") {
        const auto test_path = manifest_override.empty() ? cfg.test_manifest : manifest_override;
        if (test_path.empty()) throw Error(ErrorKind::Config, "test_manifest is not set");
        const auto test_manifest = load_manifest(test_path);
        if (!cfg.train_manifest.empty()) check_disjoint(load_manifest(cfg.train_manifest), test_manifest);
        const auto test = encode_manifest(test_manifest, *encoder, exp.classes);
        const auto report =
            evaluate_at(ck.threshold, ck.dev_eer, score_set(ck.model, test, exp.classes, cfg.train.tau));
        write_text_file(join(dir, "report.json"), cross_report_json(report, cfg.train_manifest, test_path));
        write_text_file(join(dir, "roc.svg"), roc_svg(report.roc, "ROC on " + fs::path(test_path).filename().string()));
        print_metrics(s.out, report);
        s.out << "report written to " << join(dir, "report.json") << "\n";
        return 0;
    }

    const auto path = manifest_override.empty() ? cfg.train_manifest : manifest_override;
    if (path.empty()) throw Error(ErrorKind::Config, "no manifest for LOOCV (train_manifest or --manifest)");
    const auto samples = encode_manifest(load_manifest(path), *encoder, exp.classes);
    LoocvOptions opt{rounds.value_or(cfg.rounds), cfg.loocv_train_subjects, cfg.loocv_dev_subjects,
                     cfg.train.seed};
    const auto rep = run_loocv(exp, samples, opt);
    write_text_file(join(dir, "report.json"), loocv_report_json(rep, path));
    for (const auto& r : rep.rounds) {
        char name[32];
        std::snprintf(name, sizeof name, "roc_round_%02zu.svg", r.round);
        write_text_file(join(dir, name), roc_svg(r.report.roc, "LOOCV round " + std::to_string(r.round) +
                                                                   ", held out " + r.held_out));
    }
    char buf[256];
    auto line = [&](const char* name, const MetricSummary& m) {
        std::snprintf(buf, sizeof buf, "%-6s %6.2f +- %.2f\n", name, m.mean, m.std);
        s.out << buf;
    };
    s.out << rep.rounds.size() << " LOOCV rounds\n";
    line("EER", rep.eer);
    line("HTER", rep.hter);
    line("AUC", rep.auc);
    line("APCER", rep.apcer);
    line("BPCER", rep.bpcer);
    line("ACER", rep.acer);
    s.out << "report written to " << join(dir, "report.json") << "\n";
    return 0;
}

int cmd_infer(const Checkpoint& ck, const std::string& image, const std::string& manifest_path,
              std::optional<double> threshold, Streams s) {
    const auto encoder = make_encoder(ck.config);
    check_encoder(ck, *encoder);
    const auto classes = map_classes(ck.model.categories, ck.config.real_category, ck.config.mask_category);
    const double theta = threshold.value_or(ck.threshold.value);
    std::vector<std::string> paths;
    if (!image.empty()) {
        paths.push_back(image);
    } else {
        const auto m = load_manifest(manifest_path);
        for (const auto& r : m.rows) paths.push_back(m.resolve(r));
    }
    char buf[64];
    for (const auto& p : paths) {
        const auto out = encode(read_ppm(p), *encoder);
        const double score = predict(ck.model, out.global_feature, ck.config.train.tau)[classes.real];
        std::snprintf(buf, sizeof buf, "%.6f", score);
        s.out << p << ", " << buf << ", " << (score >= theta ? "real" : "mask") << "\n";
    }
    return 0;
}

struct SynthOptions {
    std::string out;
    std::uint64_t seed = 1;
    std::size_t subjects = 6;
    std::size_t per_class = 8;
    std::size_t image_size = 64;
    double shift = 0.0;
    double noise = 0.1;
    std::string split = "auto";
    std::string prefix = "s";
};

int cmd_synth(const SynthOptions& o, Streams s) {
    SyntheticSpec spec;
    spec.image_size = o.image_size;
    spec.subjects = o.subjects;
    spec.images_per_subject_per_class = o.per_class;
    spec.domain_shift = o.shift;
    spec.noise_std = o.noise;
    spec.subject_prefix = o.prefix;
    spec.seed = o.seed;
    const auto split = parse_manifest("path,label,subject,attack_type,split\nx,real,s,," + o.split + "\n")
                           .rows.front()
                           .split;
    const auto dir = ensure_out_dir(o.out);
    ensure_out_dir(join(dir, "images"));
    Manifest m;
    const auto images = make_synthetic(spec);
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& img = images[i];
        char name[64];
        std::snprintf(name, sizeof name, "images/%s_%04zu.ppm", std::string(label_name(img.label)).c_str(), i);
        write_ppm(img.image, join(dir, name));
        m.rows.push_back({name, img.label, img.subject, img.attack_type, split});
    }
    write_text_file(join(dir, "manifest.csv"), serialize_manifest(m));
    s.out << images.size() << " images written to " << dir << "\n";
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge-guided prompt learning for 3D mask presentation attack detection", "kgprompt"};
    app.require_subcommand(1);

    std::string config_path, out_dir, checkpoint_path, protocol = "loocv", image, manifest;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> rounds;
    std::optional<double> threshold;

    auto* kg = app.add_subcommand("kg", "Knowledge graph tools");
    kg->require_subcommand(1);
    std::string kg_path, category;
    auto* kg_validate = kg->add_subcommand("validate", "Check a knowledge graph file");
    kg_validate->add_option("path", kg_path, "Graph file")->required();
    auto* kg_fetch = kg->add_subcommand("fetch", "List candidate edges from the public KG endpoint");
    kg_fetch->add_option("--config", config_path)->required();
    kg_fetch->add_option("--category", category)->required();
    kg_fetch->add_option("--out", out_dir);

    auto* describe = app.add_subcommand("describe", "Generate or complete the description cache");
    describe->add_option("--config", config_path)->required();
    describe->add_option("--out", out_dir);

    auto* train = app.add_subcommand("train", "Fit prompts, filters and adapter");
    train->add_option("--config", config_path)->required();
    train->add_option("--seed", seed);
    train->add_option("--out", out_dir);

    auto* eval = app.add_subcommand("eval", "Evaluate under LOOCV or cross-dataset protocol");
    eval->add_option("--checkpoint", checkpoint_path)->required();
    eval->add_option("--protocol", protocol)->check(CLI::IsMember({"loocv", "cross"}));
    eval->add_option("--config", config_path, "Overrides the config stored in the checkpoint");
    eval->add_option("--manifest", manifest, "LOOCV dataset or cross-dataset test manifest");
    eval->add_option("--rounds", rounds);
    eval->add_option("--seed", seed);
    eval->add_option("--out", out_dir);

    auto* infer = app.add_subcommand("infer", "Score images with a trained checkpoint");
    infer->add_option("--checkpoint", checkpoint_path)->required();
    auto* image_opt = infer->add_option("--image", image);
    auto* manifest_opt = infer->add_option("--manifest", manifest);
    image_opt->excludes(manifest_opt);
    infer->add_option("--threshold", threshold);

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Write a seeded two-cluster toy dataset");
    synth->add_option("--out", synth_opt.out)->required();
    synth->add_option("--seed", synth_opt.seed);
    synth->add_option("--subjects", synth_opt.subjects);
    synth->add_option("--per-class", synth_opt.per_class);
    synth->add_option("--image-size", synth_opt.image_size);
    synth->add_option("--shift", synth_opt.shift);
    synth->add_option("--noise", synth_opt.noise);
    synth->add_option("--split", synth_opt.split)->check(CLI::IsMember({"train", "dev", "test", "auto"}));
    synth->add_option("--prefix", synth_opt.prefix);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const Streams s{out, err};
    try {
        if (kg_validate->parsed()) return cmd_kg_validate(kg_path, s);
        if (kg_fetch->parsed()) return cmd_kg_fetch(resolve_config(config_path, seed, out_dir), category, s);
        if (describe->parsed()) return cmd_describe(resolve_config(config_path, seed, out_dir), s);
        if (train->parsed()) return cmd_train(resolve_config(config_path, seed, out_dir), s);
        if (eval->parsed()) {
            const auto ck = load_checkpoint(checkpoint_path);
            RunConfig cfg = config_path.empty() ? ck.config : load_config(config_path);
            if (seed) cfg.train.seed = *seed;
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            cfg.validate();
            return cmd_eval(ck, cfg, protocol, rounds, manifest, s);
        }
        if (infer->parsed()) {
            if (image.empty() && manifest.empty()) throw Error(ErrorKind::InvalidArgument, "need --image or --manifest");
            return cmd_infer(load_checkpoint(checkpoint_path), image, manifest, threshold, s);
        }
        if (synth->parsed()) return cmd_synth(synth_opt, s);
    } catch (const Error& e) {
        err << "error: " << error_kind_name(e.kind()) << ": " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"kgprompt"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace kgprompt::cli
