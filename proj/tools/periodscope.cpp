// periodscope command-line entry point.
//
//   periodscope ingest-kg <file.nt>
//   periodscope ingest-corpus <file.jsonl> [--kg file.nt]
//   periodscope serve --config <file>
//   periodscope export <session_id> --config <file> [-o file]
//   periodscope gen-sample [--out-dir dir] [--docs n] [--seed s]

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "periodscope/corpus_index.hpp"
#include "periodscope/error.hpp"
#include "periodscope/kg_store.hpp"
#include "periodscope/sample_data.hpp"
#include "periodscope/service.hpp"
#include "periodscope/session.hpp"
#include "periodscope/session_store.hpp"

namespace fs = std::filesystem;
using namespace periodscope;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

KnowledgeGraph load_graph(const fs::path& path, const std::string& language = "en") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    GraphConfig gc;
    gc.preferred_language = language;
    return build_graph(parse_triples(in), gc);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << data;
}

int ingest_kg(const fs::path& file) {
    const auto g = load_graph(file);
    nlohmann::ordered_json out;
    out["categories"] = g.categories.size();
    out["entities"] = g.entities.size();
    out["broader_edges"] = g.broader_edges.size();
    out["subject_edges"] = g.subject_edges.size();
    out["labels"] = g.labels.size();
    out["descriptions"] = g.descriptions.size();
    out["aliases"] = g.aliases.size();
    out["warnings"] = g.warnings;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int ingest_corpus(const fs::path& file, const std::string& kg) {
    KnowledgeGraph graph;
    IndexOptions options;
    if (!kg.empty()) {
        graph = load_graph(kg);
        options.resolve = [&graph](const Iri& iri) { return graph.resolve(iri); };
    }
    CorpusIndex index(options);
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + file.string());
    index.ingest_jsonl(in);

    std::size_t sentences = 0;
    std::size_t links = 0;
    std::set<Iri> entities;
    for (const auto& d : index.documents()) {
        sentences += d.sentences.size();
        links += d.links.size();
        for (const auto& l : d.links) entities.insert(l.entity);
    }
    nlohmann::ordered_json out;
    out["documents"] = index.document_count();
    out["sentences"] = sentences;
    out["links"] = links;
    out["distinct_entities"] = entities.size();
    std::cout << out.dump(2) << "\n";
    return 0;
}

int serve(const fs::path& config_file) {
    const auto config = load_config(config_file);
    auto service = Service::load(config);
    httplib::Server server;
    service->bind(server);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    spdlog::info("listening on {}:{}", config.host, config.port);
    if (!server.listen(config.host, config.port)) {
        spdlog::error("failed to bind {}:{}", config.host, config.port);
        return 1;
    }
    spdlog::info("stopped");
    return 0;
}

int export_cmd(const std::string& session_id, const fs::path& config_file, const std::string& output) {
    const auto config = load_config(config_file);
    const auto graph = load_graph(config.kg_path, config.preferred_language);
    SessionStore store(config.session_dir, graph, config.temporal);
    const auto text = read_file(store.path_for(session_id));
    const auto doc = export_session(import_session(text, graph, config.temporal));
    if (output.empty() || output == "-")
        std::cout << doc;
    else
        write_file(output, doc);
    return 0;
}

int gen_sample(const fs::path& dir, std::size_t docs, std::uint64_t seed) {
    fs::create_directories(dir);
    write_file(dir / "toy_graph.nt", sample::generate_toy_graph());
    write_file(dir / "toy_corpus.jsonl", sample::generate_toy_corpus(docs, seed));
    const auto config_path = dir / "periodscope.json";
    if (!fs::exists(config_path)) {
        nlohmann::ordered_json cfg;
        cfg["kg_path"] = "toy_graph.nt";
        cfg["corpus_path"] = "toy_corpus.jsonl";
        cfg["session_dir"] = "sessions";
        cfg["host"] = "127.0.0.1";
        cfg["port"] = 8080;
        write_file(config_path, cfg.dump(2) + "\n");
    }
    std::cout << "wrote " << (dir / "toy_graph.nt").string() << ", "
              << (dir / "toy_corpus.jsonl").string() << ", " << config_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Period-aware semantic search over entity-linked corpora"};
    app.require_subcommand(1);

    std::string kg_file;
    auto* kg_cmd = app.add_subcommand("ingest-kg", "Parse an N-Triples category network and report statistics");
    kg_cmd->add_option("file", kg_file, ".nt file")->required()->check(CLI::ExistingFile);

    std::string corpus_file;
    std::string corpus_kg;
    auto* corpus_cmd = app.add_subcommand("ingest-corpus", "Validate and index a JSON Lines corpus");
    corpus_cmd->add_option("file", corpus_file, ".jsonl file")->required()->check(CLI::ExistingFile);
    corpus_cmd->add_option("--kg", corpus_kg, "graph used to resolve link aliases")->check(CLI::ExistingFile);

    std::string config_file;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--config", config_file, "JSON config file")->required()->check(CLI::ExistingFile);

    std::string session_id;
    std::string export_config;
    std::string output;
    auto* export_sub = app.add_subcommand("export", "Write a session export document");
    export_sub->add_option("session_id", session_id)->required();
    export_sub->add_option("--config", export_config, "JSON config file")->required()->check(CLI::ExistingFile);
    export_sub->add_option("-o,--output", output, "output file (default stdout)");

    std::string out_dir = ".";
    std::size_t docs = 50;
    std::uint64_t seed = 7;
    auto* gen_cmd = app.add_subcommand("gen-sample", "Emit the toy graph, toy corpus and a config");
    gen_cmd->add_option("--out-dir", out_dir, "output directory");
    gen_cmd->add_option("--docs", docs, "number of documents")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", seed, "corpus seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*kg_cmd) return ingest_kg(kg_file);
        if (*corpus_cmd) return ingest_corpus(corpus_file, corpus_kg);
        if (*serve_cmd) return serve(config_file);
        if (*export_sub) return export_cmd(session_id, export_config, output);
        if (*gen_cmd) return gen_sample(out_dir, docs, seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
