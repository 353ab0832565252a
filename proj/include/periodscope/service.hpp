#pragma once

// HTTP JSON API over the graph, the corpus index and the session store.
//
// Request handling is transport independent (ApiRequest -> ApiResponse) so it
// can be driven directly from tests; `bind` attaches it to a cpp-httplib
// server. Error bodies are always {"error": code, "message": text}.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "periodscope/corpus_index.hpp"
#include "periodscope/kg_store.hpp"
#include "periodscope/session.hpp"
#include "periodscope/session_store.hpp"
#include "periodscope/temporal.hpp"

namespace httplib {
class Server;
}

namespace periodscope {

struct ServiceConfig {
    std::filesystem::path kg_path;
    std::filesystem::path corpus_path;
    std::filesystem::path session_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string preferred_language = "en";
    int max_depth = kDefaultMaxDepth;
    TemporalConfig temporal;
    std::string sentence_pattern;  // empty: built-in segmenter
    double min_confidence = 0.0;
    std::size_t typeahead_k = 10;
    std::size_t preview_k = 5;
    std::size_t preview_context = 1;
    std::size_t page_size = 20;
    std::size_t max_page_size = 200;
    std::string cors_origin = "*";
    // CURIE prefixes accepted in request bodies, e.g. "dbc:French_Revolution".
    std::map<std::string, std::string> prefixes;

    ServiceConfig();
};

// Relative paths are resolved against `base_dir`. Unknown keys are rejected.
ServiceConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Reads a JSON config file and validates it (see validate_config).
ServiceConfig load_config(const std::filesystem::path& file);

// kg_path and corpus_path must exist; session_dir is created if missing;
// port must be in [1, 65535]. Throws ConfigError.
void validate_config(const ServiceConfig& config);

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
    std::map<std::string, std::string> headers;
};

class Service {
public:
    // Loads the graph and corpus named in the config and opens the session store.
    static std::unique_ptr<Service> load(const ServiceConfig& config);

    Service(ServiceConfig config, KnowledgeGraph graph);
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    CorpusIndex& index() { return index_; }
    const CorpusIndex& index() const { return index_; }
    const KnowledgeGraph& graph() const { return graph_; }
    SessionStore& store() { return store_; }
    const ServiceConfig& config() const { return config_; }

    void set_clock(Clock clock) { clock_ = std::move(clock); }

    ApiResponse handle(const ApiRequest& request);

    // Registers all routes (and CORS handling) on `server`.
    void bind(httplib::Server& server);

    // Expands configured CURIE prefixes, then validates. Throws ValidationError.
    Iri expand_iri(const std::string& text) const;

private:
    ApiResponse get_categories(const ApiRequest& req);
    ApiResponse post_sessions(const ApiRequest& req);
    ApiResponse get_assessment(const std::string& id);
    ApiResponse post_decision(const std::string& id, const ApiRequest& req);
    ApiResponse get_results(const std::string& id, const ApiRequest& req);
    ApiResponse get_analytics(const std::string& id, const ApiRequest& req);
    ApiResponse post_assertion(const std::string& id, const ApiRequest& req);
    ApiResponse get_export(const std::string& id);

    nlohmann::ordered_json category_entries(const SearchSession& session, const Selection& selection,
                                            bool with_preview) const;
    nlohmann::ordered_json snippet_json(const Snippet& snippet) const;

    ServiceConfig config_;
    KnowledgeGraph graph_;
    CorpusIndex index_;
    SessionStore store_;
    Clock clock_ = system_clock();
};

}  // namespace periodscope
