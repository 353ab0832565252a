#include "periodscope/service.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "periodscope/error.hpp"
#include "periodscope/sample_data.hpp"

namespace periodscope {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

ApiResponse json_response(int status, const ordered_json& body) {
    ApiResponse r;
    r.status = status;
    r.body = body.dump();
    return r;
}

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
    ordered_json body;
    body["error"] = code;
    body["message"] = message;
    return json_response(status, body);
}

int status_for(const Error& e) {
    const auto& c = e.code();
    if (c == "UnknownCategory" || c == "UnknownSession" || c == "UnknownTarget" ||
        c == "UnknownDocument")
        return 404;
    if (c == "FragmentNotInResultSet") return 409;
    return 400;
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/') ++i;
        const auto j = path.find('/', i);
        const auto end = j == std::string_view::npos ? path.size() : j;
        if (end > i) parts.emplace_back(path.substr(i, end - i));
        i = end;
    }
    return parts;
}

// Empty or absent -> fallback; otherwise a positive integer or ValidationError.
std::size_t positive_param(const ApiRequest& req, const std::string& key, std::size_t fallback) {
    auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) return fallback;
    std::size_t v = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v == 0)
        throw ValidationError("'" + key + "' must be a positive integer");
    return v;
}

json parse_body(const ApiRequest& req) {
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) throw ValidationError("request body must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed JSON body: ") + e.what());
    }
}

std::string body_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        throw ValidationError(std::string("'") + key + "' must be a string");
    return j[key].get<std::string>();
}

int body_int(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
        throw ValidationError(std::string("'") + key + "' must be an integer");
    return j[key].get<int>();
}

ordered_json iris_json(const std::set<Iri>& iris) {
    auto arr = ordered_json::array();
    for (const auto& i : iris) arr.push_back(i.str());
    return arr;
}

ordered_json selection_json(const Selection& sel) {
    ordered_json j;
    j["categories"] = iris_json(sel.categories);
    j["entities"] = iris_json(sel.entities);
    return j;
}

ordered_json decision_json(const Decision& d) {
    return {{"seq", d.seq},
            {"timestamp", d.timestamp},
            {"action", to_string(d.action)},
            {"target_kind", to_string(d.target_kind)},
            {"target", d.target.str()},
            {"origin", to_string(d.origin)}};
}

ordered_json assertion_json(const RelevanceAssertion& a) {
    auto iris = [](const std::vector<Iri>& v) {
        auto arr = ordered_json::array();
        for (const auto& i : v) arr.push_back(i.str());
        return arr;
    };
    return {{"seq", a.seq},
            {"timestamp", a.timestamp},
            {"doc_id", a.fragment.doc_id},
            {"sentence_start", a.sentence.start},
            {"sentence_end", a.sentence.end},
            {"entities", iris(a.entities)},
            {"period_subjects", iris(a.period_subjects)},
            {"supporting_decisions", a.supporting_decisions},
            {"sentence_index", a.fragment.sentence_index},
            {"period_label", a.period_label}};
}

ordered_json period_json(const Period& p) {
    return {{"label", p.label}, {"start_year", p.start_year}, {"end_year", p.end_year}};
}

template <typename T>
T config_value(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
}

std::size_t config_count(const json& j, const char* key, std::size_t fallback) {
    const auto v = config_value<long long>(j, key, static_cast<long long>(fallback));
    if (v < 1) throw ConfigError(std::string("config key '") + key + "' must be positive");
    return static_cast<std::size_t>(v);
}

}  // namespace

ServiceConfig::ServiceConfig() : prefixes{{"dbc", sample::kCategory}, {"dbr", sample::kResource}} {}

ServiceConfig parse_config(const json& j, const fs::path& base_dir) {
    static const std::set<std::string> known = {
        "kg_path", "corpus_path", "session_dir", "host", "port", "preferred_language",
        "max_depth", "min_year", "max_year", "year_fraction_threshold",
        "interval_fraction_threshold", "sentence_pattern", "min_confidence", "typeahead_k",
        "preview_k", "preview_context", "page_size", "max_page_size", "cors_origin", "prefixes"};
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ConfigError("unknown config key: " + key);

    auto path = [&](const char* key) -> fs::path {
        const auto v = config_value<std::string>(j, key, "");
        if (v.empty()) throw ConfigError(std::string("config key '") + key + "' is required");
        fs::path p(v);
        return p.is_absolute() ? p : base_dir / p;
    };

    ServiceConfig c;
    c.kg_path = path("kg_path");
    c.corpus_path = path("corpus_path");
    c.session_dir = path("session_dir");
    c.host = config_value(j, "host", c.host);
    c.port = config_value(j, "port", c.port);
    c.preferred_language = config_value(j, "preferred_language", c.preferred_language);
    c.max_depth = config_value(j, "max_depth", c.max_depth);
    c.temporal.min_year = config_value(j, "min_year", c.temporal.min_year);
    c.temporal.max_year = config_value(j, "max_year", c.temporal.max_year);
    c.temporal.year_fraction_threshold =
        config_value(j, "year_fraction_threshold", c.temporal.year_fraction_threshold);
    c.temporal.interval_fraction_threshold =
        config_value(j, "interval_fraction_threshold", c.temporal.interval_fraction_threshold);
    c.sentence_pattern = config_value(j, "sentence_pattern", c.sentence_pattern);
    c.min_confidence = config_value(j, "min_confidence", c.min_confidence);
    c.typeahead_k = config_count(j, "typeahead_k", c.typeahead_k);
    c.preview_k = config_count(j, "preview_k", c.preview_k);
    c.preview_context = static_cast<std::size_t>(
        config_value<long long>(j, "preview_context", static_cast<long long>(c.preview_context)));
    c.page_size = config_count(j, "page_size", c.page_size);
    c.max_page_size = config_count(j, "max_page_size", c.max_page_size);
    c.cors_origin = config_value(j, "cors_origin", c.cors_origin);
    if (j.contains("prefixes")) c.prefixes = config_value<std::map<std::string, std::string>>(j, "prefixes", {});

    if (c.max_depth < 0) throw ConfigError("max_depth must be non-negative");
    if (c.temporal.min_year > c.temporal.max_year) throw ConfigError("min_year exceeds max_year");
    if (c.page_size > c.max_page_size) throw ConfigError("page_size exceeds max_page_size");
    return c;
}

void validate_config(const ServiceConfig& c) {
    if (!fs::is_regular_file(c.kg_path)) throw ConfigError("kg_path does not exist: " + c.kg_path.string());
    if (!fs::is_regular_file(c.corpus_path))
        throw ConfigError("corpus_path does not exist: " + c.corpus_path.string());
    std::error_code ec;
    fs::create_directories(c.session_dir, ec);
    if (!fs::is_directory(c.session_dir))
        throw ConfigError("session_dir is not a directory: " + c.session_dir.string());
    if (c.port < 1 || c.port > 65535) throw ConfigError("port must be in [1, 65535]");
}

ServiceConfig load_config(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    auto config = parse_config(j, fs::absolute(file).parent_path());
    validate_config(config);
    return config;
}

Service::Service(ServiceConfig config, KnowledgeGraph graph)
    : config_(std::move(config)),
      graph_(std::move(graph)),
      index_(IndexOptions{config_.sentence_pattern, config_.min_confidence,
                          [this](const Iri& iri) { return graph_.resolve(iri); }}),
      store_(config_.session_dir, graph_, config_.temporal) {}

std::unique_ptr<Service> Service::load(const ServiceConfig& config) {
    std::ifstream kg(config.kg_path, std::ios::binary);
    if (!kg) throw ConfigError("cannot open " + config.kg_path.string());
    GraphConfig gc;
    gc.preferred_language = config.preferred_language;
    auto graph = build_graph(parse_triples(kg), gc);
    for (const auto& w : graph.warnings) spdlog::warn("graph: {}", w);
    spdlog::info("graph: {} categories, {} entities", graph.categories.size(), graph.entities.size());

    auto service = std::make_unique<Service>(config, std::move(graph));
    std::ifstream corpus(config.corpus_path, std::ios::binary);
    if (!corpus) throw ConfigError("cannot open " + config.corpus_path.string());
    const auto docs = service->index().ingest_jsonl(corpus);
    spdlog::info("corpus: {} documents", docs);
    const auto sessions = service->store().load_all();
    spdlog::info("sessions: {} restored from {}", sessions, config.session_dir.string());
    return service;
}

Iri Service::expand_iri(const std::string& text) const {
    const auto colon = text.find(':');
    if (colon != std::string::npos && text.compare(colon, 3, "://") != 0) {
        auto it = config_.prefixes.find(text.substr(0, colon));
        if (it != config_.prefixes.end()) return Iri::parse(it->second + text.substr(colon + 1));
    }
    return Iri::parse(text);
}

ApiResponse Service::handle(const ApiRequest& req) {
    try {
        const auto parts = split_path(req.path);
        auto method_not_allowed = [&] {
            return error_response(405, "MethodNotAllowed", req.method + " not allowed on " + req.path);
        };
        if (parts.size() == 1 && parts[0] == "categories")
            return req.method == "GET" ? get_categories(req) : method_not_allowed();
        if (parts.size() == 1 && parts[0] == "sessions")
            return req.method == "POST" ? post_sessions(req) : method_not_allowed();
        if (parts.size() == 3 && parts[0] == "sessions") {
            const auto& id = parts[1];
            const auto& what = parts[2];
            const bool get = req.method == "GET";
            const bool post = req.method == "POST";
            if (what == "assessment") return get ? get_assessment(id) : method_not_allowed();
            if (what == "decisions") return post ? post_decision(id, req) : method_not_allowed();
            if (what == "results") return get ? get_results(id, req) : method_not_allowed();
            if (what == "analytics") return get ? get_analytics(id, req) : method_not_allowed();
            if (what == "assertions") return post ? post_assertion(id, req) : method_not_allowed();
            if (what == "export") return get ? get_export(id) : method_not_allowed();
        }
        return error_response(404, "NotFound", "no route for " + req.path);
    } catch (const Error& e) {
        return error_response(status_for(e), e.code(), e.what());
    } catch (const std::exception& e) {
        spdlog::error("{} {}: {}", req.method, req.path, e.what());
        return error_response(500, "InternalError", e.what());
    }
}

ApiResponse Service::get_categories(const ApiRequest& req) {
    auto it = req.query.find("q");
    const std::string q = it == req.query.end() ? "" : it->second;
    const auto k = positive_param(req, "k", config_.typeahead_k);
    auto out = ordered_json::array();
    for (const auto& m : label_search(graph_, q, k)) out.push_back({{"iri", m.iri.str()}, {"label", m.label}});
    return json_response(200, out);
}

ordered_json Service::snippet_json(const Snippet& s) const {
    const Document* doc = index_.find(s.fragment.doc_id);
    ordered_json j;
    j["doc_id"] = s.fragment.doc_id;
    j["sentence_index"] = s.fragment.sentence_index;
    j["date"] = doc->date.str();
    j["meta"] = doc->meta;
    j["sentence_start"] = s.sentence.start;
    j["sentence_end"] = s.sentence.end;
    j["text_start"] = s.text_start;
    j["text"] = s.text;
    auto hl = ordered_json::array();
    for (const auto& h : s.highlights) hl.push_back({{"start", h.start}, {"end", h.end}, {"iri", h.entity.str()}});
    j["highlights"] = std::move(hl);
    return j;
}

ordered_json Service::category_entries(const SearchSession& session, const Selection& selection,
                                       bool with_preview) const {
    const auto& scope = session.scope;
    std::map<Iri, const TreeNode*> nodes;
    for (const auto& tree : scope.trees)
        for (const auto& n : tree.nodes) nodes.try_emplace(n.category, &n);
    const auto own = latest_actions(session.decisions);

    auto out = ordered_json::array();
    for (const auto& category : scope.categories) {
        const auto& members = scope.members.at(category);
        const auto counts = index_.entity_counts(members);
        const TreeNode* node = nodes.at(category);

        ordered_json c;
        c["iri"] = category.str();
        c["label"] = graph_.display_label(category);
        c["depth"] = node->depth;
        c["parent"] = node->parent ? ordered_json(node->parent->str()) : ordered_json(nullptr);
        c["default_state"] = to_string(scope.pruning.at(category));
        c["selected"] = selection.categories.contains(category);
        c["entity_count"] = members.size();
        std::size_t mentions = 0;
        std::vector<Iri> previewable;
        auto entities = ordered_json::array();
        for (const auto& e : members) {
            const auto n = counts.at(e);
            mentions += n;
            const bool selected = own.contains(e) && own.at(e) == Action::Select;
            if (selected) previewable.push_back(e);
            ordered_json ej;
            ej["iri"] = e.str();
            ej["label"] = graph_.display_label(e);
            ej["class"] = to_string(scope.classes.at(e));
            ej["years"] = scope.profiles.at(e).years;
            ej["mentions"] = n;
            ej["selected"] = selected;
            ej["effective"] = selection.entities.contains(e);
            entities.push_back(std::move(ej));
        }
        c["mention_count"] = mentions;
        c["entities"] = std::move(entities);
        if (with_preview) {
            auto preview = ordered_json::array();
            for (const auto& s : index_.preview(previewable, config_.preview_k, config_.preview_context))
                preview.push_back(snippet_json(s));
            c["preview"] = std::move(preview);
        }
        out.push_back(std::move(c));
    }
    return out;
}

ApiResponse Service::post_sessions(const ApiRequest& req) {
    const auto body = parse_body(req);
    const std::string motivation = body.contains("motivation") ? body_string(body, "motivation") : "";
    if (!body.contains("period") || !body["period"].is_object())
        throw ValidationError("'period' must be an object");
    const auto& p = body["period"];
    Period period{p.contains("label") ? body_string(p, "label") : "", body_int(p, "start_year"),
                  body_int(p, "end_year")};
    validate(period);
    if (!body.contains("roots") || !body["roots"].is_array()) throw ValidationError("'roots' must be an array");
    std::vector<Iri> roots;
    for (const auto& r : body["roots"]) {
        if (!r.is_string()) throw ValidationError("'roots' must hold strings");
        roots.push_back(expand_iri(r.get<std::string>()));
    }
    const int max_depth = body.contains("max_depth") ? body_int(body, "max_depth") : config_.max_depth;

    auto session = create_session(graph_, motivation, std::move(period), std::move(roots), max_depth,
                                  config_.temporal, clock_);
    const auto selection = effective_selection(session);

    ordered_json out;
    out["session_id"] = session.session_id;
    out["created_at"] = session.created_at;
    out["motivation"] = session.motivation;
    out["period"] = period_json(session.period);
    auto roots_json = ordered_json::array();
    for (const auto& r : session.roots) roots_json.push_back(r.str());
    out["roots"] = std::move(roots_json);
    out["max_depth"] = session.max_depth;
    out["decision_count"] = session.decisions.size();
    out["selection"] = selection_json(selection);
    out["tree"] = category_entries(session, selection, false);
    store_.insert(std::move(session));
    return json_response(201, out);
}

ApiResponse Service::get_assessment(const std::string& id) {
    const auto session = store_.snapshot(id);
    const auto selection = effective_selection(session);
    ordered_json out;
    out["session_id"] = session.session_id;
    out["period"] = period_json(session.period);
    out["selection"] = selection_json(selection);
    out["categories"] = category_entries(session, selection, true);
    return json_response(200, out);
}

ApiResponse Service::post_decision(const std::string& id, const ApiRequest& req) {
    const auto body = parse_body(req);
    const auto action = parse_action(body_string(body, "action"));
    const auto kind = parse_target_kind(body_string(body, "target_kind"));
    const auto target = expand_iri(body_string(body, "target"));
    if (!store_.contains(id)) throw UnknownSession(id);
    return store_.mutate(id, [&](SearchSession& s) {
        const auto decision = record_decision(s, action, kind, target, clock_);
        ordered_json out;
        out["decision"] = decision_json(decision);
        out["decision_count"] = s.decisions.size();
        out["selection"] = selection_json(effective_selection(s));
        return json_response(200, out);
    });
}

ApiResponse Service::get_results(const std::string& id, const ApiRequest& req) {
    const auto page = positive_param(req, "page", 1);
    const auto page_size = std::min(positive_param(req, "page_size", config_.page_size), config_.max_page_size);
    const auto session = store_.snapshot(id);
    const auto selection = effective_selection(session);
    const auto fragments = index_.fetch_fragments(selection.entities, {}, config_.preview_context);

    auto items = ordered_json::array();
    const std::size_t first = (page - 1) * page_size;
    for (std::size_t i = first; i < fragments.size() && i < first + page_size; ++i)
        items.push_back(snippet_json(index_.render(fragments[i], selection.entities)));

    ordered_json out;
    out["session_id"] = session.session_id;
    out["total"] = fragments.size();
    out["page"] = page;
    out["page_size"] = page_size;
    out["fragments"] = std::move(items);
    return json_response(200, out);
}

ApiResponse Service::get_analytics(const std::string& id, const ApiRequest& req) {
    auto it = req.query.find("group_by");
    const std::string group_by = it == req.query.end() ? "" : it->second;
    const bool by_year = group_by == "year";
    const bool by_meta = group_by.starts_with("meta:") && group_by.size() > 5;
    if (!by_year && !by_meta) throw ValidationError("group_by must be 'year' or 'meta:<key>'");

    const auto session = store_.snapshot(id);
    const auto selection = effective_selection(session);
    ordered_json counts = ordered_json::object();
    if (by_year) {
        for (const auto& [year, n] : index_.timeline_counts(selection.entities)) counts[std::to_string(year)] = n;
    } else {
        for (const auto& [value, n] : index_.facet_counts(selection.entities, group_by.substr(5)))
            counts[value] = n;
    }
    ordered_json out;
    out["session_id"] = session.session_id;
    out["group_by"] = group_by;
    out["total"] = index_.link_occurrences(selection.entities);
    out["counts"] = std::move(counts);
    return json_response(200, out);
}

ApiResponse Service::post_assertion(const std::string& id, const ApiRequest& req) {
    const auto body = parse_body(req);
    const auto doc_id = body_string(body, "doc_id");
    const auto sentence = body_int(body, "sentence_index");
    if (sentence < 0) throw ValidationError("'sentence_index' must be non-negative");
    if (!store_.contains(id)) throw UnknownSession(id);
    return store_.mutate(id, [&](SearchSession& s) {
        const auto& a = assert_fragment_relevance(s, index_, {doc_id, static_cast<std::size_t>(sentence), 0, 0},
                                                  clock_);
        return json_response(201, assertion_json(a));
    });
}

ApiResponse Service::get_export(const std::string& id) {
    const auto session = store_.snapshot(id);
    ApiResponse r;
    r.body = export_session(session);
    r.headers["Content-Disposition"] = "attachment; filename=\"" + session.session_id + ".json\"";
    return r;
}

void Service::bind(httplib::Server& server) {
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest api{req.method, req.path, {}, req.body};
        for (const auto& [k, v] : req.params) api.query.try_emplace(k, v);
        const auto out = handle(api);
        res.status = out.status;
        for (const auto& [k, v] : out.headers) res.set_header(k, v);
        res.set_content(out.body, out.content_type);
    };
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.Put(".*", dispatch);
    server.Delete(".*", dispatch);
    server.Patch(".*", dispatch);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_post_routing_handler([origin = config_.cors_origin](const httplib::Request&, httplib::Response& res) {
        if (origin.empty()) return;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.set_header("Access-Control-Expose-Headers", "Content-Disposition");
    });
}

}  // namespace periodscope
