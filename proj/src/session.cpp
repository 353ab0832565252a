#include "periodscope/session.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <random>

#include <nlohmann/json.hpp>

#include "periodscope/error.hpp"

namespace periodscope {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string next_timestamp(SearchSession& session, const Clock& clock) {
    auto ts = format_timestamp(clock());
    // wall clocks may step backwards; the log must not
    if (ts < session.last_timestamp) ts = session.last_timestamp;
    session.last_timestamp = ts;
    return ts;
}

bool valid_session_id(std::string_view id) {
    if (id.empty() || id.size() > 128) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '-' || c == '_';
    });
}

ordered_json iri_array(const std::vector<Iri>& iris) {
    auto arr = ordered_json::array();
    for (const auto& i : iris) arr.push_back(i.str());
    return arr;
}

[[noreturn]] void bad_export(const std::string& what) { throw ExportFormatError(what); }

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad_export(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string string_field(const nlohmann::json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) bad_export(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

long long int_field(const nlohmann::json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_number_integer()) bad_export(std::string("field '") + key + "' must be an integer");
    return v.get<long long>();
}

Seq seq_field(const nlohmann::json& j, const char* key) {
    const auto v = int_field(j, key);
    if (v < 1) bad_export(std::string("field '") + key + "' must be positive");
    return static_cast<Seq>(v);
}

std::vector<Iri> iri_list_field(const nlohmann::json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_array()) bad_export(std::string("field '") + key + "' must be an array");
    std::vector<Iri> out;
    for (const auto& item : v) {
        if (!item.is_string()) bad_export(std::string("field '") + key + "' must hold strings");
        try {
            out.push_back(Iri::parse(item.get<std::string>()));
        } catch (const ValidationError& e) {
            bad_export(e.what());
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(Action a) { return a == Action::Select ? "Select" : "Deselect"; }
std::string_view to_string(TargetKind k) { return k == TargetKind::Category ? "Category" : "Entity"; }
std::string_view to_string(Origin o) { return o == Origin::SystemDefault ? "SystemDefault" : "User"; }

Action parse_action(std::string_view s) {
    if (s == "Select") return Action::Select;
    if (s == "Deselect") return Action::Deselect;
    throw ValidationError("unknown action: " + std::string(s));
}

TargetKind parse_target_kind(std::string_view s) {
    if (s == "Category") return TargetKind::Category;
    if (s == "Entity") return TargetKind::Entity;
    throw ValidationError("unknown target_kind: " + std::string(s));
}

Origin parse_origin(std::string_view s) {
    if (s == "SystemDefault") return Origin::SystemDefault;
    if (s == "User") return Origin::User;
    throw ValidationError("unknown origin: " + std::string(s));
}

Clock system_clock() {
    return [] { return std::chrono::system_clock::now(); };
}

std::string format_timestamp(std::chrono::system_clock::time_point tp) {
    using namespace std::chrono;
    const auto ms_total = duration_cast<milliseconds>(tp.time_since_epoch()).count();
    auto secs = static_cast<std::time_t>(ms_total / 1000);
    auto ms = ms_total % 1000;
    if (ms < 0) {
        ms += 1000;
        --secs;
    }
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf;
}

std::string generate_session_id() {
    std::random_device rd;
    const auto hi = static_cast<std::uint64_t>(rd()) << 32 | rd();
    char buf[24];
    std::snprintf(buf, sizeof buf, "s-%016llx", static_cast<unsigned long long>(hi));
    return buf;
}

SessionScope compute_scope(const KnowledgeGraph& graph, const std::vector<Iri>& roots,
                           int max_depth, const Period& period, const TemporalConfig& config) {
    SessionScope scope;
    for (const auto& root : roots) {
        auto tree = narrower_categories(graph, root, max_depth);
        auto members = member_entities(graph, tree);
        for (const auto& node : tree.nodes) {
            if (scope.members.contains(node.category)) continue;
            scope.categories.push_back(node.category);
            auto& list = scope.members[node.category];
            list = members[node.category];
            for (const auto& e : list) {
                auto [it, fresh] = scope.entity_categories.try_emplace(e);
                if (fresh) scope.entities.push_back(e);
                it->second.push_back(node.category);
            }
        }
        scope.trees.push_back(std::move(tree));
    }
    for (const auto& e : scope.entities) {
        auto profile = extract_temporal_profile(graph.description(e), config);
        scope.classes[e] = classify_entity(profile, period, config);
        scope.profiles.emplace(e, std::move(profile));
    }
    for (const auto& tree : scope.trees)
        for (const auto& [category, state] : prune_categories(tree, scope.members, scope.classes))
            scope.pruning.emplace(category, state);
    return scope;
}

SearchSession create_session(const KnowledgeGraph& graph, std::string motivation, Period period,
                             std::vector<Iri> roots, int max_depth, const TemporalConfig& config,
                             const Clock& clock, std::string session_id) {
    validate(period);
    if (roots.empty()) throw ValidationError("at least one root category is required");
    if (max_depth < 0) throw ValidationError("max_depth must be non-negative");
    if (session_id.empty()) session_id = generate_session_id();
    if (!valid_session_id(session_id)) throw ValidationError("invalid session id: " + session_id);

    SearchSession s;
    s.session_id = std::move(session_id);
    s.motivation = std::move(motivation);
    s.period = std::move(period);
    s.max_depth = max_depth;
    s.scope = compute_scope(graph, roots, max_depth, s.period, config);
    for (const auto& tree : s.scope.trees)
        if (std::find(s.roots.begin(), s.roots.end(), tree.root) == s.roots.end())
            s.roots.push_back(tree.root);
    s.created_at = next_timestamp(s, clock);

    auto add_default = [&](Action action, TargetKind kind, const Iri& target) {
        s.decisions.push_back({s.next_seq++, s.created_at, action, kind, target, Origin::SystemDefault});
    };
    for (const auto& c : s.scope.categories)
        add_default(s.scope.pruning.at(c) == PruneState::Included ? Action::Select : Action::Deselect,
                    TargetKind::Category, c);
    for (const auto& e : s.scope.entities)
        add_default(s.scope.classes.at(e) == RelevanceClass::OutOfPeriod ? Action::Deselect
                                                                         : Action::Select,
                    TargetKind::Entity, e);
    return s;
}

const Decision& record_decision(SearchSession& session, Action action, TargetKind kind,
                                const Iri& target, const Clock& clock) {
    const bool known = kind == TargetKind::Category ? session.scope.has_category(target)
                                                    : session.scope.has_entity(target);
    if (!known) throw UnknownTarget(target.str());
    const auto ts = next_timestamp(session, clock);
    session.decisions.push_back({session.next_seq++, ts, action, kind, target, Origin::User});
    return session.decisions.back();
}

std::map<Iri, Action> latest_actions(std::span<const Decision> decisions) {
    std::map<Iri, Action> out;
    for (const auto& d : decisions) out[d.target] = d.action;
    return out;
}

Selection replay(std::span<const Decision> decisions, const SessionScope& scope) {
    Selection sel;
    const auto state = latest_actions(decisions);
    for (const auto& [iri, a] : state)
        if (a == Action::Select && scope.has_category(iri)) sel.categories.insert(iri);
    for (const auto& [e, a] : state) {
        if (a != Action::Select || !scope.has_entity(e)) continue;
        auto it = scope.entity_categories.find(e);
        if (it == scope.entity_categories.end()) continue;
        if (std::any_of(it->second.begin(), it->second.end(),
                        [&](const Iri& c) { return sel.categories.contains(c); }))
            sel.entities.insert(e);
    }
    return sel;
}

Selection effective_selection(const SearchSession& session) {
    return replay(session.decisions, session.scope);
}

const RelevanceAssertion& assert_fragment_relevance(SearchSession& session,
                                                    const CorpusIndex& index,
                                                    const Fragment& fragment, const Clock& clock) {
    const Document* doc = index.find(fragment.doc_id);
    if (!doc) throw UnknownDocument(fragment.doc_id);
    if (fragment.sentence_index >= doc->sentences.size())
        throw FragmentNotInResultSet("sentence " + std::to_string(fragment.sentence_index) +
                                     " does not exist in " + fragment.doc_id);

    const auto selection = effective_selection(session);
    auto entities = index.matching_entities(fragment, selection.entities);
    if (entities.empty())
        throw FragmentNotInResultSet("sentence " + std::to_string(fragment.sentence_index) + " of " +
                                     fragment.doc_id + " matches no selected entity");

    std::set<Iri> related(entities.begin(), entities.end());
    for (const auto& e : entities)
        for (const auto& c : session.scope.entity_categories.at(e)) related.insert(c);

    RelevanceAssertion a;
    a.fragment = {fragment.doc_id, fragment.sentence_index, 0, 0};
    a.sentence = doc->sentences[fragment.sentence_index];
    a.entities = std::move(entities);
    a.period_subjects = session.roots;
    a.period_label = session.period.label;
    for (const auto& d : session.decisions)
        if (related.contains(d.target)) a.supporting_decisions.push_back(d.seq);
    a.timestamp = next_timestamp(session, clock);
    a.seq = session.next_seq++;
    session.assertions.push_back(std::move(a));
    return session.assertions.back();
}

std::string export_session(const SearchSession& s) {
    ordered_json j;
    j["session_id"] = s.session_id;
    j["created_at"] = s.created_at;
    j["motivation"] = s.motivation;
    j["period"] = {{"label", s.period.label},
                   {"start_year", s.period.start_year},
                   {"end_year", s.period.end_year}};
    j["roots"] = iri_array(s.roots);
    j["max_depth"] = s.max_depth;

    auto decisions = ordered_json::array();
    for (const auto& d : s.decisions) {
        decisions.push_back({{"seq", d.seq},
                             {"timestamp", d.timestamp},
                             {"action", to_string(d.action)},
                             {"target_kind", to_string(d.target_kind)},
                             {"target", d.target.str()},
                             {"origin", to_string(d.origin)}});
    }
    j["decisions"] = std::move(decisions);

    auto assertions = ordered_json::array();
    for (const auto& a : s.assertions) {
        assertions.push_back({{"seq", a.seq},
                              {"timestamp", a.timestamp},
                              {"doc_id", a.fragment.doc_id},
                              {"sentence_start", a.sentence.start},
                              {"sentence_end", a.sentence.end},
                              {"entities", iri_array(a.entities)},
                              {"period_subjects", iri_array(a.period_subjects)},
                              {"supporting_decisions", a.supporting_decisions},
                              {"sentence_index", a.fragment.sentence_index},
                              {"period_label", a.period_label}});
    }
    j["assertions"] = std::move(assertions);
    return j.dump(2) + "\n";
}

SearchSession import_session(std::string_view text, const KnowledgeGraph& graph,
                             const TemporalConfig& config) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        bad_export(e.what());
    }
    if (!j.is_object()) bad_export("export must be a JSON object");

    SearchSession s;
    s.session_id = string_field(j, "session_id");
    if (!valid_session_id(s.session_id)) bad_export("invalid session_id");
    s.created_at = string_field(j, "created_at");
    s.motivation = string_field(j, "motivation");
    const auto& period = field(j, "period");
    s.period.label = string_field(period, "label");
    s.period.start_year = static_cast<int>(int_field(period, "start_year"));
    s.period.end_year = static_cast<int>(int_field(period, "end_year"));
    if (s.period.start_year > s.period.end_year) bad_export("period start_year after end_year");
    s.roots = iri_list_field(j, "roots");
    if (s.roots.empty()) bad_export("roots must not be empty");
    s.max_depth = static_cast<int>(int_field(j, "max_depth"));
    if (s.max_depth < 0) bad_export("max_depth must be non-negative");
    s.scope = compute_scope(graph, s.roots, s.max_depth, s.period, config);
    s.last_timestamp = s.created_at;

    std::set<Seq> seen;
    Seq max_seq = 0;
    const auto& decisions = field(j, "decisions");
    if (!decisions.is_array()) bad_export("'decisions' must be an array");
    bool user_seen = false;
    for (const auto& d : decisions) {
        Decision dec;
        dec.seq = seq_field(d, "seq");
        dec.timestamp = string_field(d, "timestamp");
        try {
            dec.action = parse_action(string_field(d, "action"));
            dec.target_kind = parse_target_kind(string_field(d, "target_kind"));
            dec.origin = parse_origin(string_field(d, "origin"));
            dec.target = Iri::parse(string_field(d, "target"));
        } catch (const ValidationError& e) {
            bad_export(e.what());
        }
        if (dec.seq <= max_seq) bad_export("decision seq numbers must strictly increase");
        if (dec.timestamp < s.last_timestamp) bad_export("decision timestamps must not decrease");
        if (dec.origin == Origin::User) user_seen = true;
        else if (user_seen) bad_export("SystemDefault decision after a User decision");
        const bool known = dec.target_kind == TargetKind::Category ? s.scope.has_category(dec.target)
                                                                   : s.scope.has_entity(dec.target);
        if (!known) bad_export("decision target outside session scope: " + dec.target.str());
        max_seq = dec.seq;
        s.last_timestamp = dec.timestamp;
        seen.insert(dec.seq);
        s.decisions.push_back(std::move(dec));
    }

    const auto& assertions = field(j, "assertions");
    if (!assertions.is_array()) bad_export("'assertions' must be an array");
    Seq last_assertion = 0;
    for (const auto& a : assertions) {
        RelevanceAssertion ra;
        ra.seq = seq_field(a, "seq");
        ra.timestamp = string_field(a, "timestamp");
        ra.fragment.doc_id = string_field(a, "doc_id");
        ra.sentence.start = static_cast<std::size_t>(int_field(a, "sentence_start"));
        ra.sentence.end = static_cast<std::size_t>(int_field(a, "sentence_end"));
        ra.fragment.sentence_index = static_cast<std::size_t>(int_field(a, "sentence_index"));
        ra.entities = iri_list_field(a, "entities");
        ra.period_subjects = iri_list_field(a, "period_subjects");
        ra.period_label = string_field(a, "period_label");
        const auto& support = field(a, "supporting_decisions");
        if (!support.is_array()) bad_export("'supporting_decisions' must be an array");
        for (const auto& v : support) {
            if (!v.is_number_integer() || v.get<long long>() < 1)
                bad_export("supporting decision seqs must be positive integers");
            ra.supporting_decisions.push_back(v.get<Seq>());
        }
        if (ra.entities.empty()) bad_export("assertion entities must not be empty");
        if (ra.seq <= last_assertion || seen.contains(ra.seq)) bad_export("duplicate or unordered assertion seq");
        for (auto dseq : ra.supporting_decisions)
            if (!seen.contains(dseq) || dseq > ra.seq)
                bad_export("assertion references unknown decision " + std::to_string(dseq));
        last_assertion = ra.seq;
        max_seq = std::max(max_seq, ra.seq);
        s.last_timestamp = std::max(s.last_timestamp, ra.timestamp);
        s.assertions.push_back(std::move(ra));
    }
    s.next_seq = max_seq + 1;
    return s;
}

}  // namespace periodscope
