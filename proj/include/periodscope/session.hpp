#pragma once

// A search session is the researcher's operationalization of a period: an
// append-only log of Select/Deselect decisions (system defaults first, then
// user actions) plus relevance assertions on retrieved fragments.
//
// Decisions and assertions share one per-session sequence counter, so seq
// numbers are globally ordered within a session and an assertion's seq tells
// which prefix of the decision log was in force when it was made.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "periodscope/corpus_index.hpp"
#include "periodscope/kg_store.hpp"
#include "periodscope/temporal.hpp"

namespace periodscope {

enum class Action { Select, Deselect };
enum class TargetKind { Category, Entity };
enum class Origin { SystemDefault, User };

std::string_view to_string(Action a);
std::string_view to_string(TargetKind k);
std::string_view to_string(Origin o);
// Throw ValidationError on unknown names.
Action parse_action(std::string_view s);
TargetKind parse_target_kind(std::string_view s);

using Seq = std::uint64_t;

struct Decision {
    Seq seq = 0;
    std::string timestamp;
    Action action = Action::Select;
    TargetKind target_kind = TargetKind::Entity;
    Iri target;
    Origin origin = Origin::User;

    friend bool operator==(const Decision&, const Decision&) = default;
};

struct RelevanceAssertion {
    Seq seq = 0;
    std::string timestamp;
    Fragment fragment;
    SentenceSpan sentence;
    std::vector<Iri> entities;
    std::vector<Iri> period_subjects;
    std::string period_label;
    std::vector<Seq> supporting_decisions;

    friend bool operator==(const RelevanceAssertion&, const RelevanceAssertion&) = default;
};

// Everything derived from (graph, roots, max_depth, period). Not persisted;
// rebuilt on import.
struct SessionScope {
    std::vector<CategoryTree> trees;
    std::vector<Iri> categories;  // BFS order across roots, first discovery wins
    std::vector<Iri> entities;    // first appearance across categories
    MemberMap members;
    std::map<Iri, std::vector<Iri>> entity_categories;
    std::map<Iri, TemporalProfile> profiles;
    std::map<Iri, RelevanceClass> classes;
    std::map<Iri, PruneState> pruning;

    bool has_category(const Iri& iri) const { return members.contains(iri); }
    bool has_entity(const Iri& iri) const { return entity_categories.contains(iri); }
};

SessionScope compute_scope(const KnowledgeGraph& graph, const std::vector<Iri>& roots,
                           int max_depth, const Period& period, const TemporalConfig& config);

struct Selection {
    std::set<Iri> categories;
    std::set<Iri> entities;

    friend bool operator==(const Selection&, const Selection&) = default;
};

struct SearchSession {
    std::string session_id;
    std::string created_at;
    std::string motivation;
    Period period;
    std::vector<Iri> roots;
    int max_depth = kDefaultMaxDepth;
    std::vector<Decision> decisions;
    std::vector<RelevanceAssertion> assertions;

    SessionScope scope;
    Seq next_seq = 1;
    std::string last_timestamp;
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

Clock system_clock();

// ISO-8601 UTC with millisecond precision, e.g. 2024-01-31T12:00:00.123Z.
std::string format_timestamp(std::chrono::system_clock::time_point tp);

std::string generate_session_id();

// Throws ValidationError (empty roots, bad period, negative depth, bad id) or
// UnknownCategory.
SearchSession create_session(const KnowledgeGraph& graph, std::string motivation, Period period,
                             std::vector<Iri> roots, int max_depth, const TemporalConfig& config,
                             const Clock& clock = system_clock(), std::string session_id = {});

// Throws UnknownTarget when the target is not a category/entity of the scope.
const Decision& record_decision(SearchSession& session, Action action, TargetKind kind,
                                const Iri& target, const Clock& clock = system_clock());

// Last action recorded per target (categories and entities are disjoint).
std::map<Iri, Action> latest_actions(std::span<const Decision> decisions);

// Last decision per target wins; an entity is effective only if it is
// selected and at least one category containing it is selected.
Selection replay(std::span<const Decision> decisions, const SessionScope& scope);
Selection effective_selection(const SearchSession& session);

// Throws FragmentNotInResultSet or UnknownDocument.
const RelevanceAssertion& assert_fragment_relevance(SearchSession& session,
                                                    const CorpusIndex& index,
                                                    const Fragment& fragment,
                                                    const Clock& clock = system_clock());

// Byte-stable JSON document (two-space indent, trailing newline).
std::string export_session(const SearchSession& session);

// Rebuilds the scope from the graph. Throws ExportFormatError on schema or
// invariant violations, UnknownCategory for roots missing from the graph.
SearchSession import_session(std::string_view json, const KnowledgeGraph& graph,
                             const TemporalConfig& config);

}  // namespace periodscope
