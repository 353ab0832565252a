#pragma once

// In-memory category network built from a strict subset of N-Triples.
//
// Only five predicates are recognized (broader, subject, label, comment,
// sameAs). Reverse adjacency (broader -> narrower, category -> members) is
// materialized at build time so traversal costs O(out-degree) per node.

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace periodscope {

// Absolute IRI without the surrounding angle brackets.
class Iri {
public:
    Iri() = default;

    // Accepts either `<http://...>` or `http://...`; throws ValidationError if
    // the result is empty, lacks a scheme, contains spaces/brackets/quotes, or
    // is not valid UTF-8.
    static Iri parse(std::string_view text);

    // Unchecked construction for values already known to be valid.
    static Iri trusted(std::string value) {
        Iri iri;
        iri.value_ = std::move(value);
        return iri;
    }

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    // Trailing path segment: after the last '/', '#' or "Category:".
    std::string local_name() const;

    friend auto operator<=>(const Iri&, const Iri&) = default;

private:
    std::string value_;
};

struct Literal {
    std::string value;
    std::string language;  // empty when untagged

    friend auto operator<=>(const Literal&, const Literal&) = default;
};

struct Triple {
    Iri subject;
    Iri predicate;
    std::variant<Iri, Literal> object;

    bool object_is_literal() const { return std::holds_alternative<Literal>(object); }
    friend bool operator==(const Triple&, const Triple&) = default;
};

// Throws MalformedTriple (1-based line) or DecodingError on invalid UTF-8.
std::vector<Triple> parse_triples(std::istream& in);
std::vector<Triple> parse_triples(std::string_view text);

// One line per triple, N-Triples escaping applied to literals.
std::string serialize_triples(const std::vector<Triple>& triples);

namespace vocab {
inline constexpr std::string_view skos_broader = "http://www.w3.org/2004/02/skos/core#broader";
inline constexpr std::string_view dct_subject = "http://purl.org/dc/terms/subject";
inline constexpr std::string_view rdfs_label = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr std::string_view rdfs_comment = "http://www.w3.org/2000/01/rdf-schema#comment";
inline constexpr std::string_view owl_same_as = "http://www.w3.org/2002/07/owl#sameAs";
}  // namespace vocab

struct GraphConfig {
    std::string broader{vocab::skos_broader};
    std::string subject{vocab::dct_subject};
    std::string label{vocab::rdfs_label};
    std::string comment{vocab::rdfs_comment};
    std::string same_as{vocab::owl_same_as};
    std::string preferred_language = "en";
};

struct KnowledgeGraph {
    std::set<Iri> categories;
    std::set<Iri> entities;
    std::set<std::pair<Iri, Iri>> broader_edges;  // (narrower, broader)
    std::set<std::pair<Iri, Iri>> subject_edges;  // (entity, category)
    std::map<Iri, std::string> labels;
    std::map<Iri, std::string> descriptions;
    std::map<Iri, Iri> aliases;  // non-canonical -> canonical

    // Reverse adjacency, each list sorted.
    std::map<Iri, std::vector<Iri>> narrower;
    std::map<Iri, std::vector<Iri>> members;

    // Non-fatal build problems (ConflictingAlias, category/entity clashes),
    // sorted so the graph compares equal regardless of input order.
    std::vector<std::string> warnings;

    bool is_category(const Iri& iri) const { return categories.contains(iri); }
    bool is_entity(const Iri& iri) const { return entities.contains(iri); }

    Iri resolve(const Iri& iri) const;

    // rdfs:label if present, otherwise derived from the local name.
    std::string display_label(const Iri& iri) const;

    std::string description(const Iri& iri) const;

    friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;
};

KnowledgeGraph build_graph(const std::vector<Triple>& triples, const GraphConfig& config = {});

struct TreeNode {
    Iri category;
    int depth = 0;
    std::optional<Iri> parent;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct CategoryTree {
    Iri root;
    std::vector<TreeNode> nodes;  // BFS order, root first

    bool contains(const Iri& category) const;
    friend bool operator==(const CategoryTree&, const CategoryTree&) = default;
};

inline constexpr int kDefaultMaxDepth = 3;

// Breadth-first over reversed broader edges. Throws UnknownCategory.
CategoryTree narrower_categories(const KnowledgeGraph& graph, const Iri& root,
                                 int max_depth = kDefaultMaxDepth);

using MemberMap = std::map<Iri, std::vector<Iri>>;

MemberMap member_entities(const KnowledgeGraph& graph, const CategoryTree& tree);

struct LabelMatch {
    Iri iri;
    std::string label;

    friend bool operator==(const LabelMatch&, const LabelMatch&) = default;
};

// Case-insensitive substring search over category labels.
std::vector<LabelMatch> label_search(const KnowledgeGraph& graph, std::string_view query,
                                     std::size_t k);

}  // namespace periodscope
