#include "periodscope/kg_store.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <tuple>

#include "periodscope/error.hpp"
#include "periodscope/utf8.hpp"

namespace periodscope {

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

bool has_scheme(std::string_view v) {
    if (v.empty() || !is_ascii_alpha(v[0])) return false;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const char c = v[i];
        if (c == ':') return i + 1 < v.size();
        if (!(is_ascii_alpha(c) || is_ascii_digit(c) || c == '+' || c == '-' || c == '.'))
            return false;
    }
    return false;
}

bool forbidden_iri_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' ||
           c == '^' || c == '`' || c == '\\';
}

// Cursor over one N-Triples line.
class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

    Triple parse() {
        Triple t;
        t.subject = iri();
        require_space();
        t.predicate = iri();
        require_space();
        skip_space();
        if (peek() == '<') {
            t.object = iri();
        } else if (peek() == '"') {
            t.object = literal();
        } else {
            fail("expected IRI or literal object");
        }
        skip_space();
        if (peek() != '.') fail("expected terminating '.'");
        ++pos_;
        skip_space();
        if (pos_ < s_.size() && s_[pos_] != '#') fail("trailing content after '.'");
        return t;
    }

private:
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

    [[noreturn]] void fail(const std::string& what) const { throw MalformedTriple(line_, what); }

    void skip_space() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }

    void require_space() {
        if (peek() != ' ' && peek() != '\t') fail("expected whitespace between terms");
        skip_space();
    }

    Iri iri() {
        skip_space();
        if (peek() != '<') fail("expected '<'");
        const auto start = ++pos_;
        while (pos_ < s_.size() && s_[pos_] != '>') {
            if (forbidden_iri_char(s_[pos_])) fail("invalid character in IRI");
            ++pos_;
        }
        if (pos_ >= s_.size()) fail("unterminated IRI");
        const auto value = s_.substr(start, pos_ - start);
        ++pos_;
        if (!has_scheme(value)) fail("IRI is not absolute");
        return Iri::trusted(std::string(value));
    }

    unsigned hex_digits(std::size_t n) {
        if (pos_ + n > s_.size()) fail("truncated unicode escape");
        unsigned v = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const char c = s_[pos_++];
            v <<= 4;
            if (is_ascii_digit(c))
                v |= static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f')
                v |= static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F')
                v |= static_cast<unsigned>(c - 'A' + 10);
            else
                fail("invalid hex digit in escape");
        }
        return v;
    }

    Literal literal() {
        ++pos_;  // opening quote
        Literal lit;
        for (;;) {
            if (pos_ >= s_.size()) fail("unterminated literal");
            const char c = s_[pos_++];
            if (c == '"') break;
            if (c == '\n' || c == '\r') fail("raw line break in literal");
            if (c != '\\') {
                lit.value.push_back(c);
                continue;
            }
            if (pos_ >= s_.size()) fail("dangling escape");
            const char e = s_[pos_++];
            switch (e) {
                case 't': lit.value.push_back('\t'); break;
                case 'b': lit.value.push_back('\b'); break;
                case 'n': lit.value.push_back('\n'); break;
                case 'r': lit.value.push_back('\r'); break;
                case 'f': lit.value.push_back('\f'); break;
                case '"': lit.value.push_back('"'); break;
                case '\'': lit.value.push_back('\''); break;
                case '\\': lit.value.push_back('\\'); break;
                case 'u':
                case 'U': {
                    const auto cp = static_cast<char32_t>(hex_digits(e == 'u' ? 4 : 8));
                    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
                        fail("escape is not a Unicode scalar value");
                    utf8::append(lit.value, cp);
                    break;
                }
                default: fail("unknown escape sequence");
            }
        }
        if (peek() == '@') {
            ++pos_;
            const auto start = pos_;
            while (pos_ < s_.size() && is_ascii_alpha(s_[pos_])) ++pos_;
            if (pos_ == start) fail("empty language tag");
            while (peek() == '-') {
                const auto seg = ++pos_;
                while (pos_ < s_.size() && (is_ascii_alpha(s_[pos_]) || is_ascii_digit(s_[pos_])))
                    ++pos_;
                if (pos_ == seg) fail("empty language subtag");
            }
            lit.language = std::string(s_.substr(start, pos_ - start));
        } else if (peek() == '^') {
            fail("datatyped literals are not supported");
        }
        return lit;
    }

    std::string_view s_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

std::optional<Triple> parse_line(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!utf8::is_valid(line)) throw DecodingError(line_no, "invalid UTF-8");
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') return std::nullopt;
    return LineParser(line, line_no).parse();
}

void escape_literal(std::string& out, std::string_view v) {
    for (char c : v) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    static constexpr char hex[] = "0123456789ABCDEF";
                    out += "\\u00";
                    out.push_back(hex[(c >> 4) & 0xF]);
                    out.push_back(hex[c & 0xF]);
                } else {
                    out.push_back(c);
                }
        }
    }
}

// Disjoint-set over dense indices.
struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::map<Iri, Iri> resolve_aliases(const std::set<std::pair<Iri, Iri>>& same_as,
                                   std::vector<std::string>& warnings) {
    std::vector<Iri> nodes;
    for (const auto& [a, b] : same_as) {
        nodes.push_back(a);
        nodes.push_back(b);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    auto index_of = [&](const Iri& iri) {
        return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), iri) -
                                        nodes.begin());
    };

    UnionFind uf(nodes.size());
    std::vector<bool> has_out(nodes.size(), false);
    for (const auto& [a, b] : same_as) {
        uf.unite(index_of(a), index_of(b));
        has_out[index_of(a)] = true;
    }

    std::map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t i = 0; i < nodes.size(); ++i) components[uf.find(i)].push_back(i);

    std::map<Iri, Iri> aliases;
    for (const auto& [_, comp] : components) {
        std::vector<std::size_t> sinks;
        for (auto i : comp)
            if (!has_out[i]) sinks.push_back(i);
        // comp is ascending, so comp.front() is the lexicographically smallest.
        std::size_t canonical = comp.front();
        if (sinks.size() == 1) {
            canonical = sinks.front();
        } else {
            std::string msg = "ConflictingAlias: sameAs links among {";
            for (std::size_t k = 0; k < comp.size(); ++k) {
                if (k) msg += ", ";
                msg += nodes[comp[k]].str();
            }
            msg += "} have no unique target; using " + nodes[canonical].str();
            warnings.push_back(std::move(msg));
        }
        for (auto i : comp)
            if (i != canonical) aliases.emplace(nodes[i], nodes[canonical]);
    }
    return aliases;
}

// Per (iri, language) keep the smallest value; then prefer the configured
// language, then untagged, then the smallest language tag.
std::map<Iri, std::string> pick_literals(
    const std::map<Iri, std::map<std::string, std::string>>& by_lang, const std::string& preferred) {
    std::map<Iri, std::string> out;
    for (const auto& [iri, langs] : by_lang) {
        if (auto it = langs.find(preferred); it != langs.end()) {
            out.emplace(iri, it->second);
        } else if (auto untagged = langs.find(""); untagged != langs.end()) {
            out.emplace(iri, untagged->second);
        } else {
            out.emplace(iri, langs.begin()->second);
        }
    }
    return out;
}

void add_literal(std::map<Iri, std::map<std::string, std::string>>& by_lang, const Iri& iri,
                 const Literal& lit) {
    auto& slot = by_lang[iri];
    auto [it, inserted] = slot.emplace(lit.language, lit.value);
    if (!inserted && lit.value < it->second) it->second = lit.value;
}

}  // namespace

Iri Iri::parse(std::string_view text) {
    std::string_view v = text;
    if (v.size() >= 2 && v.front() == '<' && v.back() == '>') v = v.substr(1, v.size() - 2);
    if (v.empty()) throw ValidationError("empty IRI");
    if (!utf8::is_valid(v)) throw ValidationError("IRI is not valid UTF-8");
    for (char c : v)
        if (forbidden_iri_char(c)) throw ValidationError("invalid character in IRI: " + std::string(v));
    if (!has_scheme(v)) throw ValidationError("IRI is not absolute: " + std::string(v));
    return trusted(std::string(v));
}

std::string Iri::local_name() const {
    std::string_view v = value_;
    if (auto p = v.rfind("Category:"); p != std::string_view::npos) return std::string(v.substr(p + 9));
    if (auto p = v.find_last_of("/#"); p != std::string_view::npos && p + 1 < v.size())
        return std::string(v.substr(p + 1));
    return value_;
}

std::vector<Triple> parse_triples(std::istream& in) {
    std::vector<Triple> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto t = parse_line(line, line_no)) out.push_back(std::move(*t));
    }
    return out;
}

std::vector<Triple> parse_triples(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_triples(in);
}

std::string serialize_triples(const std::vector<Triple>& triples) {
    std::string out;
    for (const auto& t : triples) {
        out += '<' + t.subject.str() + "> <" + t.predicate.str() + "> ";
        if (const auto* lit = std::get_if<Literal>(&t.object)) {
            out += '"';
            escape_literal(out, lit->value);
            out += '"';
            if (!lit->language.empty()) out += '@' + lit->language;
        } else {
            out += '<' + std::get<Iri>(t.object).str() + '>';
        }
        out += " .\n";
    }
    return out;
}

Iri KnowledgeGraph::resolve(const Iri& iri) const {
    auto it = aliases.find(iri);
    return it == aliases.end() ? iri : it->second;
}

std::string KnowledgeGraph::display_label(const Iri& iri) const {
    if (auto it = labels.find(iri); it != labels.end()) return it->second;
    auto name = iri.local_name();
    std::replace(name.begin(), name.end(), '_', ' ');
    return name;
}

std::string KnowledgeGraph::description(const Iri& iri) const {
    auto it = descriptions.find(iri);
    return it == descriptions.end() ? std::string{} : it->second;
}

KnowledgeGraph build_graph(const std::vector<Triple>& triples, const GraphConfig& config) {
    KnowledgeGraph g;
    std::set<std::pair<Iri, Iri>> candidate_subjects;
    std::set<std::pair<Iri, Iri>> same_as;
    std::map<Iri, std::map<std::string, std::string>> labels;
    std::map<Iri, std::map<std::string, std::string>> comments;

    for (const auto& t : triples) {
        const auto& p = t.predicate.str();
        const Iri* obj = std::get_if<Iri>(&t.object);
        const Literal* lit = std::get_if<Literal>(&t.object);
        if (p == config.broader && obj) {
            g.broader_edges.emplace(t.subject, *obj);
        } else if (p == config.subject && obj) {
            candidate_subjects.emplace(t.subject, *obj);
        } else if (p == config.label && lit) {
            add_literal(labels, t.subject, *lit);
        } else if (p == config.comment && lit) {
            add_literal(comments, t.subject, *lit);
        } else if (p == config.same_as && obj && t.subject != *obj) {
            same_as.emplace(t.subject, *obj);
        }
    }

    for (const auto& [narrower, broader] : g.broader_edges) {
        g.categories.insert(narrower);
        g.categories.insert(broader);
    }
    for (const auto& [_, category] : candidate_subjects) g.categories.insert(category);

    std::set<Iri> demoted;
    for (const auto& edge : candidate_subjects) {
        if (g.categories.contains(edge.first)) {
            demoted.insert(edge.first);
            continue;
        }
        g.subject_edges.insert(edge);
        g.entities.insert(edge.first);
    }
    for (const auto& iri : demoted)
        g.warnings.push_back("category used as entity; subject edges dropped: " + iri.str());

    g.labels = pick_literals(labels, config.preferred_language);
    g.descriptions = pick_literals(comments, config.preferred_language);
    g.aliases = resolve_aliases(same_as, g.warnings);

    for (const auto& [narrower, broader] : g.broader_edges) g.narrower[broader].push_back(narrower);
    for (const auto& [entity, category] : g.subject_edges) g.members[category].push_back(entity);

    std::sort(g.warnings.begin(), g.warnings.end());
    return g;
}

bool CategoryTree::contains(const Iri& category) const {
    return std::any_of(nodes.begin(), nodes.end(),
                       [&](const TreeNode& n) { return n.category == category; });
}

CategoryTree narrower_categories(const KnowledgeGraph& graph, const Iri& root, int max_depth) {
    if (max_depth < 0) throw ValidationError("max_depth must be non-negative");
    Iri start = graph.is_category(root) ? root : graph.resolve(root);
    if (!graph.is_category(start)) throw UnknownCategory(root.str());

    CategoryTree tree;
    tree.root = start;
    std::set<Iri> visited{start};
    tree.nodes.push_back({start, 0, std::nullopt});
    // nodes doubles as the BFS queue
    for (std::size_t head = 0; head < tree.nodes.size(); ++head) {
        const TreeNode current = tree.nodes[head];
        if (current.depth >= max_depth) continue;
        auto it = graph.narrower.find(current.category);
        if (it == graph.narrower.end()) continue;
        for (const auto& child : it->second) {
            if (!visited.insert(child).second) continue;
            tree.nodes.push_back({child, current.depth + 1, current.category});
        }
    }
    return tree;
}

MemberMap member_entities(const KnowledgeGraph& graph, const CategoryTree& tree) {
    MemberMap out;
    for (const auto& node : tree.nodes) {
        auto& list = out[node.category];
        auto it = graph.members.find(node.category);
        if (it == graph.members.end()) continue;
        std::set<Iri> seen;
        for (const auto& e : it->second) {
            auto canonical = graph.resolve(e);
            if (seen.insert(canonical).second) list.push_back(std::move(canonical));
        }
    }
    return out;
}

std::vector<LabelMatch> label_search(const KnowledgeGraph& graph, std::string_view query,
                                     std::size_t k) {
    std::vector<LabelMatch> out;
    if (query.empty() || k == 0) return out;
    const auto q = utf8::decode(query);
    if (!q) return out;
    const auto needle = utf8::fold_case(*q);

    struct Ranked {
        std::size_t position;
        std::size_t length;
        LabelMatch match;
    };
    std::vector<Ranked> hits;
    for (const auto& category : graph.categories) {
        auto label = graph.display_label(category);
        const auto cps = utf8::decode(label);
        if (!cps) continue;
        const auto pos = utf8::fold_case(*cps).find(needle);
        if (pos == std::u32string::npos) continue;
        hits.push_back({pos, cps->size(), {category, std::move(label)}});
    }
    std::sort(hits.begin(), hits.end(), [](const Ranked& a, const Ranked& b) {
        return std::tie(a.position, a.length, a.match.iri) <
               std::tie(b.position, b.length, b.match.iri);
    });
    for (std::size_t i = 0; i < hits.size() && i < k; ++i) out.push_back(std::move(hits[i].match));
    return out;
}

}  // namespace periodscope
