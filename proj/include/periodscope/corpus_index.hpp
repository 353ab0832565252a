#pragma once

// Sentence-granular index over entity-link-annotated documents.
//
// All offsets are Unicode code points. Ingestion is a single-writer phase;
// once loading is done the index is only read, so const member functions are
// safe to call concurrently.

#include <compare>
#include <cstddef>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "periodscope/kg_store.hpp"

namespace periodscope {

struct CivilDate {
    int year = 0;
    int month = 1;
    int day = 1;

    // Strict "YYYY-MM-DD"; throws ValidationError.
    static CivilDate parse(std::string_view text);
    std::string str() const;

    friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

struct SentenceSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    friend bool operator==(const SentenceSpan&, const SentenceSpan&) = default;
};

struct EntityLink {
    std::size_t start = 0;
    std::size_t end = 0;
    Iri entity;
    double confidence = 1.0;
    std::string surface;
};

// Input form of a document, as read from the corpus file.
struct DocumentRecord {
    std::string doc_id;
    CivilDate date;
    std::string text;
    std::map<std::string, std::string> meta;
    std::vector<EntityLink> links;
};

struct Document {
    std::string doc_id;
    CivilDate date;
    std::string text;
    std::map<std::string, std::string> meta;
    std::vector<EntityLink> links;
    std::vector<SentenceSpan> sentences;
    std::vector<std::size_t> link_sentence;  // parallel to links

    std::size_t length() const { return cp_offsets_.size() - 1; }
    std::string slice(std::size_t start, std::size_t end) const;

private:
    friend class CorpusIndex;
    std::vector<std::size_t> cp_offsets_;
};

struct Fragment {
    std::string doc_id;
    std::size_t sentence_index = 0;
    std::size_t context_before = 0;
    std::size_t context_after = 0;

    friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct Highlight {
    std::size_t start = 0;  // relative to Snippet::text
    std::size_t end = 0;
    Iri entity;
};

struct Snippet {
    Fragment fragment;
    std::size_t text_start = 0;  // absolute offset of text in the document
    SentenceSpan sentence;       // absolute span of the matched sentence
    std::string text;
    std::vector<Highlight> highlights;
};

// Splits after '.', '!' or '?' followed by whitespace and an uppercase letter
// or digit.
std::vector<SentenceSpan> segment_sentences(std::u32string_view text);

struct IndexOptions {
    // ECMAScript regex matching the gap between sentences, applied to UTF-8.
    // Capture group 1, when present, ends the previous sentence; the next
    // sentence starts at the end of the match. Empty selects the built-in rule.
    std::string sentence_pattern;
    double min_confidence = 0.0;
    // Maps link IRIs onto canonical IRIs (e.g. KnowledgeGraph::resolve).
    std::function<Iri(const Iri&)> resolve;
};

class CorpusIndex {
public:
    explicit CorpusIndex(IndexOptions options = {});

    // Validates the whole record before touching the index. Throws
    // DuplicateDocId, OffsetOutOfBounds, SurfaceMismatch, ValidationError.
    const Document& ingest_document(DocumentRecord record);

    // One JSON document per line; throws CorpusFormatError with the line
    // number for schema problems, and the ingest errors above otherwise.
    std::size_t ingest_jsonl(std::istream& in);

    std::size_t document_count() const { return docs_.size(); }
    const std::vector<Document>& documents() const { return docs_; }
    const Document* find(std::string_view doc_id) const;

    std::map<Iri, std::size_t> entity_counts(const std::vector<Iri>& entities) const;

    std::vector<Snippet> preview(const std::vector<Iri>& entities, std::size_t k,
                                 std::size_t context) const;

    std::vector<Fragment> fetch_fragments(const std::set<Iri>& entities,
                                          const std::set<Iri>& excluded,
                                          std::size_t context = 0) const;

    std::map<int, std::size_t> timeline_counts(const std::set<Iri>& entities) const;

    std::map<std::string, std::size_t> facet_counts(const std::set<Iri>& entities,
                                                    const std::string& meta_key) const;

    // Total indexed link occurrences for the given entities.
    std::size_t link_occurrences(const std::set<Iri>& entities) const;

    // Indexed entities linked from the fragment's sentence that are in `selection`.
    std::vector<Iri> matching_entities(const Fragment& fragment, const std::set<Iri>& selection) const;

    // Throws UnknownDocument or ValidationError for a bad sentence index.
    Snippet render(const Fragment& fragment, const std::set<Iri>& highlight) const;

    // Re-checks surface == text[start:end] for every stored link.
    bool verify_offsets() const;

    static constexpr std::string_view kMissingFacet = "(none)";

private:
    struct Posting {
        std::size_t doc;
        std::size_t sentence;
        std::size_t link;
    };

    bool fragment_less(const Posting& a, const Posting& b) const;
    std::vector<Posting> sorted_fragments(const Iri& entity) const;
    std::vector<SentenceSpan> split(const std::string& text, const std::u32string& cps,
                                    const std::vector<std::size_t>& offsets) const;

    IndexOptions options_;
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::map<Iri, std::vector<Posting>> postings_;
};

}  // namespace periodscope
