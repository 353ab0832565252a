#include "periodscope/corpus_index.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <regex>
#include <tuple>

#include <nlohmann/json.hpp>

#include "periodscope/error.hpp"
#include "periodscope/utf8.hpp"

namespace periodscope {

namespace {

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v' ||
           c == 0xA0;
}

bool is_upper(char32_t c) { return utf8::fold_case(c) != c; }

void push_trimmed(std::vector<SentenceSpan>& out, std::u32string_view cps, std::size_t start,
                  std::size_t end) {
    while (start < end && is_space(cps[start])) ++start;
    while (end > start && is_space(cps[end - 1])) --end;
    if (start < end) out.push_back({start, end});
}

int parse_int(std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return -1;
    return v;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

DocumentRecord record_from_json(const nlohmann::json& j) {
    auto fail = [](const std::string& what) -> void { throw ValidationError(what); };
    if (!j.is_object()) fail("document must be a JSON object");
    for (const char* key : {"doc_id", "date", "text"})
        if (!j.contains(key) || !j[key].is_string()) fail(std::string("missing string field '") + key + "'");

    DocumentRecord rec;
    rec.doc_id = j["doc_id"].get<std::string>();
    rec.date = CivilDate::parse(j["date"].get<std::string>());
    rec.text = j["text"].get<std::string>();
    if (j.contains("meta")) {
        if (!j["meta"].is_object()) fail("'meta' must be an object");
        for (const auto& [k, v] : j["meta"].items()) {
            if (!v.is_string()) fail("meta value for '" + k + "' must be a string");
            rec.meta.emplace(k, v.get<std::string>());
        }
    }
    if (j.contains("links")) {
        if (!j["links"].is_array()) fail("'links' must be an array");
        for (const auto& l : j["links"]) {
            if (!l.is_object()) fail("link must be an object");
            if (!l.contains("start") || !l["start"].is_number_integer() || !l.contains("end") ||
                !l["end"].is_number_integer())
                fail("link requires integer 'start' and 'end'");
            if (!l.contains("iri") || !l["iri"].is_string()) fail("link requires string 'iri'");
            if (!l.contains("surface") || !l["surface"].is_string()) fail("link requires string 'surface'");
            const auto start = l["start"].get<long long>();
            const auto end = l["end"].get<long long>();
            if (start < 0 || end < 0) fail("link offsets must be non-negative");
            EntityLink link;
            link.start = static_cast<std::size_t>(start);
            link.end = static_cast<std::size_t>(end);
            link.entity = Iri::parse(l["iri"].get<std::string>());
            link.surface = l["surface"].get<std::string>();
            if (l.contains("confidence")) {
                if (!l["confidence"].is_number()) fail("'confidence' must be a number");
                link.confidence = l["confidence"].get<double>();
            }
            rec.links.push_back(std::move(link));
        }
    }
    return rec;
}

}  // namespace

CivilDate CivilDate::parse(std::string_view text) {
    auto bad = [&] { return ValidationError("invalid date (expected YYYY-MM-DD): " + std::string(text)); };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
    CivilDate d{parse_int(text.substr(0, 4)), parse_int(text.substr(5, 2)), parse_int(text.substr(8, 2))};
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (d.year < 0 || d.month < 1 || d.month > 12 || d.day < 1) throw bad();
    const int max_day = days[d.month - 1] + (d.month == 2 && is_leap(d.year) ? 1 : 0);
    if (d.day > max_day) throw bad();
    return d;
}

std::string CivilDate::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

std::string Document::slice(std::size_t start, std::size_t end) const {
    return text.substr(cp_offsets_[start], cp_offsets_[end] - cp_offsets_[start]);
}

std::vector<SentenceSpan> segment_sentences(std::u32string_view cps) {
    std::vector<SentenceSpan> out;
    const std::size_t n = cps.size();
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const char32_t c = cps[i];
        if (c != U'.' && c != U'!' && c != U'?') continue;
        std::size_t j = i + 1;
        while (j < n && is_space(cps[j])) ++j;
        if (j == i + 1 || j >= n) continue;
        const char32_t next = cps[j];
        if (!is_upper(next) && !(next >= U'0' && next <= U'9')) continue;
        push_trimmed(out, cps, start, i + 1);
        start = j;
        i = j - 1;
    }
    push_trimmed(out, cps, start, n);
    return out;
}

CorpusIndex::CorpusIndex(IndexOptions options) : options_(std::move(options)) {
    if (!options_.sentence_pattern.empty()) {
        try {
            std::regex probe(options_.sentence_pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            throw ValidationError("invalid sentence pattern: " + std::string(e.what()));
        }
    }
}

std::vector<SentenceSpan> CorpusIndex::split(const std::string& text, const std::u32string& cps,
                                             const std::vector<std::size_t>& offsets) const {
    if (options_.sentence_pattern.empty()) return segment_sentences(cps);

    auto to_cp = [&](std::size_t byte) {
        return static_cast<std::size_t>(std::lower_bound(offsets.begin(), offsets.end(), byte) -
                                        offsets.begin());
    };
    const std::regex re(options_.sentence_pattern, std::regex::ECMAScript);
    std::vector<SentenceSpan> out;
    std::size_t start = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator();
         ++it) {
        const auto& m = *it;
        if (m.length(0) == 0) continue;
        const auto end_byte = (m.size() > 1 && m[1].matched)
                                  ? static_cast<std::size_t>(m.position(1) + m.length(1))
                                  : static_cast<std::size_t>(m.position(0));
        push_trimmed(out, cps, start, to_cp(end_byte));
        start = to_cp(static_cast<std::size_t>(m.position(0) + m.length(0)));
    }
    push_trimmed(out, cps, start, cps.size());
    return out;
}

const Document& CorpusIndex::ingest_document(DocumentRecord record) {
    if (record.doc_id.empty()) throw ValidationError("empty doc_id");
    if (by_id_.contains(record.doc_id)) throw DuplicateDocId(record.doc_id);
    auto cps = utf8::decode(record.text);
    if (!cps) throw ValidationError("text of " + record.doc_id + " is not valid UTF-8");

    Document doc;
    doc.cp_offsets_ = utf8::code_point_offsets(record.text);
    doc.doc_id = std::move(record.doc_id);
    doc.date = record.date;
    doc.text = std::move(record.text);
    doc.meta = std::move(record.meta);

    const std::size_t len = cps->size();
    for (std::size_t i = 0; i < record.links.size(); ++i) {
        auto& link = record.links[i];
        if (!(link.start < link.end && link.end <= len)) throw OffsetOutOfBounds(doc.doc_id, i);
        if (doc.slice(link.start, link.end) != link.surface) throw SurfaceMismatch(doc.doc_id, i);
        if (!(link.confidence >= 0.0 && link.confidence <= 1.0))
            throw ValidationError("confidence of link " + std::to_string(i) + " of " + doc.doc_id +
                                  " is outside [0,1]");
        if (options_.resolve) link.entity = options_.resolve(link.entity);
    }
    doc.links = std::move(record.links);
    doc.sentences = split(doc.text, *cps, doc.cp_offsets_);
    // Whitespace-only text yields no sentences; links still need a home.
    if (doc.sentences.empty() && !doc.links.empty()) doc.sentences.push_back({0, len});

    for (const auto& link : doc.links) {
        // last sentence starting at or before the link; sentence 0 for leading whitespace
        auto it = std::upper_bound(doc.sentences.begin(), doc.sentences.end(), link.start,
                                   [](std::size_t pos, const SentenceSpan& s) { return pos < s.start; });
        doc.link_sentence.push_back(
            it == doc.sentences.begin() ? 0 : static_cast<std::size_t>(it - doc.sentences.begin() - 1));
    }

    const std::size_t doc_index = docs_.size();
    for (std::size_t i = 0; i < doc.links.size(); ++i) {
        if (doc.links[i].confidence < options_.min_confidence) continue;
        postings_[doc.links[i].entity].push_back({doc_index, doc.link_sentence[i], i});
    }
    by_id_.emplace(doc.doc_id, doc_index);
    docs_.push_back(std::move(doc));
    return docs_.back();
}

std::size_t CorpusIndex::ingest_jsonl(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        DocumentRecord rec;
        try {
            rec = record_from_json(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw CorpusFormatError(line_no, e.what());
        } catch (const ValidationError& e) {
            throw CorpusFormatError(line_no, e.what());
        }
        ingest_document(std::move(rec));
        ++count;
    }
    return count;
}

const Document* CorpusIndex::find(std::string_view doc_id) const {
    auto it = by_id_.find(std::string(doc_id));
    return it == by_id_.end() ? nullptr : &docs_[it->second];
}

bool CorpusIndex::fragment_less(const Posting& a, const Posting& b) const {
    const auto& da = docs_[a.doc];
    const auto& db = docs_[b.doc];
    return std::tie(da.date, da.doc_id, a.sentence) < std::tie(db.date, db.doc_id, b.sentence);
}

std::vector<CorpusIndex::Posting> CorpusIndex::sorted_fragments(const Iri& entity) const {
    std::vector<Posting> out;
    auto it = postings_.find(entity);
    if (it == postings_.end()) return out;
    out = it->second;
    std::sort(out.begin(), out.end(), [this](const Posting& a, const Posting& b) { return fragment_less(a, b); });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Posting& a, const Posting& b) {
                              return a.doc == b.doc && a.sentence == b.sentence;
                          }),
              out.end());
    return out;
}

std::map<Iri, std::size_t> CorpusIndex::entity_counts(const std::vector<Iri>& entities) const {
    std::map<Iri, std::size_t> out;
    for (const auto& e : entities) {
        auto it = postings_.find(e);
        out[e] = it == postings_.end() ? 0 : it->second.size();
    }
    return out;
}

std::vector<Snippet> CorpusIndex::preview(const std::vector<Iri>& entities, std::size_t k,
                                          std::size_t context) const {
    const std::set<Iri> unique(entities.begin(), entities.end());
    std::vector<std::pair<std::size_t, Iri>> ranked;
    for (const auto& e : unique) {
        auto it = postings_.find(e);
        if (it != postings_.end() && !it->second.empty()) ranked.emplace_back(it->second.size(), e);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });

    std::vector<std::vector<Posting>> queues;
    for (const auto& [_, e] : ranked) queues.push_back(sorted_fragments(e));
    std::vector<std::size_t> cursor(queues.size(), 0);

    std::set<std::pair<std::size_t, std::size_t>> taken;
    std::vector<Snippet> out;
    bool progressed = true;
    while (out.size() < k && progressed) {
        progressed = false;
        for (std::size_t q = 0; q < queues.size() && out.size() < k; ++q) {
            auto& pos = cursor[q];
            while (pos < queues[q].size() &&
                   taken.contains({queues[q][pos].doc, queues[q][pos].sentence}))
                ++pos;
            if (pos == queues[q].size()) continue;
            const auto& p = queues[q][pos++];
            taken.insert({p.doc, p.sentence});
            out.push_back(render({docs_[p.doc].doc_id, p.sentence, context, context}, unique));
            progressed = true;
        }
    }
    return out;
}

std::vector<Fragment> CorpusIndex::fetch_fragments(const std::set<Iri>& entities,
                                                   const std::set<Iri>& excluded,
                                                   std::size_t context) const {
    std::vector<Posting> hits;
    for (const auto& e : entities) {
        if (excluded.contains(e)) continue;
        if (auto it = postings_.find(e); it != postings_.end())
            hits.insert(hits.end(), it->second.begin(), it->second.end());
    }
    std::sort(hits.begin(), hits.end(), [this](const Posting& a, const Posting& b) { return fragment_less(a, b); });
    hits.erase(std::unique(hits.begin(), hits.end(),
                           [](const Posting& a, const Posting& b) {
                               return a.doc == b.doc && a.sentence == b.sentence;
                           }),
               hits.end());
    std::vector<Fragment> out;
    out.reserve(hits.size());
    for (const auto& p : hits) out.push_back({docs_[p.doc].doc_id, p.sentence, context, context});
    return out;
}

std::map<int, std::size_t> CorpusIndex::timeline_counts(const std::set<Iri>& entities) const {
    std::map<int, std::size_t> out;
    for (const auto& e : entities)
        if (auto it = postings_.find(e); it != postings_.end())
            for (const auto& p : it->second) ++out[docs_[p.doc].date.year];
    return out;
}

std::map<std::string, std::size_t> CorpusIndex::facet_counts(const std::set<Iri>& entities,
                                                             const std::string& meta_key) const {
    std::map<std::string, std::size_t> out;
    for (const auto& e : entities) {
        auto it = postings_.find(e);
        if (it == postings_.end()) continue;
        for (const auto& p : it->second) {
            const auto& meta = docs_[p.doc].meta;
            auto m = meta.find(meta_key);
            ++out[m == meta.end() ? std::string(kMissingFacet) : m->second];
        }
    }
    return out;
}

std::size_t CorpusIndex::link_occurrences(const std::set<Iri>& entities) const {
    std::size_t total = 0;
    for (const auto& e : entities)
        if (auto it = postings_.find(e); it != postings_.end()) total += it->second.size();
    return total;
}

std::vector<Iri> CorpusIndex::matching_entities(const Fragment& fragment,
                                                const std::set<Iri>& selection) const {
    const Document* doc = find(fragment.doc_id);
    if (!doc) throw UnknownDocument(fragment.doc_id);
    std::set<Iri> out;
    for (std::size_t i = 0; i < doc->links.size(); ++i) {
        const auto& link = doc->links[i];
        if (doc->link_sentence[i] == fragment.sentence_index &&
            link.confidence >= options_.min_confidence && selection.contains(link.entity))
            out.insert(link.entity);
    }
    return {out.begin(), out.end()};
}

Snippet CorpusIndex::render(const Fragment& fragment, const std::set<Iri>& highlight) const {
    const Document* doc = find(fragment.doc_id);
    if (!doc) throw UnknownDocument(fragment.doc_id);
    const auto& sents = doc->sentences;
    if (fragment.sentence_index >= sents.size())
        throw ValidationError("sentence_index " + std::to_string(fragment.sentence_index) +
                              " out of range for " + fragment.doc_id);

    const std::size_t first =
        fragment.sentence_index - std::min(fragment.context_before, fragment.sentence_index);
    const std::size_t last =
        std::min(sents.size() - 1, fragment.sentence_index + fragment.context_after);

    Snippet s;
    s.fragment = fragment;
    s.sentence = sents[fragment.sentence_index];
    s.text_start = sents[first].start;
    s.text = doc->slice(sents[first].start, sents[last].end);
    for (std::size_t i = 0; i < doc->links.size(); ++i) {
        const auto& link = doc->links[i];
        if (doc->link_sentence[i] != fragment.sentence_index) continue;
        if (link.confidence < options_.min_confidence || !highlight.contains(link.entity)) continue;
        const auto end = std::min(link.end, sents[last].end);
        if (link.start < s.text_start || end <= link.start) continue;
        s.highlights.push_back({link.start - s.text_start, end - s.text_start, link.entity});
    }
    return s;
}

bool CorpusIndex::verify_offsets() const {
    for (const auto& doc : docs_)
        for (const auto& link : doc.links)
            if (link.end > doc.length() || doc.slice(link.start, link.end) != link.surface) return false;
    return true;
}

}  // namespace periodscope
