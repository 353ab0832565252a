#include <random>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "periodscope/corpus_index.hpp"
#include "periodscope/error.hpp"
#include "periodscope/utf8.hpp"
#include "test_support.hpp"

using namespace periodscope;
using namespace periodscope::testing;

namespace {

const Iri robespierre = res("Maximilien_Robespierre");
const Iri terror = res("Reign_of_Terror");
const Iri bastille = res("Bastille");

DocumentRecord doc(std::string id, std::string date, std::string text, std::vector<EntityLink> links = {},
                   std::map<std::string, std::string> meta = {}) {
    return {std::move(id), CivilDate::parse(date), std::move(text), std::move(meta), std::move(links)};
}

std::vector<SentenceSpan> spans(const std::string& text) { return segment_sentences(*utf8::decode(text)); }

// Three short speeches; Robespierre is linked three times, Bastille never.
CorpusIndex three_doc_corpus() {
    CorpusIndex index;
    const std::string a = "Robespierre fell. The Terror ended.";
    const std::string b = "Robespierre spoke. Nothing else happened. Robespierre left.";
    const std::string c = "The Terror began in 1793.";
    index.ingest_document(doc("a", "1950-02-01", a, {link_for(a, "Robespierre", robespierre), link_for(a, "Terror", terror)},
                              {{"party", "A"}}));
    index.ingest_document(doc("b", "1950-05-01", b,
                              {link_for(b, "Robespierre", robespierre, 0), link_for(b, "Robespierre", robespierre, 1)},
                              {{"party", "B"}}));
    index.ingest_document(doc("c", "1951-01-01", c, {link_for(c, "Terror", terror)}, {{"party", "A"}}));
    return index;
}

}  // namespace

TEST_CASE("built-in segmentation splits on terminal punctuation before a capital or digit") {
    CHECK(spans("Robespierre fell. The Terror ended.") == std::vector<SentenceSpan>{{0, 17}, {18, 35}});
    CHECK(spans("Is it? Yes! 1793 came.") == std::vector<SentenceSpan>{{0, 6}, {7, 11}, {12, 22}});
    CHECK(spans("Mr. smith stayed. E.g. this") == std::vector<SentenceSpan>{{0, 17}, {18, 27}});
    CHECK(spans("End.Next") == std::vector<SentenceSpan>{{0, 8}});
    CHECK(spans("  padded.  \n Élan. ") == std::vector<SentenceSpan>{{2, 9}, {13, 18}});
    CHECK(spans("").empty());
    CHECK(spans("   ").empty());
}

TEST_CASE("a custom sentence regex replaces the built-in rule") {
    IndexOptions opts;
    opts.sentence_pattern = "(;) +";
    CorpusIndex index(opts);
    const std::string text = "één; twee;  drie";
    const auto& d = index.ingest_document(doc("x", "1950-01-01", text));
    CHECK(d.sentences == std::vector<SentenceSpan>{{0, 4}, {5, 10}, {12, 16}});

    opts.sentence_pattern = "(";
    CHECK_THROWS_AS(CorpusIndex(opts), ValidationError);
}

TEST_CASE("ingest assigns links to the sentence holding their start") {
    CorpusIndex index;
    const std::string text = "Robespierre fell. The Terror ended.";
    const auto& d = index.ingest_document(doc("d1", "1950-01-01", text, {{0, 11, robespierre, 1.0, "Robespierre"}}));
    REQUIRE(d.sentences.size() == 2);
    CHECK(d.link_sentence == std::vector<std::size_t>{0});
    CHECK(index.fetch_fragments({robespierre}, {}) == std::vector<Fragment>{{"d1", 0, 0, 0}});
}

TEST_CASE("a link crossing a sentence boundary stays with its first sentence") {
    CorpusIndex index;
    const std::string text = "One ends. Two starts.";
    const auto& d = index.ingest_document(doc("d", "1950-01-01", text, {{4, 13, terror, 1.0, "ends. Two"}}));
    CHECK(d.link_sentence == std::vector<std::size_t>{0});
}

TEST_CASE("a document with no links contributes no postings") {
    CorpusIndex index;
    index.ingest_document(doc("empty", "1950-01-01", "Nothing to see here."));
    CHECK(index.document_count() == 1);
    CHECK(index.entity_counts({robespierre}).at(robespierre) == 0);
}

TEST_CASE("whitespace-only text still gives a link a sentence") {
    CorpusIndex index;
    const auto& d = index.ingest_document(doc("ws", "1950-01-01", "   ", {{1, 2, terror, 1.0, " "}}));
    REQUIRE(d.sentences.size() == 1);
    CHECK(index.fetch_fragments({terror}, {}).size() == 1);
}

TEST_CASE("ingest rejects bad records without changing the index") {
    CorpusIndex index;
    index.ingest_document(doc("a", "1950-01-01", "Robespierre fell."));
    CHECK_THROWS_AS(index.ingest_document(doc("a", "1950-01-01", "again")), DuplicateDocId);

    try {
        index.ingest_document(doc("b", "1950-01-01", "short", {{0, 2, terror, 1.0, "sh"}, {3, 6, terror, 1.0, "rt?"}}));
        FAIL("expected OffsetOutOfBounds");
    } catch (const OffsetOutOfBounds& e) {
        CHECK(e.doc_id() == "b");
        CHECK(e.link_index() == 1);
    }
    CHECK_THROWS_AS(index.ingest_document(doc("b", "1950-01-01", "short", {{2, 2, terror, 1.0, ""}})), OffsetOutOfBounds);
    try {
        index.ingest_document(doc("b", "1950-01-01", "déjà vu", {{0, 4, terror, 1.0, "deja"}}));
        FAIL("expected SurfaceMismatch");
    } catch (const SurfaceMismatch& e) {
        CHECK(e.link_index() == 0);
    }
    CHECK_THROWS_AS(index.ingest_document(doc("b", "1950-01-01", "x", {{0, 1, terror, 1.5, "x"}})), ValidationError);
    CHECK(index.document_count() == 1);
    CHECK(index.find("b") == nullptr);
    CHECK(index.entity_counts({terror}).at(terror) == 0);
}

TEST_CASE("JSONL ingestion reports the failing line") {
    const std::string good =
        R"({"doc_id":"d1","date":"1950-01-02","text":"déjà Robespierre.","links":[{"start":5,"end":16,"iri":"http://dbpedia.org/resource/Maximilien_Robespierre","surface":"Robespierre"}]})";
    {
        CorpusIndex index;
        std::istringstream in(good + "\n\n" + R"({"doc_id":"d2","date":"1950-01-03","text":"x"})" + "\n");
        CHECK(index.ingest_jsonl(in) == 2);
        const auto* d1 = index.find("d1");
        REQUIRE(d1);
        CHECK(d1->links[0].confidence == 1.0);
        CHECK(d1->meta.empty());
    }
    const std::vector<std::string> bad = {
        "not json",
        R"({"doc_id":"d2","text":"x"})",
        R"({"doc_id":"d2","date":"1950-02-30","text":"x"})",
        R"({"doc_id":"d2","date":"1950-01-01","text":"x","meta":{"party":3}})",
        R"({"doc_id":"d2","date":"1950-01-01","text":"x","links":[{"start":0,"end":1,"surface":"x"}]})",
        R"({"doc_id":"d2","date":"1950-01-01","text":"x","links":[{"start":-1,"end":1,"iri":"http://ex/a","surface":"x"}]})",
    };
    for (const auto& line : bad) {
        INFO(line);
        CorpusIndex index;
        std::istringstream in(good + "\n" + line + "\n");
        try {
            index.ingest_jsonl(in);
            FAIL("expected CorpusFormatError");
        } catch (const CorpusFormatError& e) {
            CHECK(e.line_number() == 2);
        }
    }
}

TEST_CASE("entity counts include zeros and collapse duplicates") {
    const auto index = three_doc_corpus();
    CHECK(index.entity_counts({robespierre, bastille}) == std::map<Iri, std::size_t>{{robespierre, 3}, {bastille, 0}});
    CHECK(index.entity_counts({}).empty());
    CHECK(index.entity_counts({robespierre, robespierre}).size() == 1);
}

TEST_CASE("preview takes the earliest fragments of a single entity") {
    CorpusIndex index;
    const std::vector<std::string> dates = {"1952-01-01", "1950-01-01", "1951-01-01", "1950-01-01", "1953-01-01"};
    for (std::size_t i = 0; i < dates.size(); ++i) {
        const std::string text = "Terror " + std::to_string(i) + ".";
        index.ingest_document(doc("d" + std::to_string(i), dates[i], text, {link_for(text, "Terror", terror)}));
    }
    const auto snippets = index.preview({terror}, 2, 0);
    REQUIRE(snippets.size() == 2);
    CHECK(snippets[0].fragment.doc_id == "d1");
    CHECK(snippets[1].fragment.doc_id == "d3");
    CHECK(snippets[0].text == "Terror 1.");
    REQUIRE(snippets[0].highlights.size() == 1);
    CHECK(snippets[0].highlights[0].start == 0);
    CHECK(snippets[0].highlights[0].end == 6);
}

TEST_CASE("preview round-robins across entities, most mentioned first") {
    const auto index = three_doc_corpus();
    const auto snippets = index.preview({terror, robespierre}, 2, 0);
    REQUIRE(snippets.size() == 2);
    // Robespierre has 3 postings, Terror 2: Robespierre's first fragment leads.
    CHECK(snippets[0].fragment == Fragment{"a", 0, 0, 0});
    // Terror's earliest fragment is a/1.
    CHECK(snippets[1].fragment == Fragment{"a", 1, 0, 0});
    CHECK(index.preview({bastille}, 3, 0).empty());
    CHECK(index.preview({}, 3, 0).empty());
}

TEST_CASE("preview context widens the snippet and shifts highlights") {
    const auto index = three_doc_corpus();
    const auto snippets = index.preview({terror}, 1, 1);
    REQUIRE(snippets.size() == 1);
    CHECK(snippets[0].text == "Robespierre fell. The Terror ended.");
    CHECK(snippets[0].text_start == 0);
    CHECK(snippets[0].sentence == SentenceSpan{18, 35});
    REQUIRE(snippets[0].highlights.size() == 1);
    CHECK(snippets[0].highlights[0].start == 22);
}

TEST_CASE("fetch_fragments examples") {
    const auto index = three_doc_corpus();
    const auto hits = index.fetch_fragments({robespierre}, {});
    CHECK(hits == std::vector<Fragment>{{"a", 0, 0, 0}, {"b", 0, 0, 0}, {"b", 2, 0, 0}});
    CHECK(index.fetch_fragments({robespierre}, {robespierre}).empty());

    CorpusIndex one;
    const std::string text = "Robespierre and the Terror.";
    one.ingest_document(doc("x", "1950-01-01", text, {link_for(text, "Robespierre", robespierre), link_for(text, "Terror", terror)}));
    CHECK(one.fetch_fragments({robespierre, terror}, {}).size() == 1);
    CHECK(one.matching_entities({"x", 0, 0, 0}, {robespierre, terror}) == std::vector<Iri>{robespierre, terror});
}

TEST_CASE("timeline and facet counts are link-level") {
    const auto index = three_doc_corpus();
    CHECK(index.timeline_counts({robespierre, terror}) == std::map<int, std::size_t>{{1950, 4}, {1951, 1}});
    CHECK(index.timeline_counts({bastille}).empty());
    // party A: a/Robespierre, a/Terror, c/Terror
    CHECK(index.facet_counts({robespierre, terror}, "party") == std::map<std::string, std::size_t>{{"A", 3}, {"B", 2}});
    CHECK(index.facet_counts({robespierre}, "speaker") == std::map<std::string, std::size_t>{{"(none)", 3}});
    CHECK(index.facet_counts({bastille}, "speaker").empty());

    CorpusIndex one;
    const std::string text = "Robespierre, Robespierre!";
    one.ingest_document(doc("x", "1950-01-01", text, {link_for(text, "Robespierre", robespierre, 0), link_for(text, "Robespierre", robespierre, 1)}));
    CHECK(one.timeline_counts({robespierre}) == std::map<int, std::size_t>{{1950, 2}});
}

TEST_CASE("min_confidence keeps low-confidence links out of postings") {
    IndexOptions opts;
    opts.min_confidence = 0.9;
    CorpusIndex index(opts);
    const std::string text = "Robespierre and Robespierre.";
    auto weak = link_for(text, "Robespierre", robespierre, 1);
    weak.confidence = 0.5;
    index.ingest_document(doc("x", "1950-01-01", text, {link_for(text, "Robespierre", robespierre), weak}));
    CHECK(index.entity_counts({robespierre}).at(robespierre) == 1);
    CHECK(index.find("x")->links.size() == 2);
}

TEST_CASE("links are mapped through the resolver at ingest") {
    IndexOptions opts;
    opts.resolve = [](const Iri& iri) { return toy_graph().resolve(iri); };
    CorpusIndex index(opts);
    const std::string text = "Robespierre.";
    index.ingest_document(doc("x", "1950-01-01", text, {link_for(text, "Robespierre", res("Robespierre"))}));
    CHECK(index.entity_counts({robespierre}).at(robespierre) == 1);
}

TEST_CASE("render validates its fragment") {
    const auto index = three_doc_corpus();
    CHECK_THROWS_AS(index.render({"zzz", 0, 0, 0}, {}), UnknownDocument);
    CHECK_THROWS_AS(index.render({"a", 9, 0, 0}, {}), ValidationError);
}

TEST_CASE("toy corpus properties hold for random selections") {
    CorpusIndex index;
    std::istringstream in(sample::generate_toy_corpus(50, 7));
    REQUIRE(index.ingest_jsonl(in) == 50);
    CHECK(index.verify_offsets());

    const std::vector<Iri> pool = {robespierre, terror, bastille, res("Drownings_at_Nantes"), ex("unknown")};
    std::mt19937 rng(42);
    for (int round = 0; round < 200; ++round) {
        std::set<Iri> sel, excl;
        for (const auto& e : pool) {
            if (rng() % 2) sel.insert(e);
            if (rng() % 4 == 0) excl.insert(e);
        }
        std::set<Iri> effective;
        for (const auto& e : sel)
            if (!excl.contains(e)) effective.insert(e);

        std::size_t timeline = 0, facet = 0;
        for (const auto& [_, n] : index.timeline_counts(effective)) timeline += n;
        for (const auto& [_, n] : index.facet_counts(effective, "party")) facet += n;
        std::size_t brute = 0;
        for (const auto& d : index.documents())
            for (const auto& l : d.links) brute += effective.contains(l.entity);
        CHECK(timeline == brute);
        CHECK(facet == brute);
        CHECK(index.link_occurrences(effective) == brute);

        const auto fetched = index.fetch_fragments(sel, excl);
        CHECK(fetched == index.fetch_fragments(sel, excl));
        for (const auto& f : fetched) CHECK_FALSE(index.matching_entities(f, effective).empty());

        const std::vector<Iri> list(effective.begin(), effective.end());
        for (const auto& s : index.preview(list, 1 + rng() % 8, rng() % 2)) {
            Fragment plain = s.fragment;
            plain.context_before = plain.context_after = 0;
            CHECK(std::find(fetched.begin(), fetched.end(), plain) != fetched.end());
        }
    }
}
