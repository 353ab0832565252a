#include "periodscope/sample_data.hpp"

#include <array>
#include <random>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "periodscope/kg_store.hpp"
#include "periodscope/utf8.hpp"

namespace periodscope::sample {

namespace {

Triple iri_triple(const std::string& s, std::string_view p, const std::string& o) {
    return {Iri::trusted(s), Iri::trusted(std::string(p)), Iri::trusted(o)};
}

Triple literal_triple(const std::string& s, std::string_view p, std::string value,
                      std::string lang = "en") {
    return {Iri::trusted(s), Iri::trusted(std::string(p)), Literal{std::move(value), std::move(lang)}};
}

// A template piece is plain text when `entity` is empty.
struct Piece {
    const char* text;
    const char* entity = "";
};

using Sentence = std::vector<Piece>;

const std::vector<Sentence>& sentence_templates() {
    static const std::vector<Sentence> templates = {
        {{"We must not forget the storming of the "}, {"Bastille", "Bastille"},
         {" when we speak of liberty."}},
        {{"Some members speak as if "}, {"Robespierre", "Maximilien_Robespierre"},
         {" were sitting in this chamber."}},
        {{"This is no "}, {"Reign of Terror", "Reign_of_Terror"},
         {", whatever the opposition claims."}},
        {{"The minister answered that the budget is balanced."}},
        {{"Like "}, {"Robespierre", "Maximilien_Robespierre"}, {" during the "},
         {"Terror", "Reign_of_Terror"}, {", the cabinet demands virtue from everyone."}},
        {{"In 1789 the crowd took the "}, {"Bastille", "Bastille"}, {"; today we merely take a vote."}},
        {{"The régime of the day is not on trial here."}},
        {{"The speaker thanked the chamber for its patience."}},
        {{"Déjà vu: "}, {"Robespierre", "Maximilien_Robespierre"}, {" again!"}},
        {{"Nobody in this house wants a new "}, {"Reign of Terror", "Reign_of_Terror"}, {"."}},
    };
    return templates;
}

constexpr std::array<const char*, 10> kDates = {
    "1948-03-11", "1949-10-04", "1950-06-21", "1951-01-30", "1952-11-18",
    "1953-05-07", "1954-09-14", "1955-02-22", "1956-12-03", "1957-04-16",
};

struct Speaker {
    const char* name;
    const char* party;  // empty: no party affiliation recorded
};

constexpr std::array<Speaker, 5> kSpeakers = {{
    {"Mr Jansen", "Labour"},
    {"Ms de Vries", "Liberal"},
    {"Mr Bakker", "Christian Democrat"},
    {"Ms Visser", "Socialist"},
    {"The President", ""},
}};

constexpr std::array<const char*, 2> kChambers = {"Lower House", "Upper House"};
constexpr std::array<double, 3> kConfidences = {0.95, 0.8, 0.65};

// Fisher-Yates with plain modulo draws; std::shuffle's algorithm is unspecified.
std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng() % i]);
    return p;
}

}  // namespace

std::string generate_toy_graph() {
    const auto fr = category("French_Revolution");
    const auto mont = category("Montagnards");
    const auto ffr = category("French_First_Republic");
    const auto terror = resource("Reign_of_Terror");
    const auto robespierre = resource("Maximilien_Robespierre");
    const auto bastille = resource("Bastille");
    const auto nantes = resource("Drownings_at_Nantes");

    std::vector<Triple> t = {
        iri_triple(mont, vocab::skos_broader, fr),
        iri_triple(ffr, vocab::skos_broader, fr),
        literal_triple(fr, vocab::rdfs_label, "French Revolution"),
        literal_triple(fr, vocab::rdfs_label, "Franse Revolutie", "nl"),
        literal_triple(mont, vocab::rdfs_label, "Montagnards"),
        literal_triple(ffr, vocab::rdfs_label, "French First Republic"),

        iri_triple(terror, vocab::dct_subject, ffr),
        iri_triple(robespierre, vocab::dct_subject, mont),
        iri_triple(robespierre, vocab::dct_subject, ffr),
        iri_triple(bastille, vocab::dct_subject, fr),
        iri_triple(nantes, vocab::dct_subject, ffr),

        literal_triple(terror, vocab::rdfs_label, "Reign of Terror"),
        literal_triple(robespierre, vocab::rdfs_label, "Maximilien Robespierre"),
        literal_triple(bastille, vocab::rdfs_label, "Bastille"),
        literal_triple(nantes, vocab::rdfs_label, "Drownings at Nantes"),
        literal_triple(terror, vocab::rdfs_comment,
                       "The Reign of Terror (5 September 1793 – 28 July 1794) was a period of "
                       "the French Revolution marked by mass executions."),
        literal_triple(robespierre, vocab::rdfs_comment,
                       "Maximilien Robespierre (6 May 1758 – 28 July 1794) was a French lawyer "
                       "and statesman, a leading member of the Montagnards."),
        literal_triple(bastille, vocab::rdfs_comment,
                       "The Bastille was a fortress in Paris, built between 1370 and 1383 and "
                       "stormed by a crowd on 14 July 1789."),
        literal_triple(nantes, vocab::rdfs_comment,
                       "The drownings at Nantes were a series of mass executions carried out "
                       "between November 1793 and February 1794."),

        iri_triple(resource("Robespierre"), vocab::owl_same_as, robespierre),
    };
    return "# Category network slice around dbc:French_Revolution\n" + serialize_triples(t);
}

std::string generate_toy_corpus(std::size_t n_docs, std::uint64_t seed) {
    if (n_docs == 0) throw std::invalid_argument("n_docs must be at least 1");
    std::mt19937_64 rng(seed);
    const auto date_order = permutation(kDates.size(), rng);
    const auto speaker_order = permutation(kSpeakers.size(), rng);
    const auto& templates = sentence_templates();

    std::string out;
    for (std::size_t i = 0; i < n_docs; ++i) {
        const auto& speaker = kSpeakers[speaker_order[i % kSpeakers.size()]];
        std::string text;
        std::size_t length = 0;  // code points
        auto links = nlohmann::ordered_json::array();

        const std::size_t n_sentences = 3 + rng() % 3;
        for (std::size_t s = 0; s < n_sentences; ++s) {
            if (s > 0) {
                text += ' ';
                ++length;
            }
            for (const auto& piece : templates[rng() % templates.size()]) {
                const auto n = utf8::decode(piece.text)->size();
                if (*piece.entity) {
                    links.push_back({{"start", length},
                                     {"end", length + n},
                                     {"iri", resource(piece.entity)},
                                     {"confidence", kConfidences[rng() % kConfidences.size()]},
                                     {"surface", piece.text}});
                }
                text += piece.text;
                length += n;
            }
        }

        nlohmann::ordered_json meta;
        meta["speaker"] = speaker.name;
        if (*speaker.party) meta["party"] = speaker.party;
        meta["chamber"] = kChambers[rng() % kChambers.size()];

        char id[32];
        std::snprintf(id, sizeof id, "doc-%04zu", i + 1);
        nlohmann::ordered_json doc;
        doc["doc_id"] = id;
        doc["date"] = kDates[date_order[i % kDates.size()]];
        doc["text"] = std::move(text);
        doc["meta"] = std::move(meta);
        doc["links"] = std::move(links);
        out += doc.dump() + "\n";
    }
    return out;
}

}  // namespace periodscope::sample
