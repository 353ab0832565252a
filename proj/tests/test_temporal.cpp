#include <algorithm>
#include <random>
#include <regex>

#include <catch_amalgamated.hpp>

#include "periodscope/error.hpp"
#include "periodscope/temporal.hpp"
#include "test_support.hpp"

using namespace periodscope;
using namespace periodscope::testing;

namespace {

using RC = RelevanceClass;

// ASCII-only reference extractor built on std::regex; deliberately shares no code
// with the scanner in the library.
TemporalProfile regex_profile(const std::string& s) {
    static const std::regex run("[0-9]+");
    struct Tok {
        int value;
        std::size_t begin, end;
    };
    std::vector<Tok> toks;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), run); it != std::sregex_iterator(); ++it) {
        const std::size_t b = it->position(0);
        const std::size_t e = b + it->length(0);
        const std::string digits = it->str(0);
        if (digits.size() < 3 || digits.size() > 4) continue;
        auto joiner = [](char c) { return std::string_view(".,/:").find(c) != std::string_view::npos; };
        auto digit = [](char c) { return c >= '0' && c <= '9'; };
        if (b >= 1 && std::isalpha(static_cast<unsigned char>(s[b - 1]))) continue;
        if (b >= 2 && joiner(s[b - 1]) && digit(s[b - 2])) continue;
        if (e + 1 < s.size() && joiner(s[e]) && digit(s[e + 1])) continue;
        const int v = std::stoi(digits);
        if (v < 100 || v > 2100) continue;
        toks.push_back({v, b, e});
    }
    static const std::regex gap(
        "^ ?(-|to) ?(([0-9]{1,2} )?(January|February|March|April|May|June|July|August|September|October|"
        "November|December) )?$");
    TemporalProfile p;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        p.years.push_back(toks[i].value);
        if (i + 1 < toks.size() && toks[i].value <= toks[i + 1].value &&
            std::regex_match(s.substr(toks[i].end, toks[i + 1].begin - toks[i].end), gap))
            p.intervals.push_back({toks[i].value, toks[i + 1].value});
    }
    std::sort(p.years.begin(), p.years.end());
    p.years.erase(std::unique(p.years.begin(), p.years.end()), p.years.end());
    std::sort(p.intervals.begin(), p.intervals.end());
    p.intervals.erase(std::unique(p.intervals.begin(), p.intervals.end()), p.intervals.end());
    return p;
}

// Hand rule, written with integer arithmetic instead of fractions.
RC reference_class(const TemporalProfile& p, const Period& period) {
    if (p.years.empty()) return RC::Undated;
    int yin = 0;
    for (int y : p.years) yin += (y >= period.start_year && y <= period.end_year);
    int iin = 0;
    for (const auto& iv : p.intervals) iin += !(iv.end < period.start_year || iv.start > period.end_year);
    const int ny = static_cast<int>(p.years.size());
    const int ni = static_cast<int>(p.intervals.size());
    if (2 * yin >= ny || (ni > 0 && 2 * iin >= ni)) return RC::InPeriod;
    if (yin > 0 || iin > 0) return RC::Borderline;
    return RC::OutOfPeriod;
}

CategoryTree single(const Iri& c) { return {c, {{c, 0, std::nullopt}}}; }

}  // namespace

TEST_CASE("extraction examples") {
    const auto terror = extract_temporal_profile("(5 September 1793 – 28 July 1794)");
    CHECK(terror.years == std::vector<int>{1793, 1794});
    CHECK(terror.intervals == std::vector<YearInterval>{{1793, 1794}});

    CHECK(extract_temporal_profile("no dates here").empty());
    CHECK(extract_temporal_profile("").empty());
    CHECK(extract_temporal_profile("ISBN 9781234").empty());

    const auto robespierre = extract_temporal_profile("born 1758, died 1794");
    CHECK(robespierre.years == std::vector<int>{1758, 1794});
    CHECK(robespierre.intervals.empty());
}

TEST_CASE("extraction edge cases") {
    CHECK(extract_temporal_profile("1789-1799").intervals == std::vector<YearInterval>{{1789, 1799}});
    CHECK(extract_temporal_profile("1789 to 1799").intervals == std::vector<YearInterval>{{1789, 1799}});
    CHECK(extract_temporal_profile("1789  -  1799").intervals.empty());  // two spaces
    CHECK(extract_temporal_profile("1799-1789").intervals.empty());      // reversed
    CHECK(extract_temporal_profile("1789 and 1799").intervals.empty());
    CHECK(extract_temporal_profile("6 May 1758 – 28 July 1794").intervals == std::vector<YearInterval>{{1758, 1794}});
    CHECK(extract_temporal_profile("1793 to March 1794").intervals == std::vector<YearInterval>{{1793, 1794}});
    CHECK(extract_temporal_profile("1793 – 28 1794").intervals.empty());     // day without month
    CHECK(extract_temporal_profile("1793 – 128 July 1794").intervals.size() == 0);
    CHECK(extract_temporal_profile("1793 – 28 Julyish 1794").intervals.empty());
    CHECK(extract_temporal_profile("page 12").empty());
    CHECK(extract_temporal_profile("in 2200 AD").empty());  // outside window
    CHECK(extract_temporal_profile("year 099").empty());    // value 99
    CHECK(extract_temporal_profile("year 100").years == std::vector<int>{100});
    CHECK(extract_temporal_profile("A380 airliner").empty());
    CHECK(extract_temporal_profile("1.793 million").empty());
    CHECK(extract_temporal_profile("12,1794").empty());
    CHECK(extract_temporal_profile("14/07/1789").empty());
    CHECK(extract_temporal_profile("In 1789, the").years == std::vector<int>{1789});
    CHECK(extract_temporal_profile("ended 1794.").years == std::vector<int>{1794});
    CHECK(extract_temporal_profile("1794 1794").years == std::vector<int>{1794});

    TemporalConfig narrow;
    narrow.min_year = 1700;
    narrow.max_year = 1800;
    CHECK(extract_temporal_profile("1650 1750 1850", narrow).years == std::vector<int>{1750});
}

TEST_CASE("extraction matches a regex reference on random ASCII strings") {
    std::mt19937 rng(7);
    const std::string alphabet = "0123456789017  -.,/:tox";
    for (int round = 0; round < 5000; ++round) {
        std::string s;
        const int n = static_cast<int>(rng() % 24);
        for (int i = 0; i < n; ++i) s += alphabet[rng() % alphabet.size()];
        INFO('"' << s << '"');
        REQUIRE(extract_temporal_profile(s) == regex_profile(s));
    }
}

TEST_CASE("extraction matches the regex reference on date-like phrases") {
    std::mt19937 rng(13);
    const std::vector<std::string> parts = {"1793", "1794", "1650", " ", "-", "to", "28", "July", "May", "x", ".", ","};
    for (int round = 0; round < 5000; ++round) {
        std::string s;
        const int n = static_cast<int>(rng() % 10);
        for (int i = 0; i < n; ++i) s += parts[rng() % parts.size()];
        INFO('"' << s << '"');
        REQUIRE(extract_temporal_profile(s) == regex_profile(s));
    }
}

TEST_CASE("every interval endpoint is also a year") {
    std::mt19937 rng(11);
    const std::vector<std::string> parts = {"1789", "1799", "-", " ", "to", "–", "1650", "x", ", "};
    for (int round = 0; round < 2000; ++round) {
        std::string s;
        for (int i = 0; i < 6; ++i) s += parts[rng() % parts.size()];
        const auto p = extract_temporal_profile(s);
        for (const auto& iv : p.intervals) {
            CHECK(iv.start <= iv.end);
            CHECK(std::binary_search(p.years.begin(), p.years.end(), iv.start));
            CHECK(std::binary_search(p.years.begin(), p.years.end(), iv.end));
        }
        for (int y : p.years) CHECK((y >= 100 && y <= 2100));
    }
}

TEST_CASE("appending whitespace-separated text never removes years") {
    std::mt19937 rng(5);
    const std::vector<std::string> parts = {"1789", "1793", "-", " ", "to", "born", "1.5", "A380", "12"};
    for (int round = 0; round < 2000; ++round) {
        std::string a, b;
        for (int i = 0; i < 5; ++i) a += parts[rng() % parts.size()];
        for (int i = 0; i < 5; ++i) b += parts[rng() % parts.size()];
        const auto before = extract_temporal_profile(a);
        const auto after = extract_temporal_profile(a + " " + b);
        INFO(a << " | " << b);
        CHECK(std::includes(after.years.begin(), after.years.end(), before.years.begin(), before.years.end()));
    }
}

TEST_CASE("classification examples") {
    const Period rev = revolution();
    CHECK(classify_entity({{1793, 1794}, {{1793, 1794}}}, rev) == RC::InPeriod);
    CHECK(classify_entity({}, rev) == RC::Undated);
    CHECK(classify_entity({{1914, 1918}, {}}, rev) == RC::OutOfPeriod);
    CHECK(classify_entity({{1700, 1750, 1795}, {}}, rev) == RC::Borderline);
    // An interval spanning the period counts even when no single year falls inside it.
    CHECK(classify_entity({{1700, 1850}, {{1700, 1850}}}, rev) == RC::InPeriod);
    CHECK(classify_entity({{1758, 1794}, {}}, rev) == RC::InPeriod);  // f_y = 1/2
}

TEST_CASE("classification thresholds come from the config") {
    TemporalConfig strict;
    strict.year_fraction_threshold = 0.75;
    strict.interval_fraction_threshold = 0.75;
    CHECK(classify_entity({{1758, 1794}, {}}, revolution(), strict) == RC::Borderline);
}

TEST_CASE("classification agrees with the hand rule and ignores element order") {
    std::mt19937 rng(3);
    for (int round = 0; round < 5000; ++round) {
        TemporalProfile p;
        const int ny = static_cast<int>(rng() % 6);
        for (int i = 0; i < ny; ++i) p.years.push_back(1700 + static_cast<int>(rng() % 200));
        const int ni = ny == 0 ? 0 : static_cast<int>(rng() % 4);
        for (int i = 0; i < ni; ++i) {
            const int a = p.years[rng() % p.years.size()];
            const int b = p.years[rng() % p.years.size()];
            p.intervals.push_back({std::min(a, b), std::max(a, b)});
        }
        const int start = 1700 + static_cast<int>(rng() % 200);
        const Period period{"p", start, start + static_cast<int>(rng() % 40)};
        const RC expected = reference_class(p, period);
        REQUIRE(classify_entity(p, period) == expected);
        std::shuffle(p.years.begin(), p.years.end(), rng);
        std::shuffle(p.intervals.begin(), p.intervals.end(), rng);
        REQUIRE(classify_entity(p, period) == expected);

        bool all_inside = ny > 0;
        for (int y : p.years) all_inside = all_inside && period.contains(y);
        if (all_inside) CHECK(classify_entity(p, period) == RC::InPeriod);
    }
}

TEST_CASE("period validation") {
    CHECK_NOTHROW(validate(Period{"x", 1800, 1800}));
    CHECK_THROWS_AS(validate(Period{"x", 1800, 1799}), ValidationError);
}

TEST_CASE("pruning examples") {
    const auto c = ex("C");
    const auto e1 = ex("e1"), e2 = ex("e2"), e3 = ex("e3");
    const MemberMap three{{c, {e1, e2, e3}}};
    CHECK(prune_categories(single(c), three,
                           {{e1, RC::OutOfPeriod}, {e2, RC::OutOfPeriod}, {e3, RC::InPeriod}})
              .at(c) == PruneState::Excluded);

    const MemberMap two{{c, {e1, e2}}};
    CHECK(prune_categories(single(c), two, {{e1, RC::OutOfPeriod}, {e2, RC::InPeriod}}).at(c) ==
          PruneState::Included);
    CHECK(prune_categories(single(c), two, {{e1, RC::Undated}, {e2, RC::Undated}}).at(c) ==
          PruneState::Included);
    CHECK(prune_categories(single(c), {}, {}).at(c) == PruneState::Included);

    // Borderline is dated but not out of period.
    CHECK(prune_categories(single(c), three,
                           {{e1, RC::OutOfPeriod}, {e2, RC::Borderline}, {e3, RC::Undated}})
              .at(c) == PruneState::Included);
    CHECK(prune_categories(single(c), three,
                           {{e1, RC::OutOfPeriod}, {e2, RC::OutOfPeriod}, {e3, RC::Borderline}})
              .at(c) == PruneState::Excluded);

    CHECK_THROWS_AS(prune_categories(single(c), two, {{e1, RC::InPeriod}}), std::invalid_argument);
}

TEST_CASE("pruning matches exhaustive counting on random trees") {
    std::mt19937 rng(17);
    const RC all[] = {RC::InPeriod, RC::OutOfPeriod, RC::Borderline, RC::Undated};
    for (int round = 0; round < 2000; ++round) {
        const int nc = 1 + static_cast<int>(rng() % 10);
        CategoryTree tree{ex("c/0"), {}};
        MemberMap members;
        std::map<Iri, RC> classes;
        for (int i = 0; i < nc; ++i) {
            const auto c = ex("c/" + std::to_string(i));
            tree.nodes.push_back({c, i == 0 ? 0 : 1, i == 0 ? std::nullopt : std::optional(tree.root)});
            const int ne = static_cast<int>(rng() % 11);
            for (int j = 0; j < ne; ++j) {
                const auto e = ex("e/" + std::to_string(rng() % 15));
                members[c].push_back(e);
                classes.emplace(e, all[rng() % 4]);
            }
        }
        const auto result = prune_categories(tree, members, classes);
        REQUIRE(result.size() == static_cast<std::size_t>(nc));
        for (const auto& [c, list] : members) {
            int out = 0, dated = 0;
            for (const auto& e : list) {
                if (classes.at(e) == RC::Undated) continue;
                ++dated;
                out += classes.at(e) == RC::OutOfPeriod;
            }
            const bool excluded = dated > 0 && out * 2 > dated;
            CHECK((result.at(c) == PruneState::Excluded) == excluded);
        }
    }
}

TEST_CASE("toy graph descriptions classify as expected") {
    const auto& g = toy_graph();
    auto cls = [&](const std::string& name) {
        return classify_entity(extract_temporal_profile(g.description(res(name))), revolution());
    };
    CHECK(cls("Reign_of_Terror") == RC::InPeriod);
    CHECK(cls("Maximilien_Robespierre") == RC::InPeriod);
    CHECK(cls("Bastille") == RC::Borderline);
    CHECK(cls("Drownings_at_Nantes") == RC::InPeriod);
}
