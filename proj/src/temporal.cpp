#include "periodscope/temporal.hpp"

#include <algorithm>
#include <stdexcept>

#include "periodscope/error.hpp"
#include "periodscope/utf8.hpp"

namespace periodscope {

namespace {

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_letter(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }
bool is_joiner(char32_t c) { return c == U'.' || c == U',' || c == U'/' || c == U':'; }

struct YearToken {
    int value;
    std::size_t begin;
    std::size_t end;
};

bool is_month(std::u32string_view w) {
    static const std::u32string_view names[] = {
        U"January", U"February", U"March",     U"April",   U"May",      U"June",
        U"July",    U"August",   U"September", U"October", U"November", U"December"};
    return std::find(std::begin(names), std::end(names), w) != std::end(names);
}

// Matches: [' '] ('-' | U+2013 | "to") [' '] [[day ' '] month ' ']
// The optional tail lets "1793 – 28 July 1794" read as a range of years.
bool is_range_gap(std::u32string_view gap) {
    if (!gap.empty() && gap.front() == U' ') gap.remove_prefix(1);
    if (gap.starts_with(U"-") || gap.starts_with(U"–")) {
        gap.remove_prefix(1);
    } else if (gap.starts_with(U"to")) {
        gap.remove_prefix(2);
    } else {
        return false;
    }
    if (!gap.empty() && gap.front() == U' ') gap.remove_prefix(1);
    if (gap.empty()) return true;

    if (gap.back() != U' ') return false;
    gap.remove_suffix(1);
    std::size_t d = 0;
    while (d < gap.size() && is_digit(gap[d])) ++d;
    if (d > 0) {
        if (d > 2 || d >= gap.size() || gap[d] != U' ') return false;
        gap.remove_prefix(d + 1);
    }
    return is_month(gap);
}

}  // namespace

void validate(const Period& period) {
    if (period.start_year > period.end_year)
        throw ValidationError("period start_year " + std::to_string(period.start_year) +
                              " is after end_year " + std::to_string(period.end_year));
}

std::string_view to_string(RelevanceClass c) {
    switch (c) {
        case RelevanceClass::InPeriod: return "InPeriod";
        case RelevanceClass::OutOfPeriod: return "OutOfPeriod";
        case RelevanceClass::Borderline: return "Borderline";
        case RelevanceClass::Undated: return "Undated";
    }
    return "Undated";
}

std::string_view to_string(PruneState s) {
    return s == PruneState::Included ? "included" : "excluded";
}

TemporalProfile extract_temporal_profile(std::string_view text, const TemporalConfig& config) {
    std::u32string cps;
    if (auto decoded = utf8::decode(text)) {
        cps = std::move(*decoded);
    } else {
        cps.assign(text.begin(), text.end());
    }

    std::vector<YearToken> tokens;
    const std::size_t n = cps.size();
    for (std::size_t i = 0; i < n;) {
        if (!is_digit(cps[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_digit(cps[j])) ++j;
        const std::size_t len = j - i;
        const bool glued_before =
            i >= 1 && (is_letter(cps[i - 1]) ||
                       (i >= 2 && is_joiner(cps[i - 1]) && is_digit(cps[i - 2])));
        const bool glued_after = j + 1 < n && is_joiner(cps[j]) && is_digit(cps[j + 1]);
        if ((len == 3 || len == 4) && !glued_before && !glued_after) {
            int value = 0;
            for (std::size_t k = i; k < j; ++k) value = value * 10 + static_cast<int>(cps[k] - U'0');
            if (value >= config.min_year && value <= config.max_year) tokens.push_back({value, i, j});
        }
        i = j;
    }

    TemporalProfile profile;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        profile.years.push_back(tokens[t].value);
        if (t + 1 < tokens.size()) {
            const auto& a = tokens[t];
            const auto& b = tokens[t + 1];
            const std::u32string_view gap(cps.data() + a.end, b.begin - a.end);
            if (a.value <= b.value && is_range_gap(gap)) profile.intervals.push_back({a.value, b.value});
        }
    }
    std::sort(profile.years.begin(), profile.years.end());
    profile.years.erase(std::unique(profile.years.begin(), profile.years.end()), profile.years.end());
    std::sort(profile.intervals.begin(), profile.intervals.end());
    profile.intervals.erase(std::unique(profile.intervals.begin(), profile.intervals.end()),
                            profile.intervals.end());
    return profile;
}

RelevanceClass classify_entity(const TemporalProfile& profile, const Period& period,
                               const TemporalConfig& config) {
    if (profile.years.empty()) return RelevanceClass::Undated;

    const auto years_in = std::count_if(profile.years.begin(), profile.years.end(),
                                        [&](int y) { return period.contains(y); });
    const auto intervals_in =
        std::count_if(profile.intervals.begin(), profile.intervals.end(), [&](const YearInterval& iv) {
            return iv.overlaps(period.start_year, period.end_year);
        });
    const double year_fraction =
        static_cast<double>(years_in) / static_cast<double>(profile.years.size());
    const double interval_fraction =
        profile.intervals.empty()
            ? 0.0
            : static_cast<double>(intervals_in) / static_cast<double>(profile.intervals.size());

    if (year_fraction >= config.year_fraction_threshold ||
        interval_fraction >= config.interval_fraction_threshold)
        return RelevanceClass::InPeriod;
    if (years_in > 0 || intervals_in > 0) return RelevanceClass::Borderline;
    return RelevanceClass::OutOfPeriod;
}

std::map<Iri, PruneState> prune_categories(const CategoryTree& tree, const MemberMap& members,
                                           const std::map<Iri, RelevanceClass>& classes) {
    std::map<Iri, PruneState> out;
    for (const auto& node : tree.nodes) {
        std::size_t dated = 0;
        std::size_t out_of_period = 0;
        if (auto it = members.find(node.category); it != members.end()) {
            for (const auto& entity : it->second) {
                auto cls = classes.find(entity);
                if (cls == classes.end())
                    throw std::invalid_argument("no relevance class for member " + entity.str());
                if (cls->second == RelevanceClass::Undated) continue;
                ++dated;
                if (cls->second == RelevanceClass::OutOfPeriod) ++out_of_period;
            }
        }
        out[node.category] = 2 * out_of_period > dated ? PruneState::Excluded : PruneState::Included;
    }
    return out;
}

}  // namespace periodscope
