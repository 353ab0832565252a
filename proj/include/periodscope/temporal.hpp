#pragma once

// Coarse dating of entities from the years mentioned in their descriptions,
// and classification of entities and categories against a target period.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "periodscope/kg_store.hpp"

namespace periodscope {

struct YearInterval {
    int start = 0;
    int end = 0;

    bool overlaps(int lo, int hi) const { return start <= hi && end >= lo; }
    friend auto operator<=>(const YearInterval&, const YearInterval&) = default;
};

struct TemporalProfile {
    std::vector<int> years;              // sorted, unique
    std::vector<YearInterval> intervals;  // sorted, unique, start <= end

    bool empty() const { return years.empty(); }
    friend bool operator==(const TemporalProfile&, const TemporalProfile&) = default;
};

struct Period {
    std::string label;
    int start_year = 0;
    int end_year = 0;  // inclusive

    bool contains(int year) const { return year >= start_year && year <= end_year; }
    friend bool operator==(const Period&, const Period&) = default;
};

// Throws ValidationError when start_year > end_year.
void validate(const Period& period);

enum class RelevanceClass { InPeriod, OutOfPeriod, Borderline, Undated };

std::string_view to_string(RelevanceClass c);

struct TemporalConfig {
    int min_year = 100;
    int max_year = 2100;
    double year_fraction_threshold = 0.5;
    double interval_fraction_threshold = 0.5;
};

// Years are maximal 3-4 digit runs inside [min_year, max_year] that do not
// touch another digit through a joiner ("1.793", "12,1794", "3/1794") and are
// not glued to a preceding letter ("A380"). Intervals are two such years
// joined by '-', U+2013 or "to", with at most one space on either side; the
// second year may carry a day and English month name ("1793 – 28 July 1794").
TemporalProfile extract_temporal_profile(std::string_view text, const TemporalConfig& config = {});

RelevanceClass classify_entity(const TemporalProfile& profile, const Period& period,
                               const TemporalConfig& config = {});

enum class PruneState { Included, Excluded };

std::string_view to_string(PruneState s);

// A category is excluded when strictly more than half of its dated members
// (class != Undated) are OutOfPeriod. Throws std::invalid_argument if a
// member has no class.
std::map<Iri, PruneState> prune_categories(const CategoryTree& tree, const MemberMap& members,
                                           const std::map<Iri, RelevanceClass>& classes);

}  // namespace periodscope
