#pragma once

// Deterministic desk-scale fixtures: a small slice of the category network
// around the French Revolution and a synthetic parliamentary corpus that
// links into it.

#include <cstdint>
#include <string>

namespace periodscope::sample {

inline constexpr const char* kResource = "http://dbpedia.org/resource/";
inline constexpr const char* kCategory = "http://dbpedia.org/resource/Category:";

inline std::string category(const std::string& name) { return kCategory + name; }
inline std::string resource(const std::string& name) { return kResource + name; }

// Three categories (French_Revolution and two subcategories) and four
// member entities with English labels and dated descriptions.
std::string generate_toy_graph();

// Seeded JSON Lines corpus. For n_docs >= 3 the documents span at least three
// years and two parties; Drownings_at_Nantes is never mentioned.
std::string generate_toy_corpus(std::size_t n_docs, std::uint64_t seed);

}  // namespace periodscope::sample
