#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "kgtext/rdf.hpp"

namespace kgtext {

// One (graph, text) example with a stable id.
struct PairExample {
  std::string id;
  RdfGraph graph;
  std::string text;
};

struct Dataset {
  std::string name;
  std::vector<PairExample> pairs;

  std::size_t size() const { return pairs.size(); }
};

struct DatasetStats {
  std::size_t pair_count = 0;
  std::size_t distinct_property_count = 0;
  std::size_t distinct_entity_count = 0;
};

// JSONL, one object per line: {"id": str, "text": str, "triples": [[s,p,o], ...]}.
// Errors name the offending line. Duplicate ids are rejected.
Dataset load_pairs(const std::string& path);
void save_pairs(const Dataset& d, const std::string& path);

// k datasets of sizes n_1..n_k -> m = min(n_i) seeded random pairs from each,
// concatenated; output size is exactly k*m.
Dataset mix_equal(const std::vector<Dataset>& datasets, std::uint64_t seed);

struct Page {
  std::string entity;
  std::string text;
};

// Splits each page into consecutive fixed-word-count passages and aligns a
// triple (s,p,o) to a passage when s equals the page entity and o (or one of
// its aliases) appears in the passage on token boundaries, case-insensitive.
// Each passage with at least one aligned triple yields one pair.
Dataset build_aligned_chunks(const std::vector<Page>& pages,
                             const std::vector<Triple>& triples,
                             const std::map<std::string, std::vector<std::string>>& aliases,
                             std::size_t chunk_words = 100);

// Keeps the ceil(fraction*|d|) highest-scoring pairs; ties broken by
// ascending id. Kept pairs stay in original dataset order.
Dataset filter_top_similarity(const Dataset& d,
                              const std::function<double(const PairExample&)>& scorer,
                              double fraction = 0.5);

DatasetStats dataset_stats(const Dataset& d);

// Deterministic synthetic corpus of templated single-triple pairs with a
// guaranteed 1-to-1 graph/text mapping. Entities are E0..E{n-1}, properties
// P0..P{k-1}; no generated pair is the subject/object inversion of another.
Dataset generate_toy_corpus(std::size_t n_entities, std::size_t n_properties,
                            std::size_t n_pairs, std::uint64_t seed);

}  // namespace kgtext
