#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kgtext/corpus.hpp"
#include "kgtext/rdf.hpp"
#include "kgtext/rng.hpp"

namespace kgtext {

// De-duplicated label pools drawn from a whole dataset; corruption replaces
// a field with another value from the matching pool.
struct CorruptionPool {
  std::vector<std::string> subjects;
  std::vector<std::string> predicates;
  std::vector<std::string> objects;

  static CorruptionPool from_dataset(const Dataset& d);
};

// How many synthetic negatives to add per positive graph.
struct NegativePolicy {
  int hard = 0;
  int inverted = 0;
};

// Replaces exactly one field of one uniformly chosen triple with a different
// pool value. If the chosen slot cannot supply a different value the slot is
// resampled up to 3 times, then this throws.
RdfGraph corrupt_graph(const RdfGraph& g, const CorruptionPool& pool, Rng& rng);

// Inverts one uniformly chosen triple among those whose predicate is not in
// the registry; empty when no such triple exists.
std::optional<RdfGraph> invert_graph(const RdfGraph& g, const SymmetricRegistry& registry,
                                     Rng& rng);

struct InversionItem {
  std::string id;
  RdfGraph graph;
  RdfGraph inverted_graph;
  std::string text;
};

// One item per single-triple pair with a non-symmetric predicate.
struct InversionBenchmark {
  std::vector<InversionItem> items;
};

InversionBenchmark build_inversion_benchmark(const Dataset& d,
                                             const SymmetricRegistry& registry);

// {"id", "text", "triples", "inverted_triples"} per line.
void save_inversion_benchmark(const InversionBenchmark& b, const std::string& path);
InversionBenchmark load_inversion_benchmark(const std::string& path);

// Texts plus graphs where positions past the positives are synthetic
// negatives; graph j == i is the positive for text i. Negatives only ever
// extend the graph axis.
struct AugmentedBatch {
  std::vector<std::string> texts;
  std::vector<std::string> linearized_graphs;
};

AugmentedBatch augment_batch(const std::vector<PairExample>& pairs, const NegativePolicy& policy,
                             const CorruptionPool& pool, const SymmetricRegistry& registry,
                             Rng& rng);

}  // namespace kgtext
