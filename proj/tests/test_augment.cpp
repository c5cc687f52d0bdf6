#include <doctest.h>

#include "kgtext/augment.hpp"
#include "kgtext/errors.hpp"

using namespace kgtext;

namespace {

// Number of differing fields between two equally sized graphs.
std::size_t field_diff(const RdfGraph& a, const RdfGraph& b) {
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.triples[i].subject != b.triples[i].subject) ++diff;
    if (a.triples[i].predicate != b.triples[i].predicate) ++diff;
    if (a.triples[i].object != b.triples[i].object) ++diff;
  }
  return diff;
}

}  // namespace

TEST_CASE("corrupt_graph with a two-value object pool has one outcome") {
  CorruptionPool pool{{"a"}, {"p"}, {"x", "y"}};
  const RdfGraph g({Triple("a", "p", "x")});
  Rng rng(1);
  // subject and predicate slots can never change; whenever slot resampling
  // lands on the object within its retry budget, the only outcome is "y"
  int successes = 0;
  while (successes < 5) {
    try {
      const RdfGraph c = corrupt_graph(g, pool, rng);
      CHECK(c.triples[0] == Triple("a", "p", "y"));
      ++successes;
    } catch (const ValidationError&) {
      // retry budget exhausted on unchangeable slots; acceptable
    }
  }
}

TEST_CASE("corrupt_graph changes exactly one field of one triple") {
  const Dataset d = generate_toy_corpus(10, 4, 40, 3);
  const CorruptionPool pool = CorruptionPool::from_dataset(d);
  Rng rng(9);
  for (int run = 0; run < 1000; ++run) {
    const auto& g = d.pairs[rng.index(d.size())].graph;
    const RdfGraph c = corrupt_graph(g, pool, rng);
    CHECK(field_diff(g, c) == 1);
    CHECK_FALSE(c == g);
  }
}

TEST_CASE("corrupt_graph fails when no slot can change") {
  CorruptionPool pool{{"a"}, {"p"}, {"x"}};
  const RdfGraph g({Triple("a", "p", "x")});
  Rng rng(2);
  CHECK_THROWS_AS(corrupt_graph(g, pool, rng), ValidationError);
}

TEST_CASE("invert_graph inverts a single non-symmetric triple") {
  const auto& reg = SymmetricRegistry::defaults();
  Rng rng(1);
  const RdfGraph g({Triple("a", "larger than", "b")});
  const auto inv = invert_graph(g, reg, rng);
  REQUIRE(inv.has_value());
  CHECK(inv->triples[0] == Triple("b", "larger than", "a"));
}

TEST_CASE("invert_graph returns nothing for all-symmetric graphs") {
  const auto& reg = SymmetricRegistry::defaults();
  Rng rng(1);
  const RdfGraph g({Triple("a", "sibling", "b"), Triple("c", "partner", "d")});
  CHECK_FALSE(invert_graph(g, reg, rng).has_value());
}

TEST_CASE("invert_graph never touches symmetric triples in mixed graphs") {
  const auto& reg = SymmetricRegistry::defaults();
  const RdfGraph g({Triple("a", "sibling", "b"), Triple("c", "larger than", "d"),
                    Triple("e", "capital of", "f")});
  Rng rng(5);
  for (int run = 0; run < 200; ++run) {
    const auto inv = invert_graph(g, reg, rng);
    REQUIRE(inv.has_value());
    CHECK(inv->triples[0] == g.triples[0]);  // symmetric triple untouched
    CHECK(field_diff(g, *inv) == 2);         // one subject/object swap
  }
}

TEST_CASE("build_inversion_benchmark keeps only eligible pairs") {
  Dataset d;
  d.pairs = {{"ok", RdfGraph({Triple("a", "larger than", "b")}), "t1"},
             {"sym", RdfGraph({Triple("a", "sibling", "b")}), "t2"},
             {"multi", RdfGraph({Triple("a", "p", "b"), Triple("c", "q", "d")}), "t3"}};
  const InversionBenchmark b = build_inversion_benchmark(d, SymmetricRegistry::defaults());
  REQUIRE(b.items.size() == 1);
  CHECK(b.items[0].id == "ok");
  CHECK(b.items[0].inverted_graph.triples[0] == invert_triple(d.pairs[0].graph.triples[0]));
}

TEST_CASE("benchmark invariants hold on a generated dataset") {
  const Dataset d = generate_toy_corpus(12, 4, 60, 4);
  const auto& reg = SymmetricRegistry::defaults();
  const InversionBenchmark b = build_inversion_benchmark(d, reg);
  CHECK(b.items.size() == d.size());  // toy predicates are never symmetric
  for (const auto& item : b.items) {
    CHECK(item.graph.size() == 1);
    CHECK_FALSE(is_symmetric(item.graph.triples[0].predicate, reg));
    CHECK(item.inverted_graph.triples[0] == invert_triple(item.graph.triples[0]));
  }
}

TEST_CASE("inversion benchmark file round-trips") {
  const Dataset d = generate_toy_corpus(8, 3, 20, 6);
  const InversionBenchmark b = build_inversion_benchmark(d, SymmetricRegistry::defaults());
  const std::string path = "/tmp/kgtext_test_bench.jsonl";
  save_inversion_benchmark(b, path);
  const InversionBenchmark loaded = load_inversion_benchmark(path);
  REQUIRE(loaded.items.size() == b.items.size());
  for (std::size_t i = 0; i < b.items.size(); ++i) {
    CHECK(loaded.items[i].id == b.items[i].id);
    CHECK(loaded.items[i].graph == b.items[i].graph);
    CHECK(loaded.items[i].inverted_graph == b.items[i].inverted_graph);
  }
}

TEST_CASE("augment_batch extends only the graph axis") {
  const Dataset d = generate_toy_corpus(10, 4, 20, 8);
  const CorruptionPool pool = CorruptionPool::from_dataset(d);
  const auto& reg = SymmetricRegistry::defaults();
  const std::vector<PairExample> pairs(d.pairs.begin(), d.pairs.begin() + 4);

  Rng rng(1);
  const AugmentedBatch hard_only = augment_batch(pairs, {1, 0}, pool, reg, rng);
  CHECK(hard_only.texts.size() == 4);
  CHECK(hard_only.linearized_graphs.size() == 8);

  Rng rng2(1);
  const AugmentedBatch passthrough = augment_batch(pairs, {0, 0}, pool, reg, rng2);
  CHECK(passthrough.texts.size() == 4);
  CHECK(passthrough.linearized_graphs.size() == 4);

  // toy predicates are non-symmetric, so inversions are never skipped here
  Rng rng3(1);
  const AugmentedBatch both = augment_batch(pairs, {1, 1}, pool, reg, rng3);
  CHECK(both.linearized_graphs.size() == 12);
}

TEST_CASE("augment_batch skips impossible inversions") {
  Dataset d;
  d.pairs = {{"a", RdfGraph({Triple("x", "sibling", "y")}), "t1"},
             {"b", RdfGraph({Triple("u", "partner", "v")}), "t2"}};
  const CorruptionPool pool = CorruptionPool::from_dataset(d);
  Rng rng(1);
  const AugmentedBatch batch =
      augment_batch(d.pairs, {1, 1}, pool, SymmetricRegistry::defaults(), rng);
  CHECK(batch.texts.size() == 2);
  CHECK(batch.linearized_graphs.size() == 4);  // inversions skipped, hard kept
}

TEST_CASE("a corrupted graph is never its source") {
  const Dataset d = generate_toy_corpus(8, 3, 30, 10);
  const CorruptionPool pool = CorruptionPool::from_dataset(d);
  Rng rng(77);
  for (const auto& p : d.pairs) {
    CHECK_FALSE(corrupt_graph(p.graph, pool, rng) == p.graph);
  }
}
