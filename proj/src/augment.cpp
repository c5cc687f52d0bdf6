#include "kgtext/augment.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "kgtext/errors.hpp"

namespace kgtext {

namespace {

using nlohmann::json;

std::vector<std::string> deduped(std::vector<std::string> values) {
  std::set<std::string> s(values.begin(), values.end());
  return {s.begin(), s.end()};
}

json triples_json(const RdfGraph& g) {
  json arr = json::array();
  for (const auto& t : g.triples) arr.push_back({t.subject, t.predicate, t.object});
  return arr;
}

RdfGraph triples_from_json(const json& arr, const std::string& where) {
  std::vector<Triple> triples;
  for (const auto& t : arr) {
    if (!t.is_array() || t.size() != 3) {
      throw ValidationError(where + ": triples entries must be 3-element arrays");
    }
    triples.emplace_back(t[0].get<std::string>(), t[1].get<std::string>(),
                         t[2].get<std::string>());
  }
  return RdfGraph(std::move(triples));
}

}  // namespace

CorruptionPool CorruptionPool::from_dataset(const Dataset& d) {
  std::vector<std::string> subjects, predicates, objects;
  for (const auto& p : d.pairs) {
    for (const auto& t : p.graph.triples) {
      subjects.push_back(t.subject);
      predicates.push_back(t.predicate);
      objects.push_back(t.object);
    }
  }
  return {deduped(std::move(subjects)), deduped(std::move(predicates)),
          deduped(std::move(objects))};
}

RdfGraph corrupt_graph(const RdfGraph& g, const CorruptionPool& pool, Rng& rng) {
  const std::size_t triple_idx = rng.index(g.triples.size());
  const Triple& victim = g.triples[triple_idx];

  for (int attempt = 0; attempt < 4; ++attempt) {
    const std::size_t slot = rng.index(3);
    const std::vector<std::string>& values =
        slot == 0 ? pool.subjects : (slot == 1 ? pool.predicates : pool.objects);
    const std::string& original =
        slot == 0 ? victim.subject : (slot == 1 ? victim.predicate : victim.object);

    std::vector<const std::string*> candidates;
    for (const auto& v : values) {
      if (v != original) candidates.push_back(&v);
    }
    if (candidates.empty()) continue;  // resample the slot

    const std::string& replacement = *candidates[rng.index(candidates.size())];
    std::vector<Triple> triples = g.triples;
    triples[triple_idx] =
        Triple(slot == 0 ? replacement : victim.subject,
               slot == 1 ? replacement : victim.predicate,
               slot == 2 ? replacement : victim.object);
    return RdfGraph(std::move(triples));
  }
  throw ValidationError("corrupt_graph: pool too small to guarantee a changed field");
}

std::optional<RdfGraph> invert_graph(const RdfGraph& g, const SymmetricRegistry& registry,
                                     Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < g.triples.size(); ++i) {
    if (!is_symmetric(g.triples[i].predicate, registry)) candidates.push_back(i);
  }
  if (candidates.empty()) return std::nullopt;

  const std::size_t idx = candidates[rng.index(candidates.size())];
  std::vector<Triple> triples = g.triples;
  triples[idx] = invert_triple(triples[idx]);
  return RdfGraph(std::move(triples));
}

InversionBenchmark build_inversion_benchmark(const Dataset& d,
                                             const SymmetricRegistry& registry) {
  InversionBenchmark b;
  for (const auto& p : d.pairs) {
    if (p.graph.size() != 1) continue;
    if (is_symmetric(p.graph.triples[0].predicate, registry)) continue;
    RdfGraph inverted({invert_triple(p.graph.triples[0])});
    b.items.push_back({p.id, p.graph, std::move(inverted), p.text});
  }
  return b;
}

void save_inversion_benchmark(const InversionBenchmark& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write benchmark file: " + path);
  for (const auto& item : b.items) {
    json rec = {{"id", item.id},
                {"text", item.text},
                {"triples", triples_json(item.graph)},
                {"inverted_triples", triples_json(item.inverted_graph)}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

InversionBenchmark load_inversion_benchmark(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open benchmark file: " + path);
  InversionBenchmark b;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(where + ": invalid JSON: " + e.what());
    }
    b.items.push_back({rec.at("id").get<std::string>(),
                       triples_from_json(rec.at("triples"), where),
                       triples_from_json(rec.at("inverted_triples"), where),
                       rec.at("text").get<std::string>()});
  }
  return b;
}

AugmentedBatch augment_batch(const std::vector<PairExample>& pairs, const NegativePolicy& policy,
                             const CorruptionPool& pool, const SymmetricRegistry& registry,
                             Rng& rng) {
  if (policy.hard < 0 || policy.inverted < 0) {
    throw ValidationError("negative policy counts must be >= 0");
  }
  AugmentedBatch batch;
  for (const auto& p : pairs) {
    batch.texts.push_back(p.text);
    batch.linearized_graphs.push_back(linearize(p.graph));
  }
  for (const auto& p : pairs) {
    for (int h = 0; h < policy.hard; ++h) {
      batch.linearized_graphs.push_back(linearize(corrupt_graph(p.graph, pool, rng)));
    }
    for (int v = 0; v < policy.inverted; ++v) {
      auto inv = invert_graph(p.graph, registry, rng);
      if (inv) batch.linearized_graphs.push_back(linearize(*inv));
    }
  }
  return batch;
}

}  // namespace kgtext
