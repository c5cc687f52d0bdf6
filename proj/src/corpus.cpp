#include "kgtext/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kgtext/errors.hpp"
#include "kgtext/rng.hpp"

namespace kgtext {

namespace {

using nlohmann::json;

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

// Case-insensitive substring match on token boundaries, so "US" does not
// match inside "USE".
bool mentions(const std::string& passage_lower, const std::string& needle) {
  const std::string n = lower(needle);
  if (n.empty()) return false;
  std::size_t pos = 0;
  while ((pos = passage_lower.find(n, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(passage_lower[pos - 1]);
    const std::size_t end = pos + n.size();
    const bool right_ok = end == passage_lower.size() || !is_word_char(passage_lower[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace

Dataset load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  Dataset d;
  d.name = path;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    auto fail = [&](const std::string& what) -> ValidationError {
      return ValidationError(path + ":" + std::to_string(line_no) + ": " + what);
    };
    if (!rec.is_object()) throw fail("record is not an object");
    if (!rec.contains("id") || !rec["id"].is_string()) throw fail("missing string field 'id'");
    if (!rec.contains("text") || !rec["text"].is_string())
      throw fail("missing string field 'text'");
    if (!rec.contains("triples") || !rec["triples"].is_array())
      throw fail("missing array field 'triples'");

    std::string id = rec["id"].get<std::string>();
    std::string text = rec["text"].get<std::string>();
    if (text.empty()) throw fail("empty text");
    if (!seen_ids.insert(id).second) throw fail("duplicate id '" + id + "'");

    std::vector<Triple> triples;
    for (const auto& t : rec["triples"]) {
      if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string() ||
          !t[2].is_string()) {
        throw fail("field 'triples' entries must be [subject, predicate, object] strings");
      }
      try {
        triples.emplace_back(t[0].get<std::string>(), t[1].get<std::string>(),
                             t[2].get<std::string>());
      } catch (const ValidationError& e) {
        throw fail(e.what());
      }
    }
    if (triples.empty()) throw fail("pair has no triples");
    d.pairs.push_back({std::move(id), RdfGraph(std::move(triples)), std::move(text)});
  }
  return d;
}

void save_pairs(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path);
  for (const auto& p : d.pairs) {
    json triples = json::array();
    for (const auto& t : p.graph.triples) {
      triples.push_back({t.subject, t.predicate, t.object});
    }
    json rec = {{"id", p.id}, {"text", p.text}, {"triples", triples}};
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Dataset mix_equal(const std::vector<Dataset>& datasets, std::uint64_t seed) {
  if (datasets.size() < 2) throw ValidationError("mix_equal needs at least two datasets");
  std::size_t smallest = SIZE_MAX;
  for (const auto& d : datasets) {
    if (d.pairs.empty()) throw ValidationError("mix_equal: dataset '" + d.name + "' is empty");
    smallest = std::min(smallest, d.pairs.size());
  }

  Rng rng(seed);
  Dataset out;
  out.name = "mix";
  for (std::size_t di = 0; di < datasets.size(); ++di) {
    const auto& d = datasets[di];
    std::vector<std::size_t> idx(d.pairs.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng sub = rng.fork(di);
    sub.shuffle(idx);
    idx.resize(smallest);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) {
      PairExample p = d.pairs[i];
      // Source-indexed prefix keeps ids unique when inputs share id spaces.
      p.id = "d" + std::to_string(di) + ":" + p.id;
      out.pairs.push_back(std::move(p));
    }
  }
  return out;
}

Dataset build_aligned_chunks(const std::vector<Page>& pages,
                             const std::vector<Triple>& triples,
                             const std::map<std::string, std::vector<std::string>>& aliases,
                             std::size_t chunk_words) {
  if (chunk_words < 1) throw ValidationError("chunk_words must be >= 1");

  Dataset out;
  out.name = "aligned-chunks";
  for (const auto& page : pages) {
    std::vector<const Triple*> candidates;
    for (const auto& t : triples) {
      if (t.subject == page.entity) candidates.push_back(&t);
    }
    if (candidates.empty()) continue;

    const auto words = split_words(page.text);
    for (std::size_t start = 0, chunk = 0; start < words.size(); start += chunk_words, ++chunk) {
      const std::size_t end = std::min(start + chunk_words, words.size());
      std::string passage;
      for (std::size_t i = start; i < end; ++i) {
        if (i > start) passage += ' ';
        passage += words[i];
      }
      const std::string passage_lower = lower(passage);

      std::vector<Triple> aligned;
      for (const Triple* t : candidates) {
        bool hit = mentions(passage_lower, t->object);
        if (!hit) {
          auto it = aliases.find(t->object);
          if (it != aliases.end()) {
            for (const auto& alias : it->second) {
              if (mentions(passage_lower, alias)) {
                hit = true;
                break;
              }
            }
          }
        }
        if (hit) aligned.push_back(*t);
      }
      if (!aligned.empty()) {
        out.pairs.push_back({page.entity + "#" + std::to_string(chunk),
                             RdfGraph(std::move(aligned)), passage});
      }
    }
  }
  return out;
}

Dataset filter_top_similarity(const Dataset& d,
                              const std::function<double(const PairExample&)>& scorer,
                              double fraction) {
  if (d.pairs.empty()) throw ValidationError("filter_top_similarity: empty dataset");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("fraction must be in (0, 1]");
  }

  const std::size_t keep =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(d.pairs.size())));

  std::vector<std::size_t> order(d.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> scores(d.pairs.size());
  for (std::size_t i = 0; i < d.pairs.size(); ++i) scores[i] = scorer(d.pairs[i]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return d.pairs[a].id < d.pairs[b].id;
  });

  std::vector<bool> kept(d.pairs.size(), false);
  for (std::size_t i = 0; i < keep; ++i) kept[order[i]] = true;

  Dataset out;
  out.name = d.name + "-filtered";
  for (std::size_t i = 0; i < d.pairs.size(); ++i) {
    if (kept[i]) out.pairs.push_back(d.pairs[i]);
  }
  return out;
}

DatasetStats dataset_stats(const Dataset& d) {
  std::set<std::string> properties;
  std::set<std::string> entities;
  for (const auto& p : d.pairs) {
    for (const auto& t : p.graph.triples) {
      properties.insert(t.predicate);
      entities.insert(t.subject);
      entities.insert(t.object);
    }
  }
  return {d.pairs.size(), properties.size(), entities.size()};
}

Dataset generate_toy_corpus(std::size_t n_entities, std::size_t n_properties,
                            std::size_t n_pairs, std::uint64_t seed) {
  if (n_entities < 2 || n_properties < 1 || n_pairs < 1) {
    throw ValidationError("generate_toy_corpus: need >=2 entities, >=1 property, >=1 pair");
  }
  // Inverse duplicates are excluded so that bag-of-token graph embeddings
  // stay distinct across pairs; capacity counts unordered entity pairs.
  const std::size_t capacity = n_entities * (n_entities - 1) / 2 * n_properties;
  if (n_pairs > capacity) {
    throw ValidationError("generate_toy_corpus: requested " + std::to_string(n_pairs) +
                          " pairs but only " + std::to_string(capacity) +
                          " distinct combinations exist");
  }

  Rng rng(seed);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> used;
  Dataset out;
  out.name = "toy";
  while (out.pairs.size() < n_pairs) {
    const std::size_t i = rng.index(n_entities);
    const std::size_t j = rng.index(n_entities);
    const std::size_t k = rng.index(n_properties);
    if (i == j) continue;
    if (!used.insert({std::min(i, j), std::max(i, j), k}).second) continue;

    const std::string s = "E" + std::to_string(i);
    const std::string p = "P" + std::to_string(k);
    const std::string o = "E" + std::to_string(j);
    // Texts refer to entities and properties through surface forms that share
    // no tokens with the graph labels, so an untrained encoder has no lexical
    // shortcut between the two sides.
    const std::string ts = "ent" + std::to_string(i);
    const std::string tp = "rel" + std::to_string(k);
    const std::string to = "ent" + std::to_string(j);
    std::string text;
    switch (k % 4) {
      case 0: text = ts + "'s " + tp + " is " + to + "."; break;
      case 1: text = "The " + tp + " of " + ts + " is " + to + "."; break;
      case 2: text = ts + " has " + tp + " " + to + "."; break;
      default: text = to + " is the " + tp + " of " + ts + "."; break;
    }
    out.pairs.push_back({"toy-" + std::to_string(out.pairs.size()),
                         RdfGraph({Triple(s, p, o)}), std::move(text)});
  }
  return out;
}

}  // namespace kgtext
