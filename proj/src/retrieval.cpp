#include "kgtext/retrieval.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "kgtext/errors.hpp"

namespace kgtext {

EmbeddingIndex build_index(const EncoderParams& params,
                           const std::vector<std::pair<std::string, std::vector<int>>>& items) {
  if (items.empty()) throw ValidationError("build_index: no items");

  std::set<std::string> seen;
  EmbeddingIndex index;
  index.vectors.resize(static_cast<Eigen::Index>(items.size()), params.dim());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& [id, ids] = items[i];
    if (!seen.insert(id).second) throw ValidationError("build_index: duplicate id '" + id + "'");
    Eigen::VectorXd v = embed(params, ids);
    const double norm = v.norm();
    if (norm == 0.0) throw ValidationError("build_index: zero embedding for id '" + id + "'");
    index.vectors.row(static_cast<Eigen::Index>(i)) = v.transpose() / norm;
    index.ids.push_back(id);
  }
  return index;
}

std::vector<std::pair<std::string, double>> top_k(const EmbeddingIndex& index,
                                                  const Eigen::VectorXd& query, std::size_t k) {
  if (k < 1 || k > index.size()) {
    throw ValidationError("top_k: k must be in [1, " + std::to_string(index.size()) + "]");
  }
  const double norm = query.norm();
  if (norm == 0.0) throw ValidationError("top_k: zero query embedding");

  const Eigen::VectorXd scores = index.vectors * (query / norm);
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores(static_cast<Eigen::Index>(a));
                      const double sb = scores(static_cast<Eigen::Index>(b));
                      if (sa != sb) return sa > sb;
                      return index.ids[a] < index.ids[b];
                    });

  std::vector<std::pair<std::string, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.emplace_back(index.ids[order[i]], scores(static_cast<Eigen::Index>(order[i])));
  }
  return out;
}

RetrievalReport eval_top1(const EncoderParams& params, const Vocab& vocab, const Dataset& dataset,
                          Direction direction) {
  if (dataset.pairs.empty()) throw ValidationError("eval_top1: empty dataset");

  std::vector<std::pair<std::string, std::vector<int>>> corpus_items;
  std::vector<std::vector<int>> queries;
  for (const auto& p : dataset.pairs) {
    const std::vector<int> text_ids = tokenize(p.text, vocab);
    const std::vector<int> graph_ids = tokenize(linearize(p.graph), vocab);
    if (direction == Direction::GraphToText) {
      corpus_items.emplace_back(p.id, text_ids);
      queries.push_back(graph_ids);
    } else {
      corpus_items.emplace_back(p.id, graph_ids);
      queries.push_back(text_ids);
    }
  }

  const EmbeddingIndex index = build_index(params, corpus_items);
  std::size_t hits = 0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto result = top_k(index, embed(params, queries[q]), 1);
    if (result.front().first == dataset.pairs[q].id) ++hits;
  }

  RetrievalReport report;
  report.accuracy = static_cast<double>(hits) / static_cast<double>(queries.size());
  report.n = queries.size();
  report.direction = direction;
  return report;
}

}  // namespace kgtext
