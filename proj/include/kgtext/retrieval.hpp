#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kgtext/corpus.hpp"
#include "kgtext/encoder.hpp"

namespace kgtext {

// Exact exhaustive-search index: one L2-normalized row per item.
struct EmbeddingIndex {
  std::vector<std::string> ids;
  Eigen::MatrixXd vectors;  // n x dim, unit-norm rows

  std::size_t size() const { return ids.size(); }
};

EmbeddingIndex build_index(const EncoderParams& params,
                           const std::vector<std::pair<std::string, std::vector<int>>>& items);

// Exact top-k by descending cosine; ties broken by ascending id.
std::vector<std::pair<std::string, double>> top_k(const EmbeddingIndex& index,
                                                  const Eigen::VectorXd& query, std::size_t k);

enum class Direction { GraphToText, TextToGraph };

struct RetrievalReport {
  double accuracy = 0.0;
  std::size_t n = 0;
  Direction direction = Direction::GraphToText;
};

// Fraction of queries whose top-1 retrieved id is the paired id, assuming a
// 1-to-1 dataset.
RetrievalReport eval_top1(const EncoderParams& params, const Vocab& vocab, const Dataset& dataset,
                          Direction direction);

}  // namespace kgtext
