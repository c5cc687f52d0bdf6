#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kgtext/augment.hpp"
#include "kgtext/corpus.hpp"
#include "kgtext/encoder.hpp"

namespace kgtext {

// Token-id sequences for one training step. Graph positions past the text
// count are artificial negatives; graph j == i is text i's positive.
struct Batch {
  std::vector<std::vector<int>> texts;
  std::vector<std::vector<int>> graphs;
};

struct TrainConfig {
  int batch_size = 32;
  int epochs = 30;
  double learning_rate = 5.0;
  double temperature = 1.0;
  NegativePolicy negatives;
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  Pooling pooling = Pooling::Bag;
};

// Loss plus gradient w.r.t. the similarity matrix.
struct LossResult {
  double loss = 0.0;
  Eigen::MatrixXd dsim;  // |I| x |J|
};

// In-batch contrastive loss: logits are cosine/temperature over the graph
// axis, loss is the mean over texts of -log softmax at the positive.
// dsim rows are (softmax - onehot) / (|I| * temperature).
LossResult contrastive_loss(const std::vector<Eigen::VectorXd>& text_embs,
                            const std::vector<Eigen::VectorXd>& graph_embs, double temperature);

// Loss and its full analytic gradient w.r.t. the embedding table, back
// through cosine and pooling.
struct BatchGrad {
  double loss = 0.0;
  Eigen::MatrixXd grad_table;
};

BatchGrad loss_and_grad(const EncoderParams& params, const Batch& batch, double temperature);

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> eval_accuracy;
};

struct TrainMetrics {
  std::vector<EpochRecord> epochs;
};

// Versioned serialized model: vocab, encoder table, optional cross head,
// plus free-form metadata.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  Vocab vocab;
  EncoderParams params;
  std::optional<CrossHead> cross_head;
  nlohmann::json metadata;
};

// SGD over seeded shuffled epochs with in-batch plus policy-driven
// artificial negatives. Negatives are regenerated fresh each epoch.
// When eval_fraction > 0 that share of pairs is held out and top-1
// graph->text accuracy on it is logged each epoch.
Checkpoint train(const TrainConfig& config, const Dataset& dataset,
                 const SymmetricRegistry& registry, TrainMetrics* metrics = nullptr,
                 double eval_fraction = 0.0);

// Binary container: magic, version, vocab block, little-endian float64
// parameter block, optional cross head, embedded JSON metadata.
// load(save(c)) is bit-identical.
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace kgtext
