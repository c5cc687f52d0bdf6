#include "kgtext/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "kgtext/errors.hpp"
#include "kgtext/rng.hpp"

namespace kgtext {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.write(buf, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.write(buf, 8);
}

void write_f64(std::ostream& out, double v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.write(buf, 8);
}

std::uint32_t read_u32(std::istream& in) {
  char buf[4];
  if (!in.read(buf, 4)) throw ParseError("truncated checkpoint");
  std::uint32_t v;
  std::memcpy(&v, buf, 4);
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw ParseError("truncated checkpoint");
  std::uint64_t v;
  std::memcpy(&v, buf, 8);
  return v;
}

double read_f64(std::istream& in) {
  char buf[8];
  if (!in.read(buf, 8)) throw ParseError("truncated checkpoint");
  double v;
  std::memcpy(&v, buf, 8);
  return v;
}

std::string read_bytes(std::istream& in, std::size_t n) {
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw ParseError("truncated checkpoint");
  }
  return s;
}

constexpr char kMagic[4] = {'K', 'G', 'T', 'X'};

// Minimal internal top-1 graph->text accuracy for per-epoch logging; the
// retrieval module owns the full protocol.
double quick_top1(const EncoderParams& params, const std::vector<std::vector<int>>& text_ids,
                  const std::vector<std::vector<int>>& graph_ids) {
  std::vector<Eigen::VectorXd> text_embs;
  text_embs.reserve(text_ids.size());
  for (const auto& ids : text_ids) text_embs.push_back(embed(params, ids));

  std::size_t hits = 0;
  for (std::size_t q = 0; q < graph_ids.size(); ++q) {
    const Eigen::VectorXd query = embed(params, graph_ids[q]);
    std::size_t best = 0;
    double best_score = -2.0;
    for (std::size_t t = 0; t < text_embs.size(); ++t) {
      const double score = cosine(query, text_embs[t]);
      if (score > best_score) {
        best_score = score;
        best = t;
      }
    }
    if (best == q) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(graph_ids.size());
}

}  // namespace

LossResult contrastive_loss(const std::vector<Eigen::VectorXd>& text_embs,
                            const std::vector<Eigen::VectorXd>& graph_embs, double temperature) {
  const std::size_t n_i = text_embs.size();
  const std::size_t n_j = graph_embs.size();
  if (n_i < 1 || n_j < n_i) {
    throw ValidationError("contrastive_loss: need |graphs| >= |texts| >= 1");
  }
  if (!(temperature > 0.0)) throw ValidationError("temperature must be > 0");

  Eigen::MatrixXd logits(n_i, n_j);
  for (std::size_t i = 0; i < n_i; ++i) {
    for (std::size_t j = 0; j < n_j; ++j) {
      logits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cosine(text_embs[i], graph_embs[j]) / temperature;
    }
  }

  LossResult result;
  result.dsim.resize(static_cast<Eigen::Index>(n_i), static_cast<Eigen::Index>(n_j));
  double total = 0.0;
  for (Eigen::Index i = 0; i < result.dsim.rows(); ++i) {
    const double max_logit = logits.row(i).maxCoeff();
    Eigen::VectorXd shifted = (logits.row(i).array() - max_logit).exp();
    const double z = shifted.sum();
    total += -(logits(i, i) - max_logit - std::log(z));

    // (softmax - onehot) / |I|, then back through the temperature scaling.
    Eigen::VectorXd row = shifted / z;
    row(i) -= 1.0;
    result.dsim.row(i) =
        row.transpose() / (static_cast<double>(n_i) * temperature);
  }
  result.loss = total / static_cast<double>(n_i);
  return result;
}

BatchGrad loss_and_grad(const EncoderParams& params, const Batch& batch, double temperature) {
  std::vector<Eigen::VectorXd> text_embs, graph_embs;
  text_embs.reserve(batch.texts.size());
  graph_embs.reserve(batch.graphs.size());
  for (const auto& ids : batch.texts) text_embs.push_back(embed(params, ids));
  for (const auto& ids : batch.graphs) graph_embs.push_back(embed(params, ids));

  const LossResult lr = contrastive_loss(text_embs, graph_embs, temperature);

  std::vector<Eigen::VectorXd> grad_t(text_embs.size(),
                                      Eigen::VectorXd::Zero(params.dim()));
  std::vector<Eigen::VectorXd> grad_g(graph_embs.size(),
                                      Eigen::VectorXd::Zero(params.dim()));
  for (Eigen::Index i = 0; i < lr.dsim.rows(); ++i) {
    for (Eigen::Index j = 0; j < lr.dsim.cols(); ++j) {
      const double upstream = lr.dsim(i, j);
      if (upstream == 0.0) continue;
      cosine_backward(text_embs[static_cast<std::size_t>(i)],
                      graph_embs[static_cast<std::size_t>(j)], upstream,
                      grad_t[static_cast<std::size_t>(i)], grad_g[static_cast<std::size_t>(j)]);
    }
  }

  BatchGrad out;
  out.loss = lr.loss;
  out.grad_table = Eigen::MatrixXd::Zero(params.vocab_size(), params.dim());
  for (std::size_t i = 0; i < batch.texts.size(); ++i) {
    embed_backward(params, batch.texts[i], grad_t[i], out.grad_table);
  }
  for (std::size_t j = 0; j < batch.graphs.size(); ++j) {
    embed_backward(params, batch.graphs[j], grad_g[j], out.grad_table);
  }
  return out;
}

Checkpoint train(const TrainConfig& config, const Dataset& dataset,
                 const SymmetricRegistry& registry, TrainMetrics* metrics,
                 double eval_fraction) {
  if (dataset.pairs.empty()) throw ValidationError("train: empty dataset");
  if (config.batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (config.epochs < 0) throw ValidationError("train: epochs must be >= 0");
  if (!(config.temperature > 0.0)) throw ValidationError("train: temperature must be > 0");
  if (eval_fraction < 0.0 || eval_fraction >= 1.0) {
    throw ValidationError("train: eval_fraction must be in [0, 1)");
  }

  std::vector<std::string> vocab_corpus;
  for (const auto& p : dataset.pairs) {
    vocab_corpus.push_back(p.text);
    vocab_corpus.push_back(linearize(p.graph));
  }
  const Vocab vocab = build_vocab(vocab_corpus);

  Rng rng(config.seed);
  std::vector<std::size_t> order(dataset.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const std::size_t eval_n =
      static_cast<std::size_t>(eval_fraction * static_cast<double>(order.size()));
  std::vector<std::size_t> eval_idx(order.begin(), order.begin() + eval_n);
  std::vector<std::size_t> train_idx(order.begin() + eval_n, order.end());
  if (train_idx.empty()) throw ValidationError("train: no training pairs after eval split");

  std::vector<std::vector<int>> eval_texts, eval_graphs;
  for (std::size_t i : eval_idx) {
    eval_texts.push_back(tokenize(dataset.pairs[i].text, vocab));
    eval_graphs.push_back(tokenize(linearize(dataset.pairs[i].graph), vocab));
  }

  EncoderParams params =
      EncoderParams::init(vocab.size(), config.dim, config.seed, config.pooling);
  const CorruptionPool pool = CorruptionPool::from_dataset(dataset);

  std::vector<double> loss_history;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng = rng.fork(static_cast<std::uint64_t>(epoch) + 1);
    epoch_rng.shuffle(train_idx);

    double loss_sum = 0.0;
    std::size_t loss_items = 0;
    for (std::size_t start = 0; start < train_idx.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(start + static_cast<std::size_t>(config.batch_size), train_idx.size());
      std::vector<PairExample> batch_pairs;
      for (std::size_t i = start; i < end; ++i) {
        batch_pairs.push_back(dataset.pairs[train_idx[i]]);
      }

      const AugmentedBatch aug =
          augment_batch(batch_pairs, config.negatives, pool, registry, epoch_rng);
      Batch batch;
      for (const auto& t : aug.texts) batch.texts.push_back(tokenize(t, vocab));
      for (const auto& g : aug.linearized_graphs) batch.graphs.push_back(tokenize(g, vocab));

      const BatchGrad bg = loss_and_grad(params, batch, config.temperature);
      if (!std::isfinite(bg.loss)) {
        throw ValidationError("train: non-finite loss at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(start / config.batch_size));
      }
      params.table -= config.learning_rate * bg.grad_table;

      loss_sum += bg.loss * static_cast<double>(batch.texts.size());
      loss_items += batch.texts.size();
    }

    const double mean_loss = loss_sum / static_cast<double>(loss_items);
    loss_history.push_back(mean_loss);
    if (metrics) {
      EpochRecord rec;
      rec.epoch = epoch;
      rec.mean_loss = mean_loss;
      if (!eval_texts.empty()) rec.eval_accuracy = quick_top1(params, eval_texts, eval_graphs);
      metrics->epochs.push_back(rec);
    }
  }

  Checkpoint ckpt;
  ckpt.vocab = vocab;
  ckpt.params = std::move(params);
  ckpt.metadata = {
      {"config",
       {{"batch_size", config.batch_size},
        {"epochs", config.epochs},
        {"learning_rate", config.learning_rate},
        {"temperature", config.temperature},
        {"hard_negatives", config.negatives.hard},
        {"inverted_negatives", config.negatives.inverted},
        {"seed", config.seed},
        {"dim", config.dim},
        {"pooling", config.pooling == Pooling::Bag ? "bag" : "positional"}}},
      {"loss_history", loss_history},
  };
  return ckpt;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  if (static_cast<Eigen::Index>(c.vocab.size()) != c.params.vocab_size()) {
    throw ValidationError("checkpoint vocab size does not match parameter table height");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint file: " + path);

  out.write(kMagic, 4);
  write_u32(out, Checkpoint::kVersion);
  write_u32(out, static_cast<std::uint32_t>(c.params.pooling));

  write_u32(out, static_cast<std::uint32_t>(c.vocab.size()));
  for (const auto& token : c.vocab.tokens()) {
    write_u32(out, static_cast<std::uint32_t>(token.size()));
    out.write(token.data(), static_cast<std::streamsize>(token.size()));
  }

  write_u32(out, static_cast<std::uint32_t>(c.params.table.rows()));
  write_u32(out, static_cast<std::uint32_t>(c.params.table.cols()));
  for (Eigen::Index r = 0; r < c.params.table.rows(); ++r) {
    for (Eigen::Index col = 0; col < c.params.table.cols(); ++col) {
      write_f64(out, c.params.table(r, col));
    }
  }

  out.put(c.cross_head ? '\1' : '\0');
  if (c.cross_head) {
    write_u32(out, static_cast<std::uint32_t>(c.cross_head->weight.size()));
    for (Eigen::Index i = 0; i < c.cross_head->weight.size(); ++i) {
      write_f64(out, c.cross_head->weight(i));
    }
    write_f64(out, c.cross_head->bias);
  }

  const std::string meta = c.metadata.dump();
  write_u64(out, meta.size());
  out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint file: " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("not a checkpoint file (bad magic): " + path);
  }
  const std::uint32_t version = read_u32(in);
  if (version != Checkpoint::kVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t pooling = read_u32(in);
  if (pooling > 1) throw ParseError("invalid pooling code in checkpoint");

  const std::uint32_t vocab_size = read_u32(in);
  std::vector<std::string> tokens;
  tokens.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const std::uint32_t len = read_u32(in);
    tokens.push_back(read_bytes(in, len));
  }

  Checkpoint c;
  c.vocab = Vocab(std::move(tokens));

  const std::uint32_t rows = read_u32(in);
  const std::uint32_t cols = read_u32(in);
  if (rows != vocab_size) {
    throw ValidationError("checkpoint shape mismatch: table height " + std::to_string(rows) +
                          " vs vocab size " + std::to_string(vocab_size));
  }
  c.params.pooling = static_cast<Pooling>(pooling);
  c.params.table.resize(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t col = 0; col < cols; ++col) {
      c.params.table(r, col) = read_f64(in);
    }
  }

  const int flag = in.get();
  if (flag == EOF) throw ParseError("truncated checkpoint");
  if (flag == 1) {
    CrossHead head;
    const std::uint32_t dim = read_u32(in);
    if (dim != cols) {
      throw ValidationError("checkpoint shape mismatch: cross head dim " + std::to_string(dim) +
                            " vs table dim " + std::to_string(cols));
    }
    head.weight.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) head.weight(i) = read_f64(in);
    head.bias = read_f64(in);
    c.cross_head = std::move(head);
  } else if (flag != 0) {
    throw ParseError("invalid cross-head flag in checkpoint");
  }

  const std::uint64_t meta_len = read_u64(in);
  const std::string meta = read_bytes(in, meta_len);
  try {
    c.metadata = nlohmann::json::parse(meta);
  } catch (const nlohmann::json::exception&) {
    throw ParseError("invalid checkpoint metadata JSON");
  }
  return c;
}

}  // namespace kgtext
