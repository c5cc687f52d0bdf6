#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "kgtext/corpus.hpp"
#include "kgtext/errors.hpp"
#include "kgtext/trainer.hpp"

using namespace kgtext;

namespace {

std::vector<Eigen::VectorXd> basis_vectors(int dim, const std::vector<int>& axes) {
  std::vector<Eigen::VectorXd> out;
  for (int a : axes) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
    v(a) = 1.0;
    out.push_back(v);
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("singleton batch has exactly zero loss") {
  const auto v = basis_vectors(3, {0});
  const LossResult r = contrastive_loss(v, v, 1.0);
  CHECK(r.loss == 0.0);
}

TEST_CASE("uniform logits give ln |J|") {
  // identical embeddings everywhere -> all similarities equal
  Eigen::VectorXd v(3);
  v << 0.3, -0.2, 0.9;
  const std::vector<Eigen::VectorXd> texts = {v, v};
  const std::vector<Eigen::VectorXd> graphs = {v, v, v, v};
  const LossResult r = contrastive_loss(texts, graphs, 1.0);
  CHECK(r.loss == doctest::Approx(std::log(4.0)).epsilon(1e-9));
}

TEST_CASE("diagonal similarity of 1 with |J|=2 gives ln(1+e^-1)") {
  const auto texts = basis_vectors(2, {0, 1});
  const auto graphs = basis_vectors(2, {0, 1});
  const LossResult r = contrastive_loss(texts, graphs, 1.0);
  CHECK(r.loss == doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-6));
}

TEST_CASE("dsim rows sum to zero") {
  const auto texts = basis_vectors(4, {0, 1, 2});
  auto graphs = basis_vectors(4, {0, 1, 2, 3});
  graphs[3](0) = 0.5;  // some off-axis similarity
  for (double temperature : {1.0, 0.1}) {
    const LossResult r = contrastive_loss(texts, graphs, temperature);
    for (Eigen::Index i = 0; i < r.dsim.rows(); ++i) {
      CHECK(std::abs(r.dsim.row(i).sum()) < 1e-12);
    }
  }
}

TEST_CASE("duplicating the positive as a negative raises the loss") {
  const auto texts = basis_vectors(3, {0, 1});
  const auto graphs = basis_vectors(3, {0, 1});
  auto with_dup = graphs;
  with_dup.push_back(graphs[0]);  // duplicate of text 0's positive
  const double base = contrastive_loss(texts, graphs, 1.0).loss;
  const double dup = contrastive_loss(texts, with_dup, 1.0).loss;
  CHECK(dup > base);
}

TEST_CASE("loss input validation") {
  const auto v = basis_vectors(2, {0});
  CHECK_THROWS_AS(contrastive_loss({}, v, 1.0), ValidationError);
  CHECK_THROWS_AS(contrastive_loss(basis_vectors(2, {0, 1}), v, 1.0), ValidationError);
  CHECK_THROWS_AS(contrastive_loss(v, v, 0.0), ValidationError);
}

TEST_CASE("training reduces the loss on a toy corpus") {
  const Dataset d = generate_toy_corpus(12, 3, 50, 5);
  TrainConfig c;
  c.epochs = 30;
  c.seed = 5;
  TrainMetrics m;
  train(c, d, SymmetricRegistry::defaults(), &m);
  REQUIRE(m.epochs.size() == 30);
  CHECK(m.epochs.back().mean_loss < m.epochs.front().mean_loss);
}

TEST_CASE("zero learning rate leaves parameters at initialization") {
  const Dataset d = generate_toy_corpus(8, 2, 10, 1);
  TrainConfig c;
  c.epochs = 5;
  c.learning_rate = 0.0;
  c.seed = 3;
  const Checkpoint trained = train(c, d, SymmetricRegistry::defaults());

  TrainConfig c0 = c;
  c0.epochs = 0;
  const Checkpoint untouched = train(c0, d, SymmetricRegistry::defaults());
  CHECK(trained.params.table == untouched.params.table);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const Dataset d = generate_toy_corpus(10, 3, 30, 2);
  TrainConfig c;
  c.epochs = 10;
  c.seed = 11;
  c.negatives = {1, 1};
  const Checkpoint a = train(c, d, SymmetricRegistry::defaults());
  const Checkpoint b = train(c, d, SymmetricRegistry::defaults());
  CHECK(a.params.table == b.params.table);

  save_checkpoint(a, "/tmp/kgtext_test_det_a.bin");
  save_checkpoint(b, "/tmp/kgtext_test_det_b.bin");
  CHECK(slurp("/tmp/kgtext_test_det_a.bin") == slurp("/tmp/kgtext_test_det_b.bin"));
}

TEST_CASE("checkpoint round-trip is bit-identical") {
  const Dataset d = generate_toy_corpus(8, 2, 10, 7);
  TrainConfig c;
  c.epochs = 3;
  c.seed = 7;
  Checkpoint ckpt = train(c, d, SymmetricRegistry::defaults());
  ckpt.cross_head = CrossHead::init(c.dim, 7);

  const std::string p1 = "/tmp/kgtext_test_ckpt1.bin";
  const std::string p2 = "/tmp/kgtext_test_ckpt2.bin";
  save_checkpoint(ckpt, p1);
  const Checkpoint loaded = load_checkpoint(p1);
  CHECK(loaded.params.table == ckpt.params.table);
  CHECK(loaded.vocab.tokens() == ckpt.vocab.tokens());
  REQUIRE(loaded.cross_head.has_value());
  CHECK(loaded.cross_head->weight == ckpt.cross_head->weight);
  CHECK(loaded.cross_head->bias == ckpt.cross_head->bias);

  save_checkpoint(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("checkpoint loader rejects corrupted files") {
  const Dataset d = generate_toy_corpus(8, 2, 10, 7);
  TrainConfig c;
  c.epochs = 1;
  const Checkpoint ckpt = train(c, d, SymmetricRegistry::defaults());
  const std::string path = "/tmp/kgtext_test_ckpt_bad.bin";
  save_checkpoint(ckpt, path);

  SUBCASE("altered version") {
    std::string bytes = slurp(path);
    bytes[4] = 99;  // version field
    std::ofstream(path, std::ios::binary) << bytes;
    CHECK_THROWS_AS(load_checkpoint(path), ValidationError);
  }
  SUBCASE("truncated file") {
    std::string bytes = slurp(path);
    bytes.resize(bytes.size() / 2);
    std::ofstream(path, std::ios::binary) << bytes;
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  SUBCASE("bad magic") {
    std::string bytes = slurp(path);
    bytes[0] = 'X';
    std::ofstream(path, std::ios::binary) << bytes;
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
}

TEST_CASE("full-pipeline gradient check with negatives in the batch") {
  const Dataset d = generate_toy_corpus(8, 3, 12, 13);
  const CorruptionPool pool = CorruptionPool::from_dataset(d);
  const auto& reg = SymmetricRegistry::defaults();

  std::vector<std::string> corpus;
  for (const auto& p : d.pairs) {
    corpus.push_back(p.text);
    corpus.push_back(linearize(p.graph));
  }
  const Vocab vocab = build_vocab(corpus);

  Rng rng(2);
  const std::vector<PairExample> pairs(d.pairs.begin(), d.pairs.begin() + 4);
  const AugmentedBatch aug = augment_batch(pairs, {1, 1}, pool, reg, rng);
  Batch batch;
  for (const auto& t : aug.texts) batch.texts.push_back(tokenize(t, vocab));
  for (const auto& g : aug.linearized_graphs) batch.graphs.push_back(tokenize(g, vocab));

  for (Pooling pooling : {Pooling::Bag, Pooling::Positional}) {
    EncoderParams p = EncoderParams::init(vocab.size(), 8, 21, pooling);
    CHECK(grad_check(p, batch.texts, batch.graphs, 0.05) < 1e-4);
  }
}
