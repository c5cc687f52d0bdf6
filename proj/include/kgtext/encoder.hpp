#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace kgtext {

// Token inventory with contiguous ids; the reserved markers always occupy
// the first six ids regardless of corpus content.
class Vocab {
 public:
  static constexpr int kS = 0;
  static constexpr int kP = 1;
  static constexpr int kO = 2;
  static constexpr int kSep = 3;
  static constexpr int kUnk = 4;
  static constexpr int kPad = 5;
  static const std::vector<std::string>& reserved_tokens();

  // Reserved tokens only.
  Vocab();
  // From an explicit ordered token list (reserved tokens must come first).
  explicit Vocab(std::vector<std::string> tokens);

  int id(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Word tokens are lowercased alphanumeric runs with count >= min_count; ids
// are assigned by (count desc, token asc) after the reserved block.
Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t min_count = 1);

// Marker substrings map to their reserved ids; other words are lowercased
// alphanumeric runs, unknown ones mapping to [UNK].
std::vector<int> tokenize(const std::string& s, const Vocab& v);

// How token embeddings are pooled into one vector.
//  Bag:        plain mean, order-free; sums rows in ascending-id order so
//              permutation invariance is bit-exact.
//  Positional: mean of sinusoidally position-modulated embeddings,
//              order-sensitive. This is the pluggable order-aware backbone
//              used by the cross-encoder and inversion-robust training.
enum class Pooling : std::uint8_t { Bag = 0, Positional = 1 };

struct EncoderParams {
  Eigen::MatrixXd table;  // vocab_size x dim
  Pooling pooling = Pooling::Bag;

  Eigen::Index dim() const { return table.cols(); }
  Eigen::Index vocab_size() const { return table.rows(); }

  // Uniform init in [-0.5/dim, 0.5/dim], seeded.
  static EncoderParams init(std::size_t vocab_size, std::size_t dim, std::uint64_t seed,
                            Pooling pooling = Pooling::Bag);
};

// Pooled embedding over the non-[PAD] ids. Throws on an effectively empty
// sequence.
Eigen::VectorXd embed(const EncoderParams& params, std::span<const int> ids);

// Accumulates d(pooled)/d(table) * upstream into grad_table (same shape as
// the embedding table).
void embed_backward(const EncoderParams& params, std::span<const int> ids,
                    const Eigen::VectorXd& upstream, Eigen::MatrixXd& grad_table);

// Standard cosine similarity; throws on a zero vector.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Gradient of cosine(a, b) w.r.t. both arguments, scaled by `upstream`,
// accumulated into grad_a / grad_b.
void cosine_backward(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double upstream,
                     Eigen::VectorXd& grad_a, Eigen::VectorXd& grad_b);

// Linear scoring head on top of a pooled embedding (cross-encoder output).
struct CrossHead {
  Eigen::VectorXd weight;
  double bias = 0.0;

  static CrossHead init(std::size_t dim, std::uint64_t seed);
};

// Compares the analytic gradient of the in-batch contrastive loss against
// central finite differences over every touched table entry; returns the
// max relative error. Intended for small configurations (dim <= 16,
// batch <= 8).
double grad_check(const EncoderParams& params, const std::vector<std::vector<int>>& text_ids,
                  const std::vector<std::vector<int>>& graph_ids, double temperature,
                  double epsilon = 1e-5);

}  // namespace kgtext
