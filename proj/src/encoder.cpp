#include "kgtext/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "kgtext/errors.hpp"
#include "kgtext/rng.hpp"
#include "kgtext/trainer.hpp"

namespace kgtext {

namespace {

// Lexer shared by tokenize() and build_vocab(): marker substrings come out
// verbatim, everything else as lowercased alphanumeric runs.
std::vector<std::string> scan(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == '[') {
      if (s.compare(i, 5, "[SEP]") == 0) {
        out.emplace_back("[SEP]");
        i += 5;
        continue;
      }
      if (i + 2 < s.size() && s[i + 2] == ']' &&
          (s[i + 1] == 'S' || s[i + 1] == 'P' || s[i + 1] == 'O')) {
        out.emplace_back(s.substr(i, 3));
        i += 3;
        continue;
      }
    }
    if (std::isalnum(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      std::string word;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) {
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(s[j])));
        ++j;
      }
      out.push_back(std::move(word));
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

bool is_reserved(const std::string& token) {
  const auto& reserved = Vocab::reserved_tokens();
  return std::find(reserved.begin(), reserved.end(), token) != reserved.end();
}

// Position modulation for Pooling::Positional: factor 1 + 0.5*sin(k*w_c)
// per dimension, with geometrically spaced frequencies. Values stay in
// [0.5, 1.5], so the bag signal survives while token order becomes visible.
Eigen::VectorXd position_factors(std::size_t k, Eigen::Index dim) {
  Eigen::VectorXd m(dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double freq =
        std::pow(1000.0, -static_cast<double>(c) / static_cast<double>(dim));
    m(c) = 1.0 + 0.5 * std::sin(static_cast<double>(k) * freq);
  }
  return m;
}

}  // namespace

const std::vector<std::string>& Vocab::reserved_tokens() {
  static const std::vector<std::string> tokens = {"[S]", "[P]", "[O]", "[SEP]", "[UNK]", "[PAD]"};
  return tokens;
}

Vocab::Vocab() : Vocab(reserved_tokens()) {}

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  const auto& reserved = reserved_tokens();
  if (tokens_.size() < reserved.size() ||
      !std::equal(reserved.begin(), reserved.end(), tokens_.begin())) {
    throw ValidationError("vocab must start with the reserved tokens " +
                          std::string("[S] [P] [O] [SEP] [UNK] [PAD]"));
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate vocab token: " + tokens_[i]);
    }
  }
}

int Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ValidationError("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocab file: " + path);
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocab file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

Vocab build_vocab(const std::vector<std::string>& corpus, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus) {
    for (auto& token : scan(s)) {
      if (!is_reserved(token)) ++counts[token];
    }
  }

  std::vector<std::pair<std::string, std::size_t>> words(counts.begin(), counts.end());
  std::sort(words.begin(), words.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> tokens = Vocab::reserved_tokens();
  for (auto& [word, count] : words) {
    if (count >= min_count) tokens.push_back(std::move(word));
  }
  return Vocab(std::move(tokens));
}

std::vector<int> tokenize(const std::string& s, const Vocab& v) {
  std::vector<int> ids;
  for (const auto& token : scan(s)) ids.push_back(v.id(token));
  return ids;
}

EncoderParams EncoderParams::init(std::size_t vocab_size, std::size_t dim, std::uint64_t seed,
                                  Pooling pooling) {
  if (dim < 2) throw ValidationError("embedding dim must be >= 2");
  Rng rng(seed);
  const double bound = 0.5 / static_cast<double>(dim);
  EncoderParams p;
  p.pooling = pooling;
  p.table.resize(static_cast<Eigen::Index>(vocab_size), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < p.table.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.table.cols(); ++c) {
      p.table(r, c) = rng.real(-bound, bound);
    }
  }
  return p;
}

Eigen::VectorXd embed(const EncoderParams& params, std::span<const int> ids) {
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(params.dim());

  if (params.pooling == Pooling::Bag) {
    // Ascending-id accumulation makes mean pooling exactly permutation
    // invariant, not just up to rounding.
    std::map<int, int> counts;
    std::size_t n = 0;
    for (int id : ids) {
      if (id == Vocab::kPad) continue;
      ++counts[id];
      ++n;
    }
    if (n == 0) throw ValidationError("embed: no non-[PAD] tokens");
    for (const auto& [id, count] : counts) {
      pooled += static_cast<double>(count) * params.table.row(id).transpose();
    }
    pooled /= static_cast<double>(n);
    return pooled;
  }

  // Positional: mean of position-modulated token embeddings.
  std::size_t k = 0;
  for (int id : ids) {
    if (id == Vocab::kPad) continue;
    pooled += position_factors(k, params.dim())
                  .cwiseProduct(params.table.row(id).transpose());
    ++k;
  }
  if (k == 0) throw ValidationError("embed: no non-[PAD] tokens");
  pooled /= static_cast<double>(k);
  return pooled;
}

void embed_backward(const EncoderParams& params, std::span<const int> ids,
                    const Eigen::VectorXd& upstream, Eigen::MatrixXd& grad_table) {
  if (params.pooling == Pooling::Bag) {
    std::size_t n = 0;
    for (int id : ids) {
      if (id != Vocab::kPad) ++n;
    }
    if (n == 0) return;
    const double scale = 1.0 / static_cast<double>(n);
    for (int id : ids) {
      if (id == Vocab::kPad) continue;
      grad_table.row(id) += scale * upstream.transpose();
    }
    return;
  }

  std::size_t n = 0;
  for (int id : ids) {
    if (id != Vocab::kPad) ++n;
  }
  if (n == 0) return;
  const double scale = 1.0 / static_cast<double>(n);
  std::size_t k = 0;
  for (int id : ids) {
    if (id == Vocab::kPad) continue;
    grad_table.row(id) +=
        scale * position_factors(k, params.dim()).cwiseProduct(upstream).transpose();
    ++k;
  }
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw ValidationError("cosine: zero-norm embedding");
  return a.dot(b) / (na * nb);
}

void cosine_backward(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double upstream,
                     Eigen::VectorXd& grad_a, Eigen::VectorXd& grad_b) {
  const double na = a.norm();
  const double nb = b.norm();
  const double inv = 1.0 / (na * nb);
  const double c = a.dot(b) * inv;
  grad_a += upstream * (b * inv - c / (na * na) * a);
  grad_b += upstream * (a * inv - c / (nb * nb) * b);
}

CrossHead CrossHead::init(std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  CrossHead head;
  head.weight.resize(static_cast<Eigen::Index>(dim));
  const double bound = 0.5 / static_cast<double>(dim);
  for (Eigen::Index i = 0; i < head.weight.size(); ++i) {
    head.weight(i) = rng.real(-bound, bound);
  }
  head.bias = 0.0;
  return head;
}

double grad_check(const EncoderParams& params, const std::vector<std::vector<int>>& text_ids,
                  const std::vector<std::vector<int>>& graph_ids, double temperature,
                  double epsilon) {
  Batch batch{text_ids, graph_ids};
  const BatchGrad analytic = loss_and_grad(params, batch, temperature);
  if (!std::isfinite(analytic.loss)) throw ValidationError("grad_check: non-finite loss");

  std::vector<int> touched(static_cast<std::size_t>(params.vocab_size()), 0);
  for (const auto& seq : text_ids) {
    for (int id : seq) touched[static_cast<std::size_t>(id)] = 1;
  }
  for (const auto& seq : graph_ids) {
    for (int id : seq) touched[static_cast<std::size_t>(id)] = 1;
  }

  EncoderParams probe = params;
  double max_rel = 0.0;
  for (Eigen::Index r = 0; r < params.vocab_size(); ++r) {
    if (!touched[static_cast<std::size_t>(r)]) continue;
    for (Eigen::Index c = 0; c < params.dim(); ++c) {
      const double saved = probe.table(r, c);
      probe.table(r, c) = saved + epsilon;
      const double up = loss_and_grad(probe, batch, temperature).loss;
      probe.table(r, c) = saved - epsilon;
      const double down = loss_and_grad(probe, batch, temperature).loss;
      probe.table(r, c) = saved;

      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic.grad_table(r, c);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
    }
  }
  return max_rel;
}

}  // namespace kgtext
