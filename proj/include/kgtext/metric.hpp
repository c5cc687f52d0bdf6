#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgtext/augment.hpp"
#include "kgtext/corpus.hpp"
#include "kgtext/encoder.hpp"
#include "kgtext/rdf.hpp"

namespace kgtext {

// Criterion names allowed in human judgments: the 2017 set
// {semantic_adequacy, grammaticality, fluency} and the 2020 set
// {data_coverage, relevance, correctness, text_structure, fluency}.
const std::vector<std::string>& judgment_criteria();

struct Rating {
  double value = 0.0;
  double scale_min = 0.0;
  double scale_max = 1.0;

  // Min-max normalized to [0, 1].
  double normalized() const;
};

// One human-rated (graph, candidate text) item.
struct HumanJudgment {
  std::string id;
  RdfGraph graph;
  std::string text;
  std::map<std::string, Rating> ratings;
};

// CSV with header id,criterion,rating,scale_min,scale_max,text,triples_json;
// rows sharing an id are merged into one judgment.
std::vector<HumanJudgment> load_judgments_csv(const std::string& path);
void save_judgments_csv(const std::vector<HumanJudgment>& judgments, const std::string& path);

// Bi-encoder similarity mapped to [0, 1]: (cosine + 1) / 2.
double bi_score(const EncoderParams& params, const Vocab& vocab, const std::string& text,
                const RdfGraph& graph);

// Cross-encoder score: logistic(w . embed(text ++ [SEP] ++ graph) + b); one
// encoder sees the concatenated sequence.
double cross_score(const EncoderParams& params, const CrossHead& head, const Vocab& vocab,
                   const std::string& text, const RdfGraph& graph);

// Arithmetic mean of the bi- and cross-encoder scores.
double eredat_score(const EncoderParams& bi_params, const EncoderParams& cross_params,
                    const CrossHead& head, const Vocab& vocab, const std::string& text,
                    const RdfGraph& graph);

struct FinetuneConfig {
  int epochs = 50;
  double learning_rate = 1.0;
};

// Full-batch gradient descent on MSE between bi_score and the normalized
// rating of `criterion`. Returns the MSE trace (initial value first, final
// value last). Throws when every rating is identical.
std::vector<double> finetune_bi(EncoderParams& params, const Vocab& vocab,
                                const std::vector<HumanJudgment>& judgments,
                                const std::string& criterion, const FinetuneConfig& config);

// Same objective through cross_score; the head is trained jointly with the
// encoder. Set train_encoder = false to fit the head alone.
std::vector<double> finetune_cross(EncoderParams& params, CrossHead& head, const Vocab& vocab,
                                   const std::vector<HumanJudgment>& judgments,
                                   const std::string& criterion, const FinetuneConfig& config,
                                   bool train_encoder = true);

// Sample Pearson correlation; throws on length mismatch, n < 2 or zero
// variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct CorrelationEntry {
  double r = 0.0;
  std::size_t n = 0;
};

struct CorrelationReport {
  std::map<std::string, CorrelationEntry> by_criterion;
  // criterion -> graph triple count -> entry; groups too small or degenerate
  // for Pearson are omitted.
  std::map<std::string, std::map<std::size_t, CorrelationEntry>> by_graph_size;
};

// Per-criterion Pearson r between scores and normalized ratings over the
// intersection of ids, optionally broken down by graph size.
CorrelationReport correlate(const std::map<std::string, double>& scores,
                            const std::vector<HumanJudgment>& judgments,
                            const std::vector<std::string>& criteria,
                            bool group_by_graph_size = false);

using PairScorer = std::function<double(const std::string& text, const RdfGraph& graph)>;

struct InversionStats {
  double mean_gap = 0.0;
  // Items with gap <= 0; a tie means the scorer is blind to the inversion,
  // which counts as a failure.
  double fraction_misordered = 0.0;
};

InversionStats inversion_gap_eval(const PairScorer& scorer, const InversionBenchmark& benchmark);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

// Uniform-bin histogram of per-pair scores over the observed score range.
Histogram similarity_histogram(const PairScorer& scorer, const Dataset& dataset,
                               std::size_t bins);

}  // namespace kgtext
