#include "kgtext/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kgtext/errors.hpp"

namespace kgtext {

namespace {

using nlohmann::json;

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<int> concat_ids(const Vocab& vocab, const std::string& text, const RdfGraph& graph) {
  std::vector<int> ids = tokenize(text, vocab);
  ids.push_back(Vocab::kSep);
  for (int id : tokenize(linearize(graph), vocab)) ids.push_back(id);
  return ids;
}

// RFC-4180-style CSV: quoted fields may contain commas, escaped quotes and
// newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& content,
                                                const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (row.size() > 1 || !row[0].empty()) rows.push_back(std::move(row));
    row.clear();
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError(path + ": unterminated quoted CSV field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

bool is_known_criterion(const std::string& name) {
  const auto& known = judgment_criteria();
  return std::find(known.begin(), known.end(), name) != known.end();
}

struct FinetuneItem {
  std::vector<int> text_ids;
  std::vector<int> graph_ids;  // linearized graph, or concatenated sequence
  double target = 0.0;
};

std::vector<FinetuneItem> collect_items(const Vocab& vocab,
                                        const std::vector<HumanJudgment>& judgments,
                                        const std::string& criterion, bool concatenated) {
  std::vector<FinetuneItem> items;
  for (const auto& j : judgments) {
    auto it = j.ratings.find(criterion);
    if (it == j.ratings.end()) continue;
    FinetuneItem item;
    if (concatenated) {
      item.graph_ids = concat_ids(vocab, j.text, j.graph);
    } else {
      item.text_ids = tokenize(j.text, vocab);
      item.graph_ids = tokenize(linearize(j.graph), vocab);
    }
    item.target = it->second.normalized();
    items.push_back(std::move(item));
  }
  if (items.empty()) {
    throw ValidationError("no judgments carry criterion '" + criterion + "'");
  }
  const double first = items.front().target;
  const bool degenerate = std::all_of(items.begin(), items.end(),
                                      [&](const auto& i) { return i.target == first; });
  if (degenerate) {
    throw ValidationError("degenerate judgment set: every '" + criterion +
                          "' rating is identical");
  }
  return items;
}

}  // namespace

const std::vector<std::string>& judgment_criteria() {
  static const std::vector<std::string> names = {
      "semantic_adequacy", "grammaticality", "fluency",
      "data_coverage",     "relevance",      "correctness",
      "text_structure",
  };
  return names;
}

double Rating::normalized() const {
  if (!(scale_max > scale_min)) {
    throw ValidationError("rating scale bounds must satisfy max > min");
  }
  return (value - scale_min) / (scale_max - scale_min);
}

std::vector<HumanJudgment> load_judgments_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open judgments file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rows = parse_csv(buf.str(), path);
  if (rows.empty()) throw ParseError(path + ": empty judgments file");

  const std::vector<std::string> expected = {"id",        "criterion", "rating", "scale_min",
                                             "scale_max", "text",      "triples_json"};
  if (rows[0] != expected) {
    throw ParseError(path + ": bad header; expected id,criterion,rating,scale_min,scale_max," +
                     "text,triples_json");
  }

  std::vector<HumanJudgment> judgments;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path + ":row " + std::to_string(r + 1);
    if (row.size() != expected.size()) {
      throw ParseError(where + ": expected " + std::to_string(expected.size()) + " fields, got " +
                       std::to_string(row.size()));
    }
    const std::string& id = row[0];
    const std::string& criterion = row[1];
    if (!is_known_criterion(criterion)) {
      throw ValidationError(where + ": unknown criterion '" + criterion + "'");
    }

    Rating rating;
    try {
      rating.value = std::stod(row[2]);
      rating.scale_min = std::stod(row[3]);
      rating.scale_max = std::stod(row[4]);
    } catch (const std::exception&) {
      throw ParseError(where + ": non-numeric rating or scale bound");
    }
    if (!(rating.scale_max > rating.scale_min) || rating.value < rating.scale_min ||
        rating.value > rating.scale_max) {
      throw ValidationError(where + ": rating outside declared scale bounds");
    }

    std::vector<Triple> triples;
    try {
      for (const auto& t : json::parse(row[6])) {
        triples.emplace_back(t.at(0).get<std::string>(), t.at(1).get<std::string>(),
                             t.at(2).get<std::string>());
      }
    } catch (const json::exception& e) {
      throw ParseError(where + ": invalid triples_json: " + e.what());
    }
    if (triples.empty()) throw ValidationError(where + ": empty triples_json");

    auto it = by_id.find(id);
    if (it == by_id.end()) {
      judgments.push_back({id, RdfGraph(std::move(triples)), row[5], {{criterion, rating}}});
      by_id[id] = judgments.size() - 1;
    } else {
      judgments[it->second].ratings[criterion] = rating;
    }
  }
  return judgments;
}

void save_judgments_csv(const std::vector<HumanJudgment>& judgments, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write judgments file: " + path);
  out << "id,criterion,rating,scale_min,scale_max,text,triples_json\n";
  for (const auto& j : judgments) {
    json triples = json::array();
    for (const auto& t : j.graph.triples) triples.push_back({t.subject, t.predicate, t.object});
    const std::string triples_json = triples.dump();
    for (const auto& [criterion, rating] : j.ratings) {
      out << csv_quote(j.id) << ',' << criterion << ',' << rating.value << ','
          << rating.scale_min << ',' << rating.scale_max << ',' << csv_quote(j.text) << ','
          << csv_quote(triples_json) << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

double bi_score(const EncoderParams& params, const Vocab& vocab, const std::string& text,
                const RdfGraph& graph) {
  const Eigen::VectorXd t = embed(params, tokenize(text, vocab));
  const Eigen::VectorXd g = embed(params, tokenize(linearize(graph), vocab));
  return (cosine(t, g) + 1.0) / 2.0;
}

double cross_score(const EncoderParams& params, const CrossHead& head, const Vocab& vocab,
                   const std::string& text, const RdfGraph& graph) {
  const Eigen::VectorXd e = embed(params, concat_ids(vocab, text, graph));
  return logistic(head.weight.dot(e) + head.bias);
}

double eredat_score(const EncoderParams& bi_params, const EncoderParams& cross_params,
                    const CrossHead& head, const Vocab& vocab, const std::string& text,
                    const RdfGraph& graph) {
  return (bi_score(bi_params, vocab, text, graph) +
          cross_score(cross_params, head, vocab, text, graph)) /
         2.0;
}

std::vector<double> finetune_bi(EncoderParams& params, const Vocab& vocab,
                                const std::vector<HumanJudgment>& judgments,
                                const std::string& criterion, const FinetuneConfig& config) {
  const auto items = collect_items(vocab, judgments, criterion, /*concatenated=*/false);
  const double inv_n = 1.0 / static_cast<double>(items.size());

  std::vector<double> mse_trace;
  for (int epoch = 0; epoch <= config.epochs; ++epoch) {
    Eigen::MatrixXd grad_table = Eigen::MatrixXd::Zero(params.vocab_size(), params.dim());
    double mse = 0.0;
    for (const auto& item : items) {
      const Eigen::VectorXd t = embed(params, item.text_ids);
      const Eigen::VectorXd g = embed(params, item.graph_ids);
      const double s = (cosine(t, g) + 1.0) / 2.0;
      const double err = s - item.target;
      mse += err * err * inv_n;

      // d(mse)/d(cosine) = 2*err/N * 1/2
      Eigen::VectorXd grad_t = Eigen::VectorXd::Zero(params.dim());
      Eigen::VectorXd grad_g = Eigen::VectorXd::Zero(params.dim());
      cosine_backward(t, g, err * inv_n, grad_t, grad_g);
      embed_backward(params, item.text_ids, grad_t, grad_table);
      embed_backward(params, item.graph_ids, grad_g, grad_table);
    }
    mse_trace.push_back(mse);
    if (epoch < config.epochs) {
      params.table -= config.learning_rate * grad_table;
    }
  }
  return mse_trace;
}

std::vector<double> finetune_cross(EncoderParams& params, CrossHead& head, const Vocab& vocab,
                                   const std::vector<HumanJudgment>& judgments,
                                   const std::string& criterion, const FinetuneConfig& config,
                                   bool train_encoder) {
  const auto items = collect_items(vocab, judgments, criterion, /*concatenated=*/true);
  const double inv_n = 1.0 / static_cast<double>(items.size());

  std::vector<double> mse_trace;
  for (int epoch = 0; epoch <= config.epochs; ++epoch) {
    Eigen::MatrixXd grad_table = Eigen::MatrixXd::Zero(params.vocab_size(), params.dim());
    Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(params.dim());
    double grad_b = 0.0;
    double mse = 0.0;
    for (const auto& item : items) {
      const Eigen::VectorXd e = embed(params, item.graph_ids);
      const double s = logistic(head.weight.dot(e) + head.bias);
      const double err = s - item.target;
      mse += err * err * inv_n;

      const double dz = 2.0 * err * s * (1.0 - s) * inv_n;
      grad_w += dz * e;
      grad_b += dz;
      if (train_encoder) {
        const Eigen::VectorXd grad_e = dz * head.weight;
        embed_backward(params, item.graph_ids, grad_e, grad_table);
      }
    }
    mse_trace.push_back(mse);
    if (epoch < config.epochs) {
      head.weight -= config.learning_rate * grad_w;
      head.bias -= config.learning_rate * grad_b;
      if (train_encoder) params.table -= config.learning_rate * grad_table;
    }
  }
  return mse_trace;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ValidationError("pearson: length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) throw ValidationError("pearson: need at least 2 points");

  const double inv_n = 1.0 / static_cast<double>(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i] * inv_n;
    my += ys[i] * inv_n;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

CorrelationReport correlate(const std::map<std::string, double>& scores,
                            const std::vector<HumanJudgment>& judgments,
                            const std::vector<std::string>& criteria,
                            bool group_by_graph_size) {
  CorrelationReport report;
  bool any = false;
  for (const auto& criterion : criteria) {
    std::vector<double> xs, ys;
    std::vector<std::size_t> sizes;
    for (const auto& j : judgments) {
      auto s = scores.find(j.id);
      if (s == scores.end()) continue;
      auto r = j.ratings.find(criterion);
      if (r == j.ratings.end()) continue;
      xs.push_back(s->second);
      ys.push_back(r->second.normalized());
      sizes.push_back(j.graph.size());
    }
    if (xs.empty()) continue;
    any = true;
    report.by_criterion[criterion] = {pearson(xs, ys), xs.size()};

    if (group_by_graph_size) {
      std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> groups;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        groups[sizes[i]].first.push_back(xs[i]);
        groups[sizes[i]].second.push_back(ys[i]);
      }
      for (const auto& [size, data] : groups) {
        try {
          report.by_graph_size[criterion][size] = {pearson(data.first, data.second),
                                                   data.first.size()};
        } catch (const ValidationError&) {
          // group too small or degenerate; omitted from the breakdown
        }
      }
    }
  }
  if (!any) {
    throw ValidationError("correlate: no overlap between scores and judgments");
  }
  return report;
}

InversionStats inversion_gap_eval(const PairScorer& scorer, const InversionBenchmark& benchmark) {
  if (benchmark.items.empty()) throw ValidationError("inversion_gap_eval: empty benchmark");

  double gap_sum = 0.0;
  std::size_t misordered = 0;
  for (const auto& item : benchmark.items) {
    const double gap = scorer(item.text, item.graph) - scorer(item.text, item.inverted_graph);
    gap_sum += gap;
    if (gap <= 0.0) ++misordered;
  }
  const double n = static_cast<double>(benchmark.items.size());
  return {gap_sum / n, static_cast<double>(misordered) / n};
}

Histogram similarity_histogram(const PairScorer& scorer, const Dataset& dataset,
                               std::size_t bins) {
  if (bins < 1) throw ValidationError("similarity_histogram: bins must be >= 1");
  if (dataset.pairs.empty()) throw ValidationError("similarity_histogram: empty dataset");

  std::vector<double> values;
  values.reserve(dataset.pairs.size());
  for (const auto& p : dataset.pairs) values.push_back(scorer(p.text, p.graph));

  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram h;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) {
    h.edges.push_back(lo + width * static_cast<double>(b));
  }
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    if (b >= bins) b = bins - 1;  // top edge inclusive
    ++h.counts[b];
  }
  return h;
}

}  // namespace kgtext
