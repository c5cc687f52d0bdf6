// Command-line front end wiring the kgtext library into reproducible
// pipelines. Every subcommand is a pure function of (inputs, flags, seed)
// and writes its artifacts plus a run.json under --out.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgtext/augment.hpp"
#include "kgtext/corpus.hpp"
#include "kgtext/encoder.hpp"
#include "kgtext/errors.hpp"
#include "kgtext/metric.hpp"
#include "kgtext/retrieval.hpp"
#include "kgtext/rng.hpp"
#include "kgtext/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kgtext;

namespace {

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void write_run_record(const fs::path& out_dir, const std::string& subcommand,
                      const json& resolved) {
  fs::create_directories(out_dir);
  json run = {{"subcommand", subcommand}, {"config", resolved}};
  write_json(run, out_dir / "run.json");
}

SymmetricRegistry load_registry(const std::string& path) {
  if (path.empty()) return SymmetricRegistry::defaults();
  return SymmetricRegistry::load(path);
}

PairScorer make_scorer(const Checkpoint& ckpt) {
  if (ckpt.cross_head) {
    return [&ckpt](const std::string& text, const RdfGraph& graph) {
      return eredat_score(ckpt.params, ckpt.params, *ckpt.cross_head, ckpt.vocab, text, graph);
    };
  }
  return [&ckpt](const std::string& text, const RdfGraph& graph) {
    return bi_score(ckpt.params, ckpt.vocab, text, graph);
  };
}

std::vector<Page> load_pages(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pages file: " + path);
  std::vector<Page> pages;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      pages.push_back({rec.at("entity").get<std::string>(), rec.at("text").get<std::string>()});
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pages;
}

std::vector<Triple> load_triples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open triples file: " + path);
  std::vector<Triple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      triples.emplace_back(rec.at(0).get<std::string>(), rec.at(1).get<std::string>(),
                           rec.at(2).get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return triples;
}

std::map<std::string, std::vector<std::string>> load_aliases(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw IoError("cannot open aliases file: " + path);
  json rec;
  try {
    rec = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  std::map<std::string, std::vector<std::string>> aliases;
  for (auto& [entity, list] : rec.items()) {
    aliases[entity] = list.get<std::vector<std::string>>();
  }
  return aliases;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgtext: contrastive graph-text embeddings, retrieval and scoring"};
  app.require_subcommand(1);
  app.set_config("--config");

  // gen-toy
  std::string out_dir;
  std::size_t gt_entities = 40, gt_properties = 8, gt_pairs = 500;
  std::uint64_t seed = 0;
  auto* gen_toy = app.add_subcommand("gen-toy", "generate a deterministic synthetic corpus");
  gen_toy->add_option("--entities", gt_entities, "number of entities")->capture_default_str();
  gen_toy->add_option("--properties", gt_properties, "number of properties")
      ->capture_default_str();
  gen_toy->add_option("--pairs", gt_pairs, "number of pairs")->capture_default_str();
  gen_toy->add_option("--seed", seed, "random seed")->capture_default_str();
  gen_toy->add_option("--out", out_dir, "output directory")->required();

  // stats
  std::string data_path;
  auto* stats = app.add_subcommand("stats", "dataset statistics");
  stats->add_option("--data", data_path, "dataset JSONL")->required();
  stats->add_option("--out", out_dir, "output directory")->required();

  // mix
  std::vector<std::string> mix_paths;
  auto* mix = app.add_subcommand("mix", "equal-size seeded mixture of datasets");
  mix->add_option("--data", mix_paths, "dataset JSONL (repeatable)")->required()->expected(-2);
  mix->add_option("--seed", seed, "random seed")->capture_default_str();
  mix->add_option("--out", out_dir, "output directory")->required();

  // align-chunks
  std::string pages_path, triples_path, aliases_path;
  std::size_t chunk_words = 100;
  auto* align = app.add_subcommand("align-chunks", "distant-supervision passage alignment");
  align->add_option("--pages", pages_path, "pages JSONL: {entity, text}")->required();
  align->add_option("--triples", triples_path, "triples JSONL: [s, p, o]")->required();
  align->add_option("--aliases", aliases_path, "JSON object: entity -> [aliases]");
  align->add_option("--chunk-words", chunk_words, "words per passage")->capture_default_str();
  align->add_option("--out", out_dir, "output directory")->required();

  // build-vocab
  std::size_t min_count = 1;
  auto* bvocab = app.add_subcommand("build-vocab", "build a token vocabulary from a dataset");
  bvocab->add_option("--data", data_path, "dataset JSONL")->required();
  bvocab->add_option("--min-count", min_count, "minimum token count")->capture_default_str();
  bvocab->add_option("--out", out_dir, "output directory")->required();

  // train
  TrainConfig tc;
  std::string pooling_name = "bag";
  std::string registry_path;
  double eval_fraction = 0.0;
  auto* train_cmd = app.add_subcommand("train", "contrastive training with in-batch negatives");
  train_cmd->add_option("--data", data_path, "dataset JSONL")->required();
  train_cmd->add_option("--epochs", tc.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", tc.batch_size, "batch size")->capture_default_str();
  train_cmd->add_option("--lr", tc.learning_rate, "learning rate")->capture_default_str();
  train_cmd->add_option("--temperature", tc.temperature, "softmax temperature")
      ->capture_default_str();
  train_cmd->add_option("--hard-negatives", tc.negatives.hard, "hard negatives per positive")
      ->capture_default_str();
  train_cmd
      ->add_option("--inverted-negatives", tc.negatives.inverted,
                   "inverted negatives per positive")
      ->capture_default_str();
  train_cmd->add_option("--dim", tc.dim, "embedding dimensionality")->capture_default_str();
  train_cmd->add_option("--pooling", pooling_name, "bag|positional")->capture_default_str();
  train_cmd->add_option("--eval-fraction", eval_fraction, "held-out fraction for epoch eval")
      ->capture_default_str();
  train_cmd->add_option("--registry", registry_path, "symmetric-predicate list file");
  train_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  train_cmd->add_option("--out", out_dir, "output directory")->required();

  // eval-retrieval
  std::string checkpoint_path, direction_name = "graph2text";
  auto* eval_cmd = app.add_subcommand("eval-retrieval", "top-1 retrieval accuracy");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  eval_cmd->add_option("--data", data_path, "dataset JSONL")->required();
  eval_cmd->add_option("--direction", direction_name, "graph2text|text2graph")
      ->capture_default_str();
  eval_cmd->add_option("--out", out_dir, "output directory")->required();

  // augment
  NegativePolicy policy;
  bool emit_benchmark = false;
  auto* augment_cmd = app.add_subcommand("augment", "emit synthetic negatives or an inversion "
                                                    "benchmark for a dataset");
  augment_cmd->add_option("--data", data_path, "dataset JSONL")->required();
  augment_cmd->add_option("--hard-negatives", policy.hard, "hard negatives per pair")
      ->capture_default_str();
  augment_cmd->add_option("--inverted-negatives", policy.inverted, "inverted negatives per pair")
      ->capture_default_str();
  augment_cmd->add_flag("--benchmark", emit_benchmark,
                        "emit the single-triple inversion benchmark instead of negatives");
  augment_cmd->add_option("--registry", registry_path, "symmetric-predicate list file");
  augment_cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  augment_cmd->add_option("--out", out_dir, "output directory")->required();

  // finetune
  std::string judgments_path, criterion = "semantic_adequacy", mode = "bi";
  FinetuneConfig fc;
  auto* finetune_cmd = app.add_subcommand("finetune", "fine-tune on human judgments");
  finetune_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  finetune_cmd->add_option("--judgments", judgments_path, "judgments CSV")->required();
  finetune_cmd->add_option("--criterion", criterion, "target criterion")->capture_default_str();
  finetune_cmd->add_option("--mode", mode, "bi|cross")->capture_default_str();
  finetune_cmd->add_option("--epochs", fc.epochs, "epochs")->capture_default_str();
  finetune_cmd->add_option("--lr", fc.learning_rate, "learning rate")->capture_default_str();
  finetune_cmd->add_option("--seed", seed, "random seed (cross head init)")
      ->capture_default_str();
  finetune_cmd->add_option("--out", out_dir, "output directory")->required();

  // score
  std::string cross_checkpoint_path;
  auto* score_cmd = app.add_subcommand("score", "per-pair similarity scores for a dataset");
  score_cmd->add_option("--checkpoint", checkpoint_path, "bi-encoder checkpoint")->required();
  score_cmd->add_option("--cross-checkpoint", cross_checkpoint_path,
                        "cross-encoder checkpoint (enables the ensemble score)");
  score_cmd->add_option("--data", data_path, "dataset JSONL")->required();
  score_cmd->add_option("--out", out_dir, "output directory")->required();

  // correlate
  std::string scores_path;
  std::vector<std::string> criteria;
  bool by_graph_size = false;
  auto* correlate_cmd =
      app.add_subcommand("correlate", "Pearson correlation of scores with human judgments");
  correlate_cmd->add_option("--scores", scores_path, "scores JSON (id -> score)")->required();
  correlate_cmd->add_option("--judgments", judgments_path, "judgments CSV")->required();
  correlate_cmd->add_option("--criteria", criteria, "criteria (default: all present)");
  correlate_cmd->add_flag("--by-graph-size", by_graph_size, "add per-graph-size breakdown");
  correlate_cmd->add_option("--out", out_dir, "output directory")->required();

  // invtest
  std::string benchmark_path;
  auto* invtest_cmd = app.add_subcommand("invtest", "inversion-gap evaluation on a benchmark");
  invtest_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  invtest_cmd->add_option("--benchmark", benchmark_path, "inversion benchmark JSONL")->required();
  invtest_cmd->add_option("--out", out_dir, "output directory")->required();

  // histogram
  std::size_t bins = 20;
  auto* histogram_cmd = app.add_subcommand("histogram", "per-pair score histogram");
  histogram_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  histogram_cmd->add_option("--data", data_path, "dataset JSONL")->required();
  histogram_cmd->add_option("--bins", bins, "number of bins")->capture_default_str();
  histogram_cmd->add_option("--out", out_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out(out_dir);

    if (*gen_toy) {
      write_run_record(out, "gen-toy",
                       {{"entities", gt_entities},
                        {"properties", gt_properties},
                        {"pairs", gt_pairs},
                        {"seed", seed}});
      save_pairs(generate_toy_corpus(gt_entities, gt_properties, gt_pairs, seed),
                 (out / "dataset.jsonl").string());
    } else if (*stats) {
      write_run_record(out, "stats", {{"data", data_path}});
      const DatasetStats s = dataset_stats(load_pairs(data_path));
      write_json({{"pair_count", s.pair_count},
                  {"distinct_property_count", s.distinct_property_count},
                  {"distinct_entity_count", s.distinct_entity_count}},
                 out / "stats.json");
    } else if (*mix) {
      write_run_record(out, "mix", {{"data", mix_paths}, {"seed", seed}});
      std::vector<Dataset> datasets;
      for (const auto& p : mix_paths) datasets.push_back(load_pairs(p));
      save_pairs(mix_equal(datasets, seed), (out / "mixed.jsonl").string());
    } else if (*align) {
      write_run_record(out, "align-chunks",
                       {{"pages", pages_path},
                        {"triples", triples_path},
                        {"aliases", aliases_path},
                        {"chunk_words", chunk_words}});
      const Dataset d = build_aligned_chunks(load_pages(pages_path), load_triples(triples_path),
                                             load_aliases(aliases_path), chunk_words);
      save_pairs(d, (out / "aligned.jsonl").string());
    } else if (*bvocab) {
      write_run_record(out, "build-vocab", {{"data", data_path}, {"min_count", min_count}});
      const Dataset d = load_pairs(data_path);
      std::vector<std::string> corpus;
      for (const auto& p : d.pairs) {
        corpus.push_back(p.text);
        corpus.push_back(linearize(p.graph));
      }
      build_vocab(corpus, min_count).save((out / "vocab.txt").string());
    } else if (*train_cmd) {
      if (pooling_name != "bag" && pooling_name != "positional") {
        throw ValidationError("--pooling must be bag or positional");
      }
      tc.pooling = pooling_name == "bag" ? Pooling::Bag : Pooling::Positional;
      tc.seed = seed;
      write_run_record(out, "train",
                       {{"data", data_path},
                        {"epochs", tc.epochs},
                        {"batch_size", tc.batch_size},
                        {"learning_rate", tc.learning_rate},
                        {"temperature", tc.temperature},
                        {"hard_negatives", tc.negatives.hard},
                        {"inverted_negatives", tc.negatives.inverted},
                        {"dim", tc.dim},
                        {"pooling", pooling_name},
                        {"eval_fraction", eval_fraction},
                        {"registry", registry_path},
                        {"seed", seed}});
      const Dataset d = load_pairs(data_path);
      TrainMetrics metrics;
      const Checkpoint ckpt =
          train(tc, d, load_registry(registry_path), &metrics, eval_fraction);
      save_checkpoint(ckpt, (out / "checkpoint.bin").string());

      std::ofstream log(out / "metrics.jsonl");
      if (!log) throw IoError("cannot write metrics log");
      for (const auto& rec : metrics.epochs) {
        json line = {{"epoch", rec.epoch}, {"mean_loss", rec.mean_loss}};
        if (rec.eval_accuracy) line["eval_accuracy"] = *rec.eval_accuracy;
        log << line.dump() << '\n';
      }
    } else if (*eval_cmd) {
      if (direction_name != "graph2text" && direction_name != "text2graph") {
        throw ValidationError("--direction must be graph2text or text2graph");
      }
      write_run_record(out, "eval-retrieval",
                       {{"checkpoint", checkpoint_path},
                        {"data", data_path},
                        {"direction", direction_name}});
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      const Direction dir = direction_name == "graph2text" ? Direction::GraphToText
                                                           : Direction::TextToGraph;
      const RetrievalReport report =
          eval_top1(ckpt.params, ckpt.vocab, load_pairs(data_path), dir);
      write_json({{"accuracy", report.accuracy},
                  {"n", report.n},
                  {"direction", direction_name},
                  {"checkpoint", checkpoint_path}},
                 out / "retrieval.json");
    } else if (*augment_cmd) {
      write_run_record(out, "augment",
                       {{"data", data_path},
                        {"hard_negatives", policy.hard},
                        {"inverted_negatives", policy.inverted},
                        {"benchmark", emit_benchmark},
                        {"registry", registry_path},
                        {"seed", seed}});
      const Dataset d = load_pairs(data_path);
      const SymmetricRegistry registry = load_registry(registry_path);
      if (emit_benchmark) {
        save_inversion_benchmark(build_inversion_benchmark(d, registry),
                                 (out / "benchmark.jsonl").string());
      } else {
        const CorruptionPool pool = CorruptionPool::from_dataset(d);
        Rng rng(seed);
        std::ofstream neg(out / "augmented.jsonl");
        if (!neg) throw IoError("cannot write augmented.jsonl");
        for (const auto& p : d.pairs) {
          for (int h = 0; h < policy.hard; ++h) {
            const RdfGraph g = corrupt_graph(p.graph, pool, rng);
            json triples = json::array();
            for (const auto& t : g.triples) triples.push_back({t.subject, t.predicate, t.object});
            neg << json({{"source_id", p.id}, {"kind", "hard"}, {"triples", triples}}).dump()
                << '\n';
          }
          for (int v = 0; v < policy.inverted; ++v) {
            const auto g = invert_graph(p.graph, registry, rng);
            if (!g) continue;
            json triples = json::array();
            for (const auto& t : g->triples) {
              triples.push_back({t.subject, t.predicate, t.object});
            }
            neg << json({{"source_id", p.id}, {"kind", "inverted"}, {"triples", triples}}).dump()
                << '\n';
          }
        }
      }
    } else if (*finetune_cmd) {
      if (mode != "bi" && mode != "cross") throw ValidationError("--mode must be bi or cross");
      write_run_record(out, "finetune",
                       {{"checkpoint", checkpoint_path},
                        {"judgments", judgments_path},
                        {"criterion", criterion},
                        {"mode", mode},
                        {"epochs", fc.epochs},
                        {"learning_rate", fc.learning_rate},
                        {"seed", seed}});
      Checkpoint ckpt = load_checkpoint(checkpoint_path);
      const auto judgments = load_judgments_csv(judgments_path);
      std::vector<double> trace;
      if (mode == "bi") {
        trace = finetune_bi(ckpt.params, ckpt.vocab, judgments, criterion, fc);
      } else {
        if (!ckpt.cross_head) {
          ckpt.cross_head = CrossHead::init(static_cast<std::size_t>(ckpt.params.dim()), seed);
        }
        trace = finetune_cross(ckpt.params, *ckpt.cross_head, ckpt.vocab, judgments, criterion,
                               fc);
      }
      ckpt.metadata["finetune"] = {{"criterion", criterion}, {"mode", mode},
                                   {"mse_trace", trace}};
      save_checkpoint(ckpt, (out / "checkpoint.bin").string());
      write_json({{"criterion", criterion}, {"mode", mode}, {"mse_trace", trace}},
                 out / "finetune.json");
    } else if (*score_cmd) {
      write_run_record(out, "score",
                       {{"checkpoint", checkpoint_path},
                        {"cross_checkpoint", cross_checkpoint_path},
                        {"data", data_path}});
      const Checkpoint bi = load_checkpoint(checkpoint_path);
      std::optional<Checkpoint> cross;
      if (!cross_checkpoint_path.empty()) {
        cross = load_checkpoint(cross_checkpoint_path);
        if (!cross->cross_head) {
          throw ValidationError("--cross-checkpoint has no cross head; run finetune --mode cross");
        }
      }
      const Dataset d = load_pairs(data_path);
      json scores = json::object();
      for (const auto& p : d.pairs) {
        scores[p.id] = cross ? eredat_score(bi.params, cross->params, *cross->cross_head,
                                            bi.vocab, p.text, p.graph)
                             : bi_score(bi.params, bi.vocab, p.text, p.graph);
      }
      write_json(scores, out / "scores.json");
    } else if (*correlate_cmd) {
      write_run_record(out, "correlate",
                       {{"scores", scores_path},
                        {"judgments", judgments_path},
                        {"criteria", criteria},
                        {"by_graph_size", by_graph_size}});
      std::ifstream sin(scores_path);
      if (!sin) throw IoError("cannot open scores file: " + scores_path);
      json scores_json;
      try {
        scores_json = json::parse(sin);
      } catch (const json::exception& e) {
        throw ParseError(scores_path + ": " + std::string(e.what()));
      }
      std::map<std::string, double> scores;
      for (auto& [id, v] : scores_json.items()) scores[id] = v.get<double>();

      const auto judgments = load_judgments_csv(judgments_path);
      if (criteria.empty()) criteria = judgment_criteria();
      const CorrelationReport report = correlate(scores, judgments, criteria, by_graph_size);

      json rep;
      for (const auto& [name, entry] : report.by_criterion) {
        rep["by_criterion"][name] = {{"r", entry.r}, {"n", entry.n}};
      }
      for (const auto& [name, groups] : report.by_graph_size) {
        for (const auto& [size, entry] : groups) {
          rep["by_graph_size"][name][std::to_string(size)] = {{"r", entry.r}, {"n", entry.n}};
        }
      }
      write_json(rep, out / "correlation.json");
    } else if (*invtest_cmd) {
      write_run_record(out, "invtest",
                       {{"checkpoint", checkpoint_path}, {"benchmark", benchmark_path}});
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      const InversionBenchmark bench = load_inversion_benchmark(benchmark_path);
      const InversionStats stats_out = inversion_gap_eval(make_scorer(ckpt), bench);
      write_json({{"mean_gap", stats_out.mean_gap},
                  {"fraction_misordered", stats_out.fraction_misordered},
                  {"n", bench.items.size()},
                  {"checkpoint", checkpoint_path}},
                 out / "invtest.json");
    } else if (*histogram_cmd) {
      write_run_record(out, "histogram",
                       {{"checkpoint", checkpoint_path}, {"data", data_path}, {"bins", bins}});
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      const Dataset d = load_pairs(data_path);
      const Histogram h = similarity_histogram(make_scorer(ckpt), d, bins);
      std::ofstream csv(out / "histogram.csv");
      if (!csv) throw IoError("cannot write histogram.csv");
      csv << "edge_low,edge_high,count\n";
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        csv << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
      }
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
