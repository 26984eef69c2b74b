#pragma once

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topseg/checkpoint.hpp"
#include "topseg/config.hpp"
#include "topseg/grid.hpp"
#include "topseg/synth.hpp"

namespace topseg {

namespace detail {

inline Json report_json(const EvalReport& r) {
  return Json{{"precision", r.precision()},
              {"recall", r.recall()},
              {"f1", r.f1()},
              {"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn}};
}

inline Json profile_json(const DatasetProfile& p) {
  return Json{{"documents", p.documents},
              {"segments", p.segments},
              {"sentences", p.sentences},
              {"sentence_len_mean", p.sentence_len_mean},
              {"sentence_len_std", p.sentence_len_std},
              {"segment_len_mean", p.segment_len_mean},
              {"segment_len_std", p.segment_len_std},
              {"boundary_rate", p.boundary_rate}};
}

inline std::vector<SegDocument> load_docs_arg(const std::string& input,
                                              const std::string& format,
                                              int segments,
                                              std::uint64_t seed) {
  CorpusSpec spec;
  spec.format = corpus_format_from(format);
  spec.path = input;
  spec.segments = segments;
  return load_corpus_docs(spec, segments, seed);
}

}  // namespace detail

// Command-line driver. `args` excludes the program name; returns the process
// exit code and reports failures as one line on stderr.
inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"topic segmentation toolkit"};
  app.require_subcommand(1);

  // ingest: normalize a corpus file into the toolkit's canonical form.
  auto* ingest = app.add_subcommand(
      "ingest", "Validate a corpus and rewrite it in canonical form");
  struct {
    std::string input, format = "wiki", output;
  } ing;
  ingest->add_option("--input", ing.input, "corpus file or directory")
      ->required();
  ingest->add_option("--format", ing.format, "wiki, chat, or docs")
      ->check(CLI::IsMember({"wiki", "chat", "docs"}));
  ingest->add_option("--output", ing.output, "output path")->required();
  ingest->callback([&] {
    if (ing.format == "chat") {
      auto convs = load_chat_corpus(ing.input);
      write_chat_corpus(convs, ing.output);
      std::cout << convs.size() << " conversations -> " << ing.output << "\n";
      return;
    }
    auto docs = ing.format == "wiki" ? load_wiki_corpus(ing.input)
                                     : read_documents(ing.input);
    write_documents(docs, ing.output);
    std::cout << docs.size() << " documents -> " << ing.output << "\n";
  });

  // build-docs: chunk conversations into K-segment labeled documents.
  auto* build = app.add_subcommand(
      "build-docs", "Group conversations into labeled documents");
  struct {
    std::string input, output;
    int segments = 5;
    std::uint64_t seed = 1;
  } bd;
  build->add_option("--input", bd.input, "chat corpus (JSONL)")->required();
  build->add_option("--segments", bd.segments, "conversations per document");
  build->add_option("--seed", bd.seed, "shuffle seed");
  build->add_option("--output", bd.output, "output documents (JSONL)")
      ->required();
  build->callback([&] {
    auto convs = load_chat_corpus(bd.input);
    auto docs = build_documents(convs, bd.segments, bd.seed);
    write_documents(docs, bd.output);
    std::cout << docs.size() << " documents -> " << bd.output << "\n";
  });

  // synth: generate a synthetic conversational corpus.
  auto* synth = app.add_subcommand(
      "synth", "Generate a synthetic topic-coherent chat corpus");
  SynthSpec sy;
  std::string synth_out;
  synth->add_option("--topics", sy.topics, "number of topics");
  synth->add_option("--conversations", sy.conversations,
                    "number of conversations");
  synth->add_option("--sent-len-mean", sy.sent_len_mean,
                    "mean words per sentence");
  synth->add_option("--sent-len-std", sy.sent_len_std,
                    "sentence length spread");
  synth->add_option("--sent-len-min", sy.sent_len_min, "shortest sentence");
  synth->add_option("--sent-len-max", sy.sent_len_max, "longest sentence");
  synth->add_option("--conv-len-min", sy.conv_len_min,
                    "fewest sentences per conversation");
  synth->add_option("--conv-len-max", sy.conv_len_max,
                    "most sentences per conversation");
  synth->add_option("--shared-fraction", sy.shared_fraction,
                    "probability a word comes from the shared pool");
  synth->add_option("--topic-pool", sy.topic_pool, "words per topic pool");
  synth->add_option("--shared-pool", sy.shared_pool, "shared pool size");
  synth->add_option("--word-tag", sy.word_tag,
                    "prefix attached to every generated word");
  synth->add_option("--seed", sy.seed, "generator seed");
  synth->add_option("--output", synth_out, "output chat corpus (JSONL)")
      ->required();
  synth->callback([&] {
    auto convs = synth_generate(sy);
    write_chat_corpus(convs, synth_out);
    std::cout << convs.size() << " conversations -> " << synth_out << "\n";
  });

  // stats: dataset profile as JSON on stdout.
  auto* stats =
      app.add_subcommand("stats", "Print a dataset profile as JSON");
  struct {
    std::string input, format = "docs";
    int segments = 5;
    std::uint64_t seed = 1;
  } st;
  stats->add_option("--input", st.input, "corpus path")->required();
  stats->add_option("--format", st.format, "wiki, chat, or docs")
      ->check(CLI::IsMember({"wiki", "chat", "docs"}));
  stats->add_option("--segments", st.segments,
                    "conversations per document (chat input)");
  stats->add_option("--seed", st.seed, "shuffle seed (chat input)");
  stats->callback([&] {
    auto docs = detail::load_docs_arg(st.input, st.format, st.segments, st.seed);
    std::cout << detail::profile_json(corpus_stats(docs)).dump(2) << "\n";
  });

  // train: fit a model per a run config, save a checkpoint.
  auto* train =
      app.add_subcommand("train", "Train a model from a JSON run config");
  struct {
    std::string config, checkpoint;
    bool quiet = false;
  } tr;
  train->add_option("--config", tr.config, "run config (JSON)")->required();
  train->add_option("--checkpoint", tr.checkpoint, "checkpoint output path")
      ->required();
  train->add_flag("--quiet", tr.quiet, "suppress per-epoch progress");
  train->callback([&] {
    RunConfig cfg = load_run_config(tr.config);
    require(cfg.model.is_object(),
            "run config: \"model\" is required for training");
    const auto fam =
        get_req<std::string>(cfg.model, "family", "run config model");
    CorpusSplits splits =
        load_corpus_splits(cfg.corpus, cfg.segments, cfg.seed);
    Vocabulary vocab = build_vocab_for(fam, cfg.model, splits.train);
    auto model = make_segmenter(fam, cfg.model, std::move(vocab), cfg.seed);
    TrainConfig tc = cfg.train;
    tc.quiet = tr.quiet;
    train_model(*model, splits.train, splits.dev, tc);
    save_checkpoint(*model, tr.checkpoint);
    EvalReport rep = evaluate_corpus(*model, splits.test, cfg.threshold);
    std::cout << detail::report_json(rep).dump(2) << "\n";
  });

  // finetune: continue training a checkpoint on another corpus.
  auto* fine = app.add_subcommand(
      "finetune", "Continue training a checkpoint on a new corpus");
  struct {
    std::string config, checkpoint, out;
    bool quiet = false;
  } fi;
  fine->add_option("--config", fi.config, "run config (JSON)")->required();
  fine->add_option("--checkpoint", fi.checkpoint, "checkpoint to start from")
      ->required();
  fine->add_option("--checkpoint-out", fi.out, "checkpoint output path")
      ->required();
  fine->add_flag("--quiet", fi.quiet, "suppress per-epoch progress");
  fine->callback([&] {
    RunConfig cfg = load_run_config(fi.config);
    auto model = load_checkpoint(fi.checkpoint);
    if (cfg.model.is_object()) {
      const auto fam =
          get_req<std::string>(cfg.model, "family", "run config model");
      require(fam == model->family(), "finetune: checkpoint family \"",
              model->family(), "\" does not match config family \"", fam,
              "\"");
    }
    CorpusSplits splits =
        load_corpus_splits(cfg.corpus, cfg.segments, cfg.seed);
    TrainConfig tc = cfg.train;
    tc.quiet = fi.quiet;
    finetune_model(*model, splits.train, splits.dev, tc);
    save_checkpoint(*model, fi.out);
    EvalReport rep = evaluate_corpus(*model, splits.test, cfg.threshold);
    std::cout << detail::report_json(rep).dump(2) << "\n";
  });

  // eval: score a checkpoint over a whole corpus file.
  auto* eval =
      app.add_subcommand("eval", "Evaluate a checkpoint on a corpus");
  struct {
    std::string checkpoint, input, format = "docs";
    int segments = 5;
    std::uint64_t seed = 1;
    double threshold = 0.5;
  } ev;
  eval->add_option("--checkpoint", ev.checkpoint, "checkpoint path")
      ->required();
  eval->add_option("--input", ev.input, "corpus path")->required();
  eval->add_option("--format", ev.format, "wiki, chat, or docs")
      ->check(CLI::IsMember({"wiki", "chat", "docs"}));
  eval->add_option("--segments", ev.segments,
                   "conversations per document (chat input)");
  eval->add_option("--seed", ev.seed, "shuffle seed (chat input)");
  eval->add_option("--threshold", ev.threshold, "boundary probability cutoff");
  eval->callback([&] {
    auto model = load_checkpoint(ev.checkpoint);
    auto docs = detail::load_docs_arg(ev.input, ev.format, ev.segments, ev.seed);
    EvalReport rep = evaluate_corpus(*model, docs, ev.threshold);
    std::cout << detail::report_json(rep).dump(2) << "\n";
  });

  // grid: task x model x loss experiment grid to CSV.
  auto* grid =
      app.add_subcommand("grid", "Run an experiment grid, write a CSV");
  struct {
    std::string config, out;
  } gr;
  grid->add_option("--config", gr.config, "grid spec (JSON)")->required();
  grid->add_option("--out", gr.out, "output CSV path")->required();
  grid->callback([&] {
    auto rows = run_grid(load_grid_spec(gr.config), gr.out);
    std::cout << rows.size() << " rows -> " << gr.out << "\n";
  });

  // sweep-segments: vary K, one CSV row per value.
  auto* sweep = app.add_subcommand(
      "sweep-segments", "Train and evaluate across segment counts");
  struct {
    std::string config, out;
  } sw;
  sweep->add_option("--config", sw.config, "sweep spec (JSON)")->required();
  sweep->add_option("--out", sw.out, "output CSV path")->required();
  sweep->callback([&] {
    auto rows = sweep_segments(load_sweep_spec(sw.config), sw.out);
    std::cout << rows.size() << " rows -> " << sw.out << "\n";
  });

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("seg");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace topseg
