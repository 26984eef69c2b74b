#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "topseg/checkpoint.hpp"
#include "topseg/config.hpp"
#include "topseg/evaluation.hpp"
#include "topseg/model_factory.hpp"
#include "topseg/training.hpp"

namespace topseg {

struct GridTask {
  std::string task_id;
  std::optional<std::string> pretrain;  // corpus names
  std::optional<std::string> finetune;
  std::string test;
};

struct GridModel {
  std::string name;
  std::string family;
  Json config;  // family + architecture keys
  double learning_rate = 0.0;
};

struct GridLoss {
  std::string name;
  LossSpec spec;
};

// Experiment grid: tasks x models x losses, one CSV row per cell, rows in
// declared order. Configuration errors abort before any cell runs; a cell
// whose training goes non-finite becomes a "failed" row.
struct GridSpec {
  std::uint64_t seed = 1;
  int segments = 5;
  double threshold = 0.5;
  int epochs = 10;
  int batch_size = 8;
  int workers = 1;
  std::map<std::string, CorpusSpec> corpora;
  std::vector<GridTask> tasks;
  std::vector<GridModel> models;
  std::vector<GridLoss> losses;

  static GridSpec from_json(const Json& j) {
    check_keys(j,
               {"seed", "segments", "threshold", "epochs", "batch_size",
                "workers", "corpora", "tasks", "models", "losses"},
               "grid spec");
    GridSpec g;
    g.seed = get_or<std::uint64_t>(j, "seed", 1);
    g.segments = get_or(j, "segments", 5);
    require(g.segments >= 2, "grid spec: \"segments\" must be >= 2");
    g.threshold = get_or(j, "threshold", 0.5);
    g.epochs = get_or(j, "epochs", 10);
    require(g.epochs >= 0, "grid spec: \"epochs\" must be >= 0");
    g.batch_size = get_or(j, "batch_size", 8);
    g.workers = get_or(j, "workers", 1);
    require(g.workers >= 1, "grid spec: \"workers\" must be >= 1");

    require(j.contains("corpora") && j["corpora"].is_object() &&
                !j["corpora"].empty(),
            "grid spec: \"corpora\" must be a non-empty object");
    for (auto it = j["corpora"].begin(); it != j["corpora"].end(); ++it) {
      g.corpora.emplace(it.key(), CorpusSpec::from_json(
                                      it.value(), cat("corpus \"", it.key(), "\"")));
    }

    require(j.contains("tasks") && j["tasks"].is_array() && !j["tasks"].empty(),
            "grid spec: \"tasks\" must be a non-empty array");
    for (const auto& tj : j["tasks"]) {
      check_keys(tj, {"task_id", "pretrain", "finetune", "test"}, "grid task");
      GridTask t;
      t.task_id = get_req<std::string>(tj, "task_id", "grid task");
      if (tj.contains("pretrain") && !tj["pretrain"].is_null()) {
        t.pretrain = tj["pretrain"].get<std::string>();
      }
      if (tj.contains("finetune") && !tj["finetune"].is_null()) {
        t.finetune = tj["finetune"].get<std::string>();
      }
      t.test = get_req<std::string>(tj, "test", "grid task");
      for (const auto* name : {&t.test, t.pretrain ? &*t.pretrain : nullptr,
                               t.finetune ? &*t.finetune : nullptr}) {
        if (name) {
          require(g.corpora.count(*name), "grid task \"", t.task_id,
                  "\": unknown corpus \"", *name, "\"");
        }
      }
      for (const auto& prev : g.tasks) {
        require(prev.task_id != t.task_id, "grid spec: duplicate task_id \"",
                t.task_id, "\"");
      }
      g.tasks.push_back(std::move(t));
    }

    require(j.contains("models") && j["models"].is_array() &&
                !j["models"].empty(),
            "grid spec: \"models\" must be a non-empty array");
    for (const auto& mj : j["models"]) {
      GridModel m;
      m.name = get_req<std::string>(mj, "name", "grid model");
      m.family = get_req<std::string>(mj, "family", "grid model");
      m.learning_rate = get_or(mj, "learning_rate", 0.0);
      m.config = mj;
      m.config.erase("name");
      m.config.erase("learning_rate");
      // validates architecture keys up front
      make_segmenter(m.family, m.config, Vocabulary::with_specials(), 0);
      g.models.push_back(std::move(m));
    }

    require(j.contains("losses") && j["losses"].is_array() &&
                !j["losses"].empty(),
            "grid spec: \"losses\" must be a non-empty array");
    for (const auto& lj : j["losses"]) {
      GridLoss l;
      l.spec = loss_from_json(lj, "grid loss");
      l.name = get_or<std::string>(lj, "name", l.spec.name());
      g.losses.push_back(std::move(l));
    }
    return g;
  }
};

inline GridSpec load_grid_spec(const std::string& path) {
  return GridSpec::from_json(load_json_file(path, "grid spec"));
}

struct GridRow {
  std::string task_id, model, loss, pretrain, finetune, test;
  bool failed = false;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
  int epochs = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  bool quote = s.find_first_of(",\"\n") != std::string::npos;
  if (!quote) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline constexpr const char* kGridCsvHeader =
    "task_id,model,loss,pretrain,finetune,test,precision,recall,f1,epochs,seed";

inline std::string grid_row_csv(const GridRow& r) {
  std::string line = detail::csv_escape(r.task_id) + "," +
                     detail::csv_escape(r.model) + "," +
                     detail::csv_escape(r.loss) + "," +
                     detail::csv_escape(r.pretrain) + "," +
                     detail::csv_escape(r.finetune) + "," +
                     detail::csv_escape(r.test) + ",";
  if (r.failed) {
    line += "failed,failed,failed";
  } else {
    line += detail::fixed6(r.precision) + "," + detail::fixed6(r.recall) +
            "," + detail::fixed6(r.f1);
  }
  line += "," + std::to_string(r.epochs) + "," + std::to_string(r.seed);
  return line;
}

// Stable per-cell seed; depends only on the grid seed and the cell's own
// coordinates, so any subset of cells reproduces the full run's rows.
inline std::uint64_t cell_seed(std::uint64_t base, const std::string& task_id,
                               const std::string& model,
                               const std::string& loss) {
  return derive_seed(base, cat(task_id, "|", model, "|", loss));
}

namespace detail {

struct PreparedCorpora {
  std::map<std::string, CorpusSplits> splits;

  static PreparedCorpora prepare(const GridSpec& g) {
    PreparedCorpora p;
    for (const auto& [name, spec] : g.corpora) {
      p.splits.emplace(name,
                       load_corpus_splits(spec, g.segments,
                                          derive_seed(g.seed, "corpus:" + name)));
    }
    return p;
  }
};

inline GridRow run_cell(const GridSpec& g, const PreparedCorpora& corpora,
                        const GridTask& task, const GridModel& model,
                        const GridLoss& loss) {
  GridRow row;
  row.task_id = task.task_id;
  row.model = model.name;
  row.loss = loss.name;
  row.pretrain = task.pretrain.value_or("-");
  row.finetune = task.finetune.value_or("-");
  row.test = task.test;
  row.epochs = g.epochs;
  row.seed = cell_seed(g.seed, task.task_id, model.name, loss.name);
  try {
    // With no pretrain corpus the cell trains from scratch on the test
    // corpus's own training split.
    const std::string train_name = task.pretrain.value_or(task.test);
    const CorpusSplits& primary = corpora.splits.at(train_name);
    Vocabulary vocab =
        build_vocab_for(model.family, model.config, primary.train);
    auto seg = make_segmenter(model.family, model.config, std::move(vocab),
                              row.seed);
    TrainConfig tc;
    tc.epochs = g.epochs;
    tc.batch_size = g.batch_size;
    tc.learning_rate = model.learning_rate;
    tc.threshold = g.threshold;
    tc.loss = loss.spec;
    tc.seed = row.seed;
    train_model(*seg, primary.train, primary.dev, tc);
    if (task.finetune) {
      const CorpusSplits& ft = corpora.splits.at(*task.finetune);
      TrainConfig ftc = tc;
      ftc.seed = derive_seed(row.seed, "finetune");
      finetune_model(*seg, ft.train, ft.dev, ftc);
    }
    const CorpusSplits& test = corpora.splits.at(task.test);
    EvalReport rep = evaluate_corpus(*seg, test.test, g.threshold);
    row.precision = rep.precision();
    row.recall = rep.recall();
    row.f1 = rep.f1();
  } catch (const NumericError&) {
    row.failed = true;
  }
  return row;
}

}  // namespace detail

inline std::vector<GridRow> run_grid(const GridSpec& g,
                                     const std::string& out_csv) {
  auto corpora = detail::PreparedCorpora::prepare(g);

  struct Cell {
    const GridTask* task;
    const GridModel* model;
    const GridLoss* loss;
  };
  std::vector<Cell> cells;
  for (const auto& t : g.tasks) {
    for (const auto& m : g.models) {
      for (const auto& l : g.losses) cells.push_back({&t, &m, &l});
    }
  }
  std::vector<GridRow> rows(cells.size());

  if (g.workers <= 1 || cells.size() <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      rows[i] = detail::run_cell(g, corpora, *cells[i].task, *cells[i].model,
                                 *cells[i].loss);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        rows[i] = detail::run_cell(g, corpora, *cells[i].task, *cells[i].model,
                                   *cells[i].loss);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t n = std::min(std::size_t(g.workers), cells.size());
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ofstream out(out_csv, std::ios::binary);
  require(out.good(), "grid: cannot write ", out_csv);
  out << kGridCsvHeader << "\n";
  for (const auto& r : rows) out << grid_row_csv(r) << "\n";
  require(out.good(), "grid: write failed for ", out_csv);
  return rows;
}

// ---------------------------------------------------------------------------
// segment-count sweep

struct SweepSpec {
  std::uint64_t seed = 1;
  std::string conversations;
  int k_min = 2, k_max = 10;
  double train_ratio = 0.6, dev_ratio = 0.2, test_ratio = 0.2;
  double threshold = 0.5;
  int epochs = 10;
  int batch_size = 8;
  std::string family;
  Json model;
  double learning_rate = 0.0;
  LossSpec loss;

  static SweepSpec from_json(const Json& j) {
    check_keys(j,
               {"seed", "conversations", "k_min", "k_max", "split",
                "threshold", "epochs", "batch_size", "model", "loss"},
               "sweep spec");
    SweepSpec s;
    s.seed = get_or<std::uint64_t>(j, "seed", 1);
    s.conversations = get_req<std::string>(j, "conversations", "sweep spec");
    require(std::filesystem::exists(s.conversations),
            "sweep spec: no such path: ", s.conversations);
    s.k_min = get_or(j, "k_min", 2);
    s.k_max = get_or(j, "k_max", 10);
    require(s.k_min >= 2, "sweep spec: k_min must be >= 2, got ", s.k_min);
    require(s.k_max <= 10, "sweep spec: k_max must be <= 10, got ", s.k_max);
    require(s.k_min <= s.k_max, "sweep spec: k_min > k_max");
    if (j.contains("split")) {
      auto v = j["split"].get<std::vector<double>>();
      require(v.size() == 3, "sweep spec: \"split\" must be [train,dev,test]");
      s.train_ratio = v[0];
      s.dev_ratio = v[1];
      s.test_ratio = v[2];
    }
    s.threshold = get_or(j, "threshold", 0.5);
    s.epochs = get_or(j, "epochs", 10);
    s.batch_size = get_or(j, "batch_size", 8);
    require(j.contains("model"), "sweep spec: missing \"model\"");
    s.model = j["model"];
    s.family = get_req<std::string>(s.model, "family", "sweep model");
    s.learning_rate = get_or(s.model, "learning_rate", 0.0);
    s.model.erase("learning_rate");
    make_segmenter(s.family, s.model, Vocabulary::with_specials(), 0);
    if (j.contains("loss")) s.loss = loss_from_json(j["loss"], "sweep loss");
    return s;
  }
};

inline SweepSpec load_sweep_spec(const std::string& path) {
  return SweepSpec::from_json(load_json_file(path, "sweep spec"));
}

struct SweepRow {
  int k = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

inline constexpr const char* kSweepCsvHeader = "k,precision,recall,f1";

// Rebuilds documents, splits, trains and evaluates once per K.
inline std::vector<SweepRow> sweep_segments(const SweepSpec& s,
                                            const std::string& out_csv) {
  auto conversations = load_chat_corpus(s.conversations);
  std::vector<SweepRow> rows;
  for (int k = s.k_min; k <= s.k_max; ++k) {
    try {
      auto docs = build_documents(conversations, k,
                                  derive_seed(s.seed, cat("docs-", k)));
      auto splits = split_corpus(docs, s.train_ratio, s.dev_ratio,
                                 s.test_ratio, derive_seed(s.seed, cat("split-", k)));
      Vocabulary vocab = build_vocab_for(s.family, s.model, splits.train);
      auto seg = make_segmenter(s.family, s.model, std::move(vocab),
                                derive_seed(s.seed, cat("model-", k)));
      TrainConfig tc;
      tc.epochs = s.epochs;
      tc.batch_size = s.batch_size;
      tc.learning_rate = s.learning_rate;
      tc.threshold = s.threshold;
      tc.loss = s.loss;
      tc.seed = derive_seed(s.seed, cat("train-", k));
      train_model(*seg, splits.train, splits.dev, tc);
      EvalReport rep = evaluate_corpus(*seg, splits.test, s.threshold);
      rows.push_back({k, rep.precision(), rep.recall(), rep.f1()});
    } catch (const NumericError& e) {
      throw Error(cat("sweep at K=", k, ": ", e.what()));
    } catch (const Error& e) {
      throw Error(cat("sweep at K=", k, ": ", e.what()));
    }
  }
  std::ofstream out(out_csv, std::ios::binary);
  require(out.good(), "sweep: cannot write ", out_csv);
  out << kSweepCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.k << "," << detail::fixed6(r.precision) << ","
        << detail::fixed6(r.recall) << "," << detail::fixed6(r.f1) << "\n";
  }
  require(out.good(), "sweep: write failed for ", out_csv);
  return rows;
}

}  // namespace topseg
