// Copyright 2026 The DEXA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dexa: command line front end for preparing data, running an annotation
// study server, simulating workers and evaluating annotation dumps.

#include <signal.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dexa/aggregation.h"
#include "dexa/agreement.h"
#include "dexa/corpus.h"
#include "dexa/embedding.h"
#include "dexa/error.h"
#include "dexa/http_server.h"
#include "dexa/json_format.h"
#include "dexa/report.h"
#include "dexa/retrieval.h"
#include "dexa/simulator.h"
#include "dexa/study.h"
#include "dexa/study_service.h"

namespace dexa {
namespace {

using json = nlohmann::json;

constexpr char kStoreEnv[] = "DEXA_STORE";
constexpr char kBindEnv[] = "DEXA_BIND";

std::string EnvOr(const char *name, std::string fallback) {
  const char *value = std::getenv(name);
  return value != nullptr && *value != '\0' ? value : fallback;
}

std::ofstream OpenOutput(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kUnavailable, "cannot write " + path);
  return out;
}

// Writes to `path`, or stdout when it is empty or "-".
template <typename F>
void WithOutput(const std::string &path, F write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out = OpenOutput(path);
  write(out);
  if (!out) Fail(ErrorCode::kUnavailable, "failed writing " + path);
}

SegmentationPolicy ParsePolicy(const std::string &name) {
  if (name == "rules") return SegmentationPolicy::kRuleBased;
  if (name == "lines") return SegmentationPolicy::kLines;
  Fail(ErrorCode::kInvalidArgument, "unknown segmentation '" + name + "'");
}

struct DatasetFlags {
  std::string corpus;
  std::string gold;
  std::string split;

  void Add(CLI::App *app, bool with_split = true) {
    app->add_option("--corpus", corpus, "Corpus JSON lines")->required();
    app->add_option("--gold", gold, "Gold span JSON lines")->required();
    if (with_split) {
      app->add_option("--split", split, "Split file from `split`")->required();
    }
  }

  ExpertCorpus Load() const {
    std::vector<Document> docs = LoadCorpus(corpus);
    GoldLabels labels = LoadGold(gold, docs);
    return LoadSplit(split, std::move(docs), std::move(labels));
  }
};

std::vector<Subtask> SubtasksFlag(const std::string &list) {
  return ParseSubtaskList(list);
}

GoldLabels TestGold(const ExpertCorpus &corpus) {
  std::vector<std::string> ids;
  for (const Sentence &s : corpus.test) ids.push_back(s.id());
  return corpus.gold.Restrict(ids);
}

size_t ParseSampleSize(const std::string &n) {
  if (n == "all" || n == "ALL") return kAllAnnotations;
  try {
    size_t pos = 0;
    const unsigned long v = std::stoul(n, &pos);
    if (pos == n.size() && v > 0) return v;
  } catch (const std::exception &) {
  }
  Fail(ErrorCode::kInvalidArgument, "bad sample size '" + n + "'");
}

// ingest -------------------------------------------------------------------

void AddIngest(CLI::App &root) {
  struct Flags {
    std::string input, output, segmentation = "rules";
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd = root.add_subcommand(
      "ingest", "Segment and tokenize raw reports into a corpus file");
  cmd->add_option("--input", flags->input,
                  "JSON lines {doc_id, title, abstract}")
      ->required();
  cmd->add_option("--output", flags->output, "Corpus output (default stdout)");
  cmd->add_option("--segmentation", flags->segmentation,
                  "Sentence segmentation: rules or lines")
      ->check(CLI::IsMember({"rules", "lines"}));
  cmd->callback([flags] {
    std::vector<Document> docs =
        LoadCorpus(flags->input, ParsePolicy(flags->segmentation));
    size_t sentences = 0;
    for (const Document &d : docs) sentences += d.sentences.size();
    WithOutput(flags->output,
               [&](std::ostream &out) { WriteCorpus(out, docs); });
    std::cerr << "ingested " << docs.size() << " documents, " << sentences
              << " sentences\n";
  });
}

// split --------------------------------------------------------------------

void AddSplit(CLI::App &root) {
  struct Flags {
    DatasetFlags data;
    size_t test_docs = 41;
    uint64_t seed = 0;
    std::string output;
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd = root.add_subcommand(
      "split", "Split expert documents into example pool and test set");
  flags->data.Add(cmd, /*with_split=*/false);
  cmd->add_option("--test-docs", flags->test_docs, "Documents in the test set");
  cmd->add_option("--seed", flags->seed, "Shuffle seed");
  cmd->add_option("--output", flags->output, "Split file (default stdout)");
  cmd->callback([flags] {
    std::vector<Document> docs = LoadCorpus(flags->data.corpus);
    GoldLabels gold = LoadGold(flags->data.gold, docs);
    ExpertCorpus corpus = SplitExpertSet(std::move(docs), std::move(gold),
                                         flags->test_docs, flags->seed);
    WithOutput(flags->output,
               [&](std::ostream &out) { WriteSplit(out, corpus); });
    std::cerr << "test: " << corpus.test_doc_ids.size() << " documents, "
              << corpus.test.size() << " sentences; train: "
              << corpus.train_doc_ids.size() << " documents, "
              << corpus.train.size() << " sentences\n";
  });
}

// index --------------------------------------------------------------------

void AddIndex(CLI::App &root) {
  struct Flags {
    std::string corpus, output;
    size_t dimension = HashedNgramEmbedder::kDefaultDimension;
    uint64_t seed = HashedNgramEmbedder::kDefaultSeed;
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd = root.add_subcommand(
      "index", "Write the built-in sentence embeddings as a table");
  cmd->add_option("--corpus", flags->corpus, "Corpus JSON lines")->required();
  cmd->add_option("--output", flags->output, "Table output (default stdout)");
  cmd->add_option("--dimension", flags->dimension, "Embedding dimension");
  cmd->add_option("--embedding-seed", flags->seed, "Feature hashing seed");
  cmd->callback([flags] {
    const std::vector<Document> docs = LoadCorpus(flags->corpus);
    HashedNgramEmbedder embedder(flags->dimension, flags->seed);
    std::vector<std::pair<std::string, EmbeddingVector>> rows;
    for (const Document &d : docs) {
      for (const Sentence &s : d.sentences) {
        rows.emplace_back(s.id(), embedder.Embed(s));
      }
    }
    WithOutput(flags->output, [&](std::ostream &out) {
      WriteEmbeddingTable(out, flags->dimension, rows);
    });
    std::cerr << "embedded " << rows.size() << " sentences with "
              << embedder.name() << "\n";
  });
}

// serve --------------------------------------------------------------------

struct StudyFlags {
  std::string subtasks = "P,I,O";
  size_t k = 3;
  size_t redundancy = 3;
  double min_approval = 0.90;
  double threshold = 0.5;
  double filter = 0.05;
  size_t testrun = 5;
  std::string embeddings;

  void Add(CLI::App *app) {
    app->add_option("--subtasks", subtasks, "Comma-separated sub-tasks");
    app->add_option("-k,--examples", k, "Dynamic examples per HIT");
    app->add_option("--redundancy", redundancy, "Annotations per sentence");
    app->add_option("--min-approval", min_approval,
                    "Minimum worker approval rate");
    app->add_option("--qualification-threshold", threshold,
                    "Minimum test-run kappa");
    app->add_option("--filter-fraction", filter,
                    "Minimum share of test sentences for evaluation");
    app->add_option("--testrun-sentences", testrun,
                    "Sentences in the qualification test run");
    app->add_option("--embeddings", embeddings,
                    "Precomputed embedding table (default: built-in)");
  }

  StudyConfig Config() const {
    StudyConfig c;
    c.subtasks = SubtasksFlag(subtasks);
    c.k = k;
    c.redundancy = redundancy;
    c.min_approval_rate = min_approval;
    c.qualification_threshold = threshold;
    c.worker_filter_fraction = filter;
    c.testrun_sentences = testrun;
    c.Validate();
    return c;
  }

  std::shared_ptr<const EmbeddingProvider> Provider() const {
    if (embeddings.empty()) return std::make_shared<HashedNgramEmbedder>();
    return LoadPrecomputed(embeddings);
  }
};

std::vector<Sentence> LoadUnlabeled(const std::string &path) {
  std::vector<Sentence> out;
  if (path.empty()) return out;
  for (Document &d : LoadCorpus(path)) {
    for (Sentence &s : d.sentences) out.push_back(std::move(s));
  }
  return out;
}

void AddServe(CLI::App &root) {
  struct Flags {
    DatasetFlags data;
    StudyFlags study;
    std::string unlabeled, store, bind, static_dir;
    int64_t hit_timeout_ms = 0;
    bool no_sync = false;
    int threads = 8;
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd =
      root.add_subcommand("serve", "Run the annotation study HTTP server");
  flags->data.Add(cmd);
  flags->study.Add(cmd);
  cmd->add_option("--unlabeled", flags->unlabeled,
                  "Corpus of sentences to annotate (besides the test set)");
  cmd->add_option("--store", flags->store,
                  std::string("Event log directory (env ") + kStoreEnv + ")");
  cmd->add_option("--bind", flags->bind,
                  std::string("host:port (env ") + kBindEnv +
                      ", default 127.0.0.1:8080)");
  cmd->add_option("--hit-timeout-ms", flags->hit_timeout_ms,
                  "Expire open HITs after this long (0 = never)");
  cmd->add_option("--static", flags->static_dir,
                  "Directory served under / (annotation client)");
  cmd->add_option("--threads", flags->threads, "HTTP worker threads");
  cmd->add_flag("--no-sync", flags->no_sync,
                "Skip fsync after each event (testing only)");
  cmd->callback([flags] {
    const std::string store = flags->store.empty()
                                  ? EnvOr(kStoreEnv, "")
                                  : flags->store;
    if (store.empty()) {
      Fail(ErrorCode::kInvalidArgument,
           std::string("--store or ") + kStoreEnv + " is required");
    }
    const std::string bind = flags->bind.empty()
                                 ? EnvOr(kBindEnv, "127.0.0.1:8080")
                                 : flags->bind;
    ExpertCorpus corpus = flags->data.Load();
    auto index = std::make_shared<const ExampleIndex>(ExampleIndex::Build(
        corpus.train, flags->study.Provider(), corpus.gold));
    StudyService service(std::move(corpus), LoadUnlabeled(flags->unlabeled),
                         flags->study.Config(), std::move(index),
                         ServiceOptions{store, !flags->no_sync});
    if (service.recovered_torn_tail()) {
      std::cerr << "discarded a torn final record in " << store << "\n";
    }

    ServerOptions options;
    std::tie(options.host, options.port) = ParseBindAddress(bind);
    if (flags->hit_timeout_ms > 0) {
      options.hit_timeout = Duration(flags->hit_timeout_ms);
    }
    options.static_dir = flags->static_dir;
    options.threads = flags->threads;

    // Server threads inherit the blocked mask; the main thread waits for
    // the shutdown signal.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    AnnotationServer server(service, options);
    const int port = server.Start();
    std::cerr << "serving " << service.study().items().size()
              << " sentences on " << options.host << ":" << port
              << " (replayed " << service.replayed_events() << " events)\n";
    int received = 0;
    sigwait(&signals, &received);
    std::cerr << "shutting down\n";
    server.Stop();
  });
}

// simulate -----------------------------------------------------------------

void AddSimulate(CLI::App &root) {
  struct Flags {
    DatasetFlags data;
    StudyFlags study;
    std::vector<std::string> workers;
    uint64_t seed = 0;
    size_t synthetic_docs = 0;
    size_t test_docs = 41;
    std::string dataset_out, output;
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd = root.add_subcommand(
      "simulate", "Run a study to completion with synthetic workers");
  cmd->add_option("--corpus", flags->data.corpus, "Corpus JSON lines");
  cmd->add_option("--gold", flags->data.gold, "Gold span JSON lines");
  cmd->add_option("--split", flags->data.split, "Split file");
  cmd->add_option("--synthetic-docs", flags->synthetic_docs,
                  "Generate this many synthetic documents instead");
  cmd->add_option("--test-docs", flags->test_docs,
                  "Test documents for a synthetic split");
  cmd->add_option("--dataset-out", flags->dataset_out,
                  "Directory to write the synthetic corpus, gold and split");
  flags->study.Add(cmd);
  cmd->add_option("--worker", flags->workers,
                  "Worker model: replay, adversarial, flip:P or "
                  "feedback:U,N,P (repeatable)")
      ->required();
  cmd->add_option("--seed", flags->seed, "Simulation seed");
  cmd->add_option("--output", flags->output,
                  "Annotation dump (default stdout)");
  cmd->callback([flags] {
    ExpertCorpus corpus;
    if (flags->synthetic_docs > 0) {
      SyntheticCorpusOptions options;
      options.documents = flags->synthetic_docs;
      SyntheticCorpus synthetic =
          GenerateSyntheticCorpus(options, flags->seed);
      corpus = SplitExpertSet(std::move(synthetic.documents),
                              std::move(synthetic.gold), flags->test_docs,
                              flags->seed);
      if (!flags->dataset_out.empty()) {
        const std::filesystem::path dir = flags->dataset_out;
        std::filesystem::create_directories(dir);
        std::ofstream c = OpenOutput((dir / "corpus.jsonl").string());
        WriteCorpus(c, corpus.documents);
        std::ofstream g = OpenOutput((dir / "gold.jsonl").string());
        WriteGold(g, corpus.gold);
        std::ofstream s = OpenOutput((dir / "split.json").string());
        WriteSplit(s, corpus);
      }
    } else {
      if (flags->data.corpus.empty() || flags->data.gold.empty() ||
          flags->data.split.empty()) {
        Fail(ErrorCode::kInvalidArgument,
             "--corpus, --gold and --split are required without "
             "--synthetic-docs");
      }
      corpus = flags->data.Load();
    }
    std::vector<NoiseModel> models;
    for (size_t i = 0; i < flags->workers.size(); ++i) {
      models.push_back(ParseNoiseModel(flags->workers[i],
                                       Rng::Derive(flags->seed, i)));
    }
    const std::vector<AnnotationRecord> records =
        RunSyntheticStudy(corpus, flags->study.Config(), models, flags->seed,
                          flags->study.Provider());
    WithOutput(flags->output, [&](std::ostream &out) {
      WriteAnnotationDump(out, records);
    });
    std::cerr << "simulated " << records.size() << " annotations by "
              << models.size() << " workers\n";
  });
}

// aggregate ----------------------------------------------------------------

void AddAggregate(CLI::App &root) {
  struct Flags {
    DatasetFlags data;
    std::string annotations, method = "ds", n = "all", output,
                              subtasks = "P,I,O";
    size_t repeats = 20;
    uint64_t seed = 0;
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd = root.add_subcommand(
      "aggregate",
      "Aggregate subsampled annotations and score them against gold");
  flags->data.Add(cmd);
  cmd->add_option("--annotations", flags->annotations, "Annotation dump")
      ->required();
  cmd->add_option("--method", flags->method, "mv or ds")
      ->check(CLI::IsMember({"mv", "ds", "MV", "DS"}));
  cmd->add_option("--n", flags->n, "Annotations per sentence: N or all");
  cmd->add_option("--repeats", flags->repeats, "Subsampling repeats");
  cmd->add_option("--seed", flags->seed, "Subsampling seed");
  cmd->add_option("--subtasks", flags->subtasks, "Comma-separated sub-tasks");
  cmd->add_option("--output", flags->output,
                  "Aggregated labels of the first repeat (JSON lines)");
  cmd->callback([flags] {
    const ExpertCorpus corpus = flags->data.Load();
    const GoldLabels gold = TestGold(corpus);
    const std::vector<AnnotationRecord> records =
        LoadAnnotationDump(flags->annotations);
    const AggregationMethod method = ParseMethod(flags->method);
    const size_t n = ParseSampleSize(flags->n);
    std::ofstream out;
    if (!flags->output.empty()) out = OpenOutput(flags->output);
    json summary = json::array();
    for (Subtask s : SubtasksFlag(flags->subtasks)) {
      const LabelMatrix matrix = LabelMatrix::FromRecords(records, s, gold);
      if (matrix.empty()) {
        std::cerr << SubtaskName(s) << ": no annotations on test sentences\n";
        continue;
      }
      const SubsampledEvaluation eval = EvaluateSubsampled(
          matrix, gold, n, method, flags->repeats, flags->seed);
      std::cout << SubtaskName(s) << "  " << MethodName(method) << "  n="
                << flags->n << "  kappa=" << eval.mean_kappa << "  ("
                << eval.repeats << " repeats)\n";
      if (out.is_open()) {
        const LabelMatrix sample = SubsampleAnnotations(
            matrix, n, Rng::Derive(flags->seed, 0));
        WriteAggregated(out, Aggregate(sample, method), n);
      }
    }
  });
}

// evaluate -----------------------------------------------------------------

void AddEvaluate(CLI::App &root) {
  struct Flags {
    DatasetFlags data;
    std::string annotations, json_out;
    size_t repeats = 20;
    uint64_t seed = 0;
    double filter = 0.05;
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd = root.add_subcommand(
      "evaluate", "Worker agreement, aggregation and feedback report");
  flags->data.Add(cmd);
  cmd->add_option("--annotations", flags->annotations, "Annotation dump")
      ->required();
  cmd->add_option("--repeats", flags->repeats, "Subsampling repeats");
  cmd->add_option("--seed", flags->seed, "Subsampling seed");
  cmd->add_option("--filter-fraction", flags->filter,
                  "Minimum share of test sentences per worker");
  cmd->add_option("--json", flags->json_out, "Also write the JSON report");
  cmd->callback([flags] {
    const ExpertCorpus corpus = flags->data.Load();
    const GoldLabels gold = TestGold(corpus);
    const std::vector<AnnotationRecord> records =
        LoadAnnotationDump(flags->annotations);
    ReportOptions options;
    options.repeats = flags->repeats;
    options.seed = flags->seed;
    options.filter_fraction = flags->filter;
    const json report =
        BuildReport(records, gold, corpus.test.size(), options);
    std::cout << RenderReportText(report);
    if (!flags->json_out.empty()) {
      WithOutput(flags->json_out, [&](std::ostream &out) {
        out << report.dump(2) << "\n";
      });
    }
  });
}

// export -------------------------------------------------------------------

void AddExport(CLI::App &root) {
  struct Flags {
    std::string store, output;
  };
  auto flags = std::make_shared<Flags>();
  CLI::App *cmd = root.add_subcommand(
      "export", "Dump the submitted annotations of a study store");
  cmd->add_option("--store", flags->store,
                  std::string("Event log directory (env ") + kStoreEnv + ")");
  cmd->add_option("--output", flags->output,
                  "Annotation dump (default stdout)");
  cmd->callback([flags] {
    const std::string store =
        flags->store.empty() ? EnvOr(kStoreEnv, "") : flags->store;
    if (store.empty()) {
      Fail(ErrorCode::kInvalidArgument,
           std::string("--store or ") + kStoreEnv + " is required");
    }
    const std::vector<AnnotationRecord> records = ExportAnnotations(store);
    WithOutput(flags->output, [&](std::ostream &out) {
      WriteAnnotationDump(out, records);
    });
  });
}

}  // namespace
}  // namespace dexa

int main(int argc, char **argv) {
  CLI::App app{"dexa: dynamic-example annotation studies"};
  app.require_subcommand(1);
  dexa::AddIngest(app);
  dexa::AddSplit(app);
  dexa::AddIndex(app);
  dexa::AddServe(app);
  dexa::AddSimulate(app);
  dexa::AddAggregate(app);
  dexa::AddEvaluate(app);
  dexa::AddExport(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const dexa::Error &e) {
    std::cerr << "dexa: " << dexa::ErrorCodeName(e.code()) << ": " << e.what()
              << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "dexa: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
