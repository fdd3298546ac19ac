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

#ifndef DEXA_TESTS_UNIT_TEST_UTIL_H_
#define DEXA_TESTS_UNIT_TEST_UTIL_H_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dexa/simulator.h"
#include "dexa/study.h"

namespace dexa::testing {

inline std::filesystem::path TestdataPath(const std::string &name) {
  return std::filesystem::path(DEXA_TESTDATA_DIR) / name;
}

inline nlohmann::json LoadJson(const std::string &name) {
  std::ifstream in(TestdataPath(name));
  return nlohmann::json::parse(in);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dexa_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Seeded synthetic expert set split into train/test documents.
inline ExpertCorpus SyntheticExpert(size_t documents, size_t test_docs,
                                    uint64_t seed) {
  SyntheticCorpusOptions options;
  options.documents = documents;
  SyntheticCorpus corpus = GenerateSyntheticCorpus(options, seed);
  return SplitExpertSet(std::move(corpus.documents), std::move(corpus.gold),
                        test_docs, seed);
}

inline std::shared_ptr<const ExampleIndex> BuiltinIndex(
    const ExpertCorpus &corpus) {
  return std::make_shared<const ExampleIndex>(ExampleIndex::Build(
      corpus.train, std::make_shared<HashedNgramEmbedder>(), corpus.gold));
}

// Manually advanced clock.
struct FakeClock {
  std::shared_ptr<std::atomic<Timestamp>> now =
      std::make_shared<std::atomic<Timestamp>>(1'000'000);

  Clock AsClock() const {
    auto n = now;
    return [n] { return n->load(); };
  }
  void Advance(Timestamp ms) { *now += ms; }
};

}  // namespace dexa::testing

#endif  // DEXA_TESTS_UNIT_TEST_UTIL_H_
