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

#include "dexa/study_service.h"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "dexa/error.h"
#include "test_util.h"

namespace dexa {
namespace {

constexpr Subtask kP = Subtask::kParticipants;

class StudyServiceTest : public ::testing::Test {
 protected:
  StudyServiceTest() : corpus_(testing::SyntheticExpert(16, 4, 21)) {
    index_ = testing::BuiltinIndex(corpus_);
  }

  std::unique_ptr<StudyService> Open(StudyConfig config = {}) {
    return std::make_unique<StudyService>(
        corpus_, std::vector<Sentence>{}, config, index_,
        ServiceOptions{dir_.path(), false}, clock_.AsClock());
  }

  std::string Qualify(StudyService &service) {
    Registration r = service.RegisterWorker(1.0);
    std::vector<AnnotationRecord> records;
    for (const Sentence &s : service.study().TestRunSentences()) {
      records.push_back(
          {"", "", s.id(), kP, corpus_.gold.Spans(s.id(), kP), true, 0});
    }
    service.study().SubmitTestRun(r.profile.worker_id, records);
    return r.profile.worker_id;
  }

  std::string LogText() {
    std::ifstream in(dir_.path() / kEventLogName);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  ExpertCorpus corpus_;
  std::shared_ptr<const ExampleIndex> index_;
  testing::TempDir dir_;
  testing::FakeClock clock_;
};

TEST_F(StudyServiceTest, RestartReplaysState) {
  nlohmann::json snapshot;
  std::string open_hit;
  {
    auto service = Open();
    const std::string w = Qualify(*service);
    auto done = service->study().NextHit(w, kP);
    service->study().SubmitAnnotation(
        {done->hit_id, w, "", kP, {{kP, 0, 1}}, true, 0});
    open_hit = service->study().NextHit(w, kP)->hit_id;
    snapshot = service->study().StateSnapshot();
  }
  auto service = Open();
  EXPECT_EQ(service->replayed_events(), 5u);
  EXPECT_EQ(service->study().StateSnapshot(), snapshot);
  EXPECT_EQ(*service->study().GetHitStatus(open_hit), HitStatus::kOpen);
  EXPECT_TRUE(service->study().CheckInvariants().empty());
  // Ids continue where they left off.
  EXPECT_EQ(service->RegisterWorker(1.0).profile.worker_id, "w2");
}

TEST_F(StudyServiceTest, EveryLogPrefixReplaysConsistently) {
  {
    auto service = Open();
    const std::string a = Qualify(*service);
    const std::string b = Qualify(*service);
    for (int i = 0; i < 6; ++i) {
      const std::string &w = i % 2 ? a : b;
      auto hit = service->study().NextHit(w, kP);
      if (i % 3 == 2) {
        clock_.Advance(10);
        service->study().ExpireHit(hit->hit_id, Duration(0));
      } else {
        service->study().SubmitAnnotation(
            {hit->hit_id, w, "", kP, {}, i % 2 == 0, 0});
      }
    }
  }
  const std::string full = LogText();
  std::vector<size_t> line_ends;
  for (size_t i = 0; i < full.size(); ++i) {
    if (full[i] == '\n') line_ends.push_back(i + 1);
  }
  for (size_t n : line_ends) {
    std::ofstream(dir_.path() / kEventLogName, std::ios::trunc) <<
        full.substr(0, n);
    auto service = Open();
    EXPECT_TRUE(service->study().CheckInvariants().empty());
  }
}

TEST_F(StudyServiceTest, CorruptLogFailsStartup) {
  {
    auto service = Open();
    Qualify(*service);
  }
  std::string text = LogText();
  const size_t pos = text.find("\"approval_rate\":1.0");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 19, "\"approval_rate\":0.5");
  std::ofstream(dir_.path() / kEventLogName, std::ios::trunc) << text;
  try {
    Open();
    FAIL() << "corrupt log accepted";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataLoss);
    EXPECT_NE(std::string(e.what()).find("seq 2"), std::string::npos)
        << e.what();
  }
}

TEST_F(StudyServiceTest, DifferentStudyRejected) {
  Open();
  StudyConfig other;
  other.k = 5;
  try {
    Open(other);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kFailedPrecondition);
  }
}

TEST_F(StudyServiceTest, Tokens) {
  auto service = Open();
  Registration a = service->RegisterWorker(0.95);
  Registration b = service->RegisterWorker(0.95);
  EXPECT_EQ(a.token.size(), 32u);
  EXPECT_NE(a.token, b.token);
  EXPECT_EQ(*service->Authenticate(b.token), b.profile.worker_id);
  EXPECT_FALSE(service->Authenticate("").has_value());
  EXPECT_FALSE(service->Authenticate("nope").has_value());
}

TEST_F(StudyServiceTest, Export) {
  {
    auto service = Open();
    EXPECT_TRUE(ExportAnnotations(dir_.path()).empty());
    const std::string w = Qualify(*service);
    for (int i = 0; i < 3; ++i) {
      auto hit = service->study().NextHit(w, kP);
      service->study().SubmitAnnotation(
          {hit->hit_id, w, "", kP, {{kP, 0, 1}}, true, 0});
    }
  }
  const auto records = ExportAnnotations(dir_.path());
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].hit_id, "h1");
  std::ostringstream a, b;
  WriteAnnotationDump(a, records);
  WriteAnnotationDump(b, ExportAnnotations(dir_.path()));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_THROW(ExportAnnotations(dir_.path() / "nowhere"), Error);
}

}  // namespace
}  // namespace dexa
