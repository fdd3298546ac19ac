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

#include "dexa/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "dexa/error.h"

namespace dexa {

using json = nlohmann::json;

std::string_view SubtaskName(Subtask s) {
  switch (s) {
    case Subtask::kParticipants: return "P";
    case Subtask::kInterventions: return "I";
    case Subtask::kOutcomes: return "O";
  }
  return "?";
}

Subtask ParseSubtask(std::string_view name) {
  if (name.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(name[0]))) {
      case 'P': return Subtask::kParticipants;
      case 'I': return Subtask::kInterventions;
      case 'O': return Subtask::kOutcomes;
    }
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown subtask '" + std::string(name) + "' (expected P, I or O)");
}

std::vector<Subtask> ParseSubtaskList(std::string_view list) {
  std::vector<Subtask> out;
  for (char c : list) {
    if (c == ',' || c == ' ') continue;
    Subtask s = ParseSubtask(std::string_view(&c, 1));
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  if (out.empty()) Fail(ErrorCode::kInvalidArgument, "empty subtask list");
  std::sort(out.begin(), out.end());
  return out;
}

Sentence::Sentence(std::string id, std::vector<std::string> tokens,
                   std::vector<TextRange> char_offsets)
    : id_(std::move(id)),
      tokens_(std::move(tokens)),
      offsets_(std::move(char_offsets)) {
  if (tokens_.empty()) {
    Fail(ErrorCode::kInvalidArgument, "sentence " + id_ + " has no tokens");
  }
  if (!offsets_.empty() && offsets_.size() != tokens_.size()) {
    Fail(ErrorCode::kInvalidArgument,
         "sentence " + id_ + ": offset count does not match token count");
  }
}

std::string TokenLabelVector::ToBitString() const {
  std::string bits(labels.size(), '0');
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) bits[i] = '1';
  }
  return bits;
}

TokenLabelVector TokenLabelVector::FromBitString(std::string sentence_id,
                                                 Subtask subtask,
                                                 std::string_view bits) {
  TokenLabelVector v{std::move(sentence_id), subtask, {}};
  v.labels.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') {
      Fail(ErrorCode::kInvalidArgument,
           "label string for " + v.sentence_id + " contains '" +
               std::string(1, c) + "'");
    }
    v.labels.push_back(c == '1');
  }
  return v;
}

bool IsValidSpan(const Span &span, size_t token_count) {
  return span.start < span.end && span.end <= token_count;
}

void GoldLabels::AddSentence(const std::string &sentence_id,
                             size_t token_count) {
  auto [it, inserted] = entries_.try_emplace(sentence_id);
  if (inserted) {
    it->second.token_count = token_count;
  } else if (it->second.token_count != token_count) {
    Fail(ErrorCode::kInvalidArgument,
         "gold token count mismatch for " + sentence_id);
  }
}

void GoldLabels::AddSpan(const std::string &sentence_id, const Span &span) {
  auto it = entries_.find(sentence_id);
  if (it == entries_.end()) {
    Fail(ErrorCode::kNotFound, "gold sentence " + sentence_id + " not added");
  }
  if (!IsValidSpan(span, it->second.token_count)) {
    Fail(ErrorCode::kInvalidArgument,
         "span [" + std::to_string(span.start) + "," +
             std::to_string(span.end) + ") invalid for " + sentence_id +
             " with " + std::to_string(it->second.token_count) + " tokens");
  }
  auto &spans = it->second.spans[SubtaskIndex(span.subtask)];
  spans.push_back(span);
  spans = NormalizeSpans(spans);
}

bool GoldLabels::Contains(const std::string &sentence_id) const {
  return entries_.count(sentence_id) != 0;
}

const GoldLabels::Entry &GoldLabels::at(const std::string &sentence_id) const {
  auto it = entries_.find(sentence_id);
  if (it == entries_.end()) {
    Fail(ErrorCode::kNotFound, "no gold labels for " + sentence_id);
  }
  return it->second;
}

const std::vector<Span> &GoldLabels::Spans(const std::string &sentence_id,
                                           Subtask subtask) const {
  return at(sentence_id).spans[SubtaskIndex(subtask)];
}

TokenLabelVector GoldLabels::Labels(const std::string &sentence_id,
                                    Subtask subtask) const {
  const Entry &e = at(sentence_id);
  return SpansToTokenLabels(e.spans[SubtaskIndex(subtask)], sentence_id,
                            e.token_count, subtask);
}

GoldLabels GoldLabels::Restrict(
    std::span<const std::string> sentence_ids) const {
  GoldLabels out;
  for (const std::string &id : sentence_ids) {
    auto it = entries_.find(id);
    if (it != entries_.end()) out.entries_.insert(*it);
  }
  return out;
}

std::string MakeSentenceId(std::string_view doc_id, size_t index) {
  std::string id(doc_id);
  id += '_';
  id += std::to_string(index);
  return id;
}

Document IngestDocument(std::string doc_id, std::string title,
                        std::string abstract, SegmentationPolicy policy) {
  if (doc_id.empty()) {
    Fail(ErrorCode::kInvalidArgument, "document id must not be empty");
  }
  auto blank = [](const std::string &s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
      return std::isspace(c);
    });
  };
  if (blank(title) && blank(abstract)) {
    Fail(ErrorCode::kInvalidArgument,
         "document " + doc_id + " has neither title nor abstract text");
  }

  Document doc{std::move(doc_id), std::move(title), std::move(abstract), {}};
  const std::string source = doc.title + "\n" + doc.abstract;
  auto add_section = [&](std::string_view text, size_t base) {
    for (const TextRange &sr : SegmentSentences(text, policy)) {
      std::string_view sentence = text.substr(sr.begin, sr.end - sr.begin);
      std::vector<TextRange> ranges = TokenizeRanges(sentence);
      if (ranges.empty()) continue;
      std::vector<std::string> tokens;
      tokens.reserve(ranges.size());
      for (TextRange &r : ranges) {
        tokens.emplace_back(sentence.substr(r.begin, r.end - r.begin));
        r.begin += base + sr.begin;
        r.end += base + sr.begin;
      }
      doc.sentences.emplace_back(
          MakeSentenceId(doc.doc_id, doc.sentences.size()), std::move(tokens),
          std::move(ranges));
    }
  };
  add_section(std::string_view(source).substr(0, doc.title.size()), 0);
  add_section(std::string_view(source).substr(doc.title.size() + 1),
              doc.title.size() + 1);
  return doc;
}

Document IngestPretokenized(std::string doc_id,
                            std::vector<std::vector<std::string>> sentences) {
  if (doc_id.empty()) {
    Fail(ErrorCode::kInvalidArgument, "document id must not be empty");
  }
  if (sentences.empty()) {
    Fail(ErrorCode::kInvalidArgument,
         "document " + doc_id + " has no sentences");
  }
  Document doc{std::move(doc_id), "", "", {}};
  for (auto &tokens : sentences) {
    doc.sentences.emplace_back(
        MakeSentenceId(doc.doc_id, doc.sentences.size()), std::move(tokens));
  }
  return doc;
}

TokenLabelVector SpansToTokenLabels(std::span<const Span> spans,
                                    const std::string &sentence_id,
                                    size_t token_count, Subtask subtask) {
  TokenLabelVector v{sentence_id, subtask,
                     std::vector<uint8_t>(token_count, 0)};
  for (const Span &span : spans) {
    if (span.subtask != subtask) {
      Fail(ErrorCode::kInvalidArgument,
           "span for subtask " + std::string(SubtaskName(span.subtask)) +
               " passed for subtask " + std::string(SubtaskName(subtask)));
    }
    if (!IsValidSpan(span, token_count)) {
      Fail(ErrorCode::kInvalidArgument,
           "span [" + std::to_string(span.start) + "," +
               std::to_string(span.end) + ") out of range for " +
               sentence_id + " with " + std::to_string(token_count) +
               " tokens");
    }
    std::fill(v.labels.begin() + span.start, v.labels.begin() + span.end, 1);
  }
  return v;
}

TokenLabelVector SpansToTokenLabels(std::span<const Span> spans,
                                    const Sentence &sentence,
                                    Subtask subtask) {
  return SpansToTokenLabels(spans, sentence.id(), sentence.size(), subtask);
}

std::vector<Span> TokenLabelsToSpans(const TokenLabelVector &v) {
  std::vector<Span> spans;
  const size_t n = v.labels.size();
  size_t i = 0;
  while (i < n) {
    if (!v.labels[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < n && v.labels[j]) ++j;
    spans.push_back({v.subtask, i, j});
    i = j;
  }
  return spans;
}

std::vector<Span> NormalizeSpans(std::span<const Span> spans) {
  std::vector<Span> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Span> out;
  for (const Span &s : sorted) {
    if (!out.empty() && out.back().subtask == s.subtask &&
        s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

namespace {

json ParseLine(const std::string &line, size_t line_no,
               const std::string &what) {
  try {
    return json::parse(line);
  } catch (const json::parse_error &e) {
    Fail(ErrorCode::kInvalidArgument, what + " line " +
                                          std::to_string(line_no) +
                                          ": malformed JSON: " + e.what());
  }
}

bool IsBlank(const std::string &line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::ifstream OpenInput(const std::string &path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kNotFound, "cannot open " + path);
  return in;
}

}  // namespace

std::vector<Document> ParseCorpus(std::istream &in,
                                  SegmentationPolicy policy) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    json j = ParseLine(line, line_no, "corpus");
    try {
      std::string doc_id = j.at("doc_id").get<std::string>();
      if (!seen.insert(doc_id).second) {
        Fail(ErrorCode::kInvalidArgument, "duplicate doc_id " + doc_id);
      }
      if (j.contains("sentences")) {
        docs.push_back(IngestPretokenized(
            std::move(doc_id),
            j.at("sentences").get<std::vector<std::vector<std::string>>>()));
      } else {
        docs.push_back(IngestDocument(std::move(doc_id),
                                      j.value("title", std::string()),
                                      j.value("abstract", std::string()),
                                      policy));
      }
    } catch (const json::exception &e) {
      Fail(ErrorCode::kInvalidArgument,
           "corpus line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error &e) {
      Fail(e.code(),
           "corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return docs;
}

std::vector<Document> LoadCorpus(const std::string &path,
                                 SegmentationPolicy policy) {
  std::ifstream in = OpenInput(path);
  return ParseCorpus(in, policy);
}

void WriteCorpus(std::ostream &out, std::span<const Document> documents) {
  for (const Document &doc : documents) {
    json sentences = json::array();
    for (const Sentence &s : doc.sentences) sentences.push_back(s.tokens());
    json line = {{"doc_id", doc.doc_id}, {"sentences", std::move(sentences)}};
    out << line.dump() << '\n';
  }
}

GoldLabels ParseGold(std::istream &in, std::span<const Document> corpus) {
  SentenceTable table(corpus);
  GoldLabels gold;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    json j = ParseLine(line, line_no, "gold");
    const std::string where = "gold line " + std::to_string(line_no) + ": ";
    try {
      const std::string id = j.at("sentence_id").get<std::string>();
      const Sentence *sentence = table.Find(id);
      if (sentence == nullptr) {
        Fail(ErrorCode::kNotFound, where + "unknown sentence_id " + id);
      }
      const Subtask subtask = ParseSubtask(j.at("subtask").get<std::string>());
      gold.AddSentence(id, sentence->size());
      for (const json &pair : j.at("spans")) {
        if (!pair.is_array() || pair.size() != 2 ||
            !pair[0].is_number_integer() || !pair[1].is_number_integer() ||
            pair[0].get<long long>() < 0) {
          Fail(ErrorCode::kInvalidArgument,
               where + "malformed span " + pair.dump());
        }
        gold.AddSpan(id, {subtask, pair[0].get<size_t>(),
                          pair[1].get<size_t>()});
      }
    } catch (const json::exception &e) {
      Fail(ErrorCode::kInvalidArgument, where + e.what());
    } catch (const Error &e) {
      if (std::string_view(e.what()).starts_with("gold line")) throw;
      Fail(e.code(), where + e.what());
    }
  }
  return gold;
}

GoldLabels LoadGold(const std::string &path,
                    std::span<const Document> corpus) {
  std::ifstream in = OpenInput(path);
  return ParseGold(in, corpus);
}

void WriteGold(std::ostream &out, const GoldLabels &gold) {
  for (const auto &[id, entry] : gold.entries()) {
    for (Subtask subtask : kAllSubtasks) {
      json spans = json::array();
      for (const Span &s : entry.spans[SubtaskIndex(subtask)]) {
        spans.push_back({s.start, s.end});
      }
      json line = {{"sentence_id", id},
                   {"subtask", SubtaskName(subtask)},
                   {"spans", std::move(spans)}};
      out << line.dump() << '\n';
    }
  }
}

SentenceTable::SentenceTable(std::span<const Document> documents) {
  for (const Document &doc : documents) {
    for (const Sentence &s : doc.sentences) Add(s);
  }
}

void SentenceTable::Add(const Sentence &sentence) {
  if (!by_id_.emplace(sentence.id(), sentence).second) {
    Fail(ErrorCode::kInvalidArgument,
         "duplicate sentence id " + sentence.id());
  }
}

const Sentence *SentenceTable::Find(const std::string &sentence_id) const {
  auto it = by_id_.find(sentence_id);
  return it == by_id_.end() ? nullptr : &it->second;
}

const Sentence &SentenceTable::at(const std::string &sentence_id) const {
  const Sentence *s = Find(sentence_id);
  if (s == nullptr) Fail(ErrorCode::kNotFound, "unknown sentence " + sentence_id);
  return *s;
}

}  // namespace dexa
