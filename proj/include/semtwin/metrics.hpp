// Copyright 2026 The semtwin Authors
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

// Inter-coder agreement and extraction accuracy against expert annotations.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semtwin/ingest.hpp"

namespace semtwin::metrics {

// Two coders, nominal labels.
struct AnnotationSet {
  std::vector<std::string> items;
  std::vector<std::string> coder1;
  std::vector<std::string> coder2;
  // Allowed labels; empty means "whatever appears".
  std::vector<std::string> domain;

  // Throws MetricsError on length mismatch, duplicate items or labels
  // outside the domain.
  void check() const;
};

// item_id,coder1,coder2. Throws ParseError.
AnnotationSet parse_annotations_csv(std::string_view text);

// 1 - D_o / D_e with the nominal distance and pooled label frequencies.
// Throws MetricsError with fewer than 2 items or when only one label is used.
double krippendorff_alpha(const AnnotationSet& a);

struct MatcherConfig {
  double threshold = 0.5;  // minimum token-set Jaccard similarity
  double value_rel_tol = 1e-9;
};

struct MatchReport {
  std::vector<std::pair<std::string, std::string>> matched;  // extracted, truth
  std::vector<std::string> unmatched_extracted;
  std::vector<std::string> unmatched_truth;
  double accuracy = 0.0;  // matched / ground truth
  std::size_t extracted_count = 0;
};

// Lower-cased alphanumeric tokens of description and geographic scope.
double snippet_similarity(const ingest::ConstraintSnippet& a,
                          const ingest::ConstraintSnippet& b);

// Greedy one-to-one matching by descending similarity. A pair qualifies when
// both quantities are absent or normalize to the same value and dimension,
// and the similarity reaches the threshold. Throws MetricsError for an empty
// ground truth.
MatchReport extraction_accuracy(
    const std::vector<ingest::ConstraintSnippet>& extracted,
    const std::vector<ingest::ConstraintSnippet>& ground_truth,
    const MatcherConfig& config = {});

struct AccuracyRow {
  std::string document;
  std::string model;
  MatchReport report;
};

// Document,Model,Acc.,No. of Reg.
std::string write_accuracy_csv(const std::vector<AccuracyRow>& rows);

// Item-level detail: extracted_id,truth_id (either may be empty).
std::string write_match_csv(const MatchReport& report);

}  // namespace semtwin::metrics
