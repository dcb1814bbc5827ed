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

#include "semtwin/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>

#include "semtwin/error.hpp"

namespace semtwin::metrics {

namespace {

std::set<std::string> tokens(std::string_view text) {
  std::set<std::string> out;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

std::optional<ingest::QuantityValue> quantity(
    const ingest::ConstraintSnippet& s) {
  if (!s.value) return std::nullopt;
  return ingest::normalize_quantity(*s.value, s.unit.value_or(""));
}

bool same_quantity(const ingest::ConstraintSnippet& a,
                   const ingest::ConstraintSnippet& b, double tol) {
  auto qa = quantity(a), qb = quantity(b);
  if (!qa || !qb) return !qa && !qb;
  if (qa->dimension != qb->dimension) return false;
  double scale = std::max(std::fabs(qa->magnitude), std::fabs(qb->magnitude));
  return std::fabs(qa->magnitude - qb->magnitude) <= tol * scale;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void AnnotationSet::check() const {
  if (coder1.size() != items.size() || coder2.size() != items.size()) {
    throw MetricsError("both coders must label every item");
  }
  std::set<std::string> seen;
  for (const std::string& item : items) {
    if (!seen.insert(item).second) throw MetricsError("duplicate item " + item);
  }
  if (domain.empty()) return;
  std::set<std::string> allowed(domain.begin(), domain.end());
  for (const auto* coder : {&coder1, &coder2}) {
    for (const std::string& label : *coder) {
      if (!allowed.count(label)) {
        throw MetricsError("label '" + label + "' is not in the domain");
      }
    }
  }
}

AnnotationSet parse_annotations_csv(std::string_view text) {
  AnnotationSet a;
  std::size_t pos = 0, line_no = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos
                                             ? std::string::npos
                                             : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (header) {
      if (cells != std::vector<std::string>{"item_id", "coder1", "coder2"}) {
        throw ParseError("expected header item_id,coder1,coder2", line_no, 1);
      }
      header = false;
      continue;
    }
    if (cells.size() != 3) {
      throw ParseError("expected 3 fields, found " +
                           std::to_string(cells.size()),
                       line_no, 1);
    }
    for (const std::string& c : cells) {
      if (c.empty()) throw ParseError("empty field", line_no, 1);
    }
    a.items.push_back(cells[0]);
    a.coder1.push_back(cells[1]);
    a.coder2.push_back(cells[2]);
  }
  if (header) throw ParseError("empty annotation file", 1, 1);
  try {
    a.check();
  } catch (const MetricsError& e) {
    throw ParseError(e.what(), 0, 0);
  }
  return a;
}

double krippendorff_alpha(const AnnotationSet& a) {
  a.check();
  const std::size_t n = a.items.size();
  if (n < 2) throw MetricsError("alpha needs at least 2 items");
  std::size_t disagree = 0;
  std::map<std::string, double> counts;
  for (std::size_t i = 0; i < n; ++i) {
    if (a.coder1[i] != a.coder2[i]) ++disagree;
    counts[a.coder1[i]] += 1;
    counts[a.coder2[i]] += 1;
  }
  double d_o = static_cast<double>(disagree) / n;
  // Sum over ordered pairs of distinct labels = 1 - sum p_c^2.
  double sum_sq = 0.0;
  for (const auto& [label, c] : counts) {
    double p = c / (2.0 * n);
    sum_sq += p * p;
  }
  double d_e = 1.0 - sum_sq;
  if (counts.size() < 2 || d_e <= 0.0) {
    throw MetricsError("alpha is undefined when a single label is used");
  }
  return 1.0 - d_o / d_e;
}

double snippet_similarity(const ingest::ConstraintSnippet& a,
                          const ingest::ConstraintSnippet& b) {
  auto ta = tokens(a.description + " " + a.geographic_scope);
  auto tb = tokens(b.description + " " + b.geographic_scope);
  if (ta.empty() && tb.empty()) return 1.0;
  std::size_t common = 0;
  for (const std::string& t : ta) common += tb.count(t);
  return static_cast<double>(common) / (ta.size() + tb.size() - common);
}

MatchReport extraction_accuracy(
    const std::vector<ingest::ConstraintSnippet>& extracted,
    const std::vector<ingest::ConstraintSnippet>& ground_truth,
    const MatcherConfig& config) {
  if (ground_truth.empty()) throw MetricsError("ground truth is empty");
  struct Cand {
    double score;
    std::size_t e, g;
  };
  std::vector<Cand> cands;
  for (std::size_t e = 0; e < extracted.size(); ++e) {
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (!same_quantity(extracted[e], ground_truth[g], config.value_rel_tol)) {
        continue;
      }
      double s = snippet_similarity(extracted[e], ground_truth[g]);
      if (s >= config.threshold) cands.push_back({s, e, g});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& x, const Cand& y) { return x.score > y.score; });
  std::vector<bool> used_e(extracted.size()), used_g(ground_truth.size());
  MatchReport r;
  for (const Cand& c : cands) {
    if (used_e[c.e] || used_g[c.g]) continue;
    used_e[c.e] = used_g[c.g] = true;
    r.matched.emplace_back(extracted[c.e].id, ground_truth[c.g].id);
  }
  for (std::size_t e = 0; e < extracted.size(); ++e) {
    if (!used_e[e]) r.unmatched_extracted.push_back(extracted[e].id);
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    if (!used_g[g]) r.unmatched_truth.push_back(ground_truth[g].id);
  }
  r.accuracy = static_cast<double>(r.matched.size()) / ground_truth.size();
  r.extracted_count = extracted.size();
  return r;
}

std::string write_accuracy_csv(const std::vector<AccuracyRow>& rows) {
  std::string out = "Document,Model,Acc.,No. of Reg.\n";
  char buf[32];
  for (const AccuracyRow& row : rows) {
    std::snprintf(buf, sizeof buf, "%.3f", row.report.accuracy);
    out += csv_cell(row.document) + "," + csv_cell(row.model) + "," + buf +
           "," + std::to_string(row.report.extracted_count) + "\n";
  }
  return out;
}

std::string write_match_csv(const MatchReport& report) {
  std::string out = "extracted_id,truth_id\n";
  for (const auto& [e, g] : report.matched) {
    out += csv_cell(e) + "," + csv_cell(g) + "\n";
  }
  for (const std::string& e : report.unmatched_extracted) {
    out += csv_cell(e) + ",\n";
  }
  for (const std::string& g : report.unmatched_truth) {
    out += "," + csv_cell(g) + "\n";
  }
  return out;
}

}  // namespace semtwin::metrics
