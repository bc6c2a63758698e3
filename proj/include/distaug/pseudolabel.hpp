// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef DISTAUG_PSEUDOLABEL_HPP_
#define DISTAUG_PSEUDOLABEL_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "distaug/manifest.hpp"

namespace distaug {

struct EmptyReference : std::runtime_error {
  explicit EmptyReference(const std::string& utt)
      : std::runtime_error("empty reference after normalization: " + utt) {}
};

struct EditCounts {
  long edits = 0;
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
};

// Levenshtein distance over Unicode code points. Among minimal-edit
// alignments the one with the most matches (fewest ins+del) is counted,
// which makes the S/I/D split symmetric: swapping ref and hyp keeps S
// and exchanges I with D.
EditCounts edit_distance(const std::string& ref, const std::string& hyp);

struct CerOptions {
  bool uppercase = true;     // ASCII uppercase before scoring
  bool count_spaces = true;  // false strips all spaces before scoring
};

// Trim, collapse internal whitespace runs to one space, then apply opts.
std::string normalize_label(const std::string& text, const CerOptions& opts);

struct CerReport {
  std::string utt_id;
  long ref_len = 0;
  long edits = 0;
  double cer_percent = 0.0;
};

CerReport cer(const std::string& ref, const std::string& hyp,
              const CerOptions& opts = {});

// utt_id<TAB>hypothesis per line; hypothesis may be empty.
std::map<std::string, std::string> read_hypotheses(const std::string& path);

// "inf" (any case) maps to +infinity.
double parse_delta(const std::string& s);

struct PlSummary {
  size_t kept = 0;
  size_t dropped = 0;
  double kept_hours = 0.0;
  std::vector<std::string> missing;  // utt_ids without a hypothesis
};

struct PlFilterResult {
  Manifest manifest;
  PlSummary summary;
};

// Keeps (x, hyp) with source=pl iff CER(ref, hyp) <= delta_percent, and
// CER > 0 when exclude_exact is set. Records without hypotheses are
// reported in the summary and skipped.
PlFilterResult filter_pseudo_labels(
    const Manifest& refs, const std::map<std::string, std::string>& hyps,
    double delta_percent, bool exclude_exact = false,
    const CerOptions& opts = {});

struct SweepRow {
  double delta = 0.0;
  size_t kept = 0;
  double kept_hours = 0.0;
};

std::vector<SweepRow> threshold_sweep(
    const Manifest& refs, const std::map<std::string, std::string>& hyps,
    const std::vector<double>& deltas, const CerOptions& opts = {});

}  // namespace distaug

#endif  // DISTAUG_PSEUDOLABEL_HPP_
