// Copyright 2026 The distaug Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distaug/pseudolabel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace distaug {

namespace {

// Decode UTF-8 to code points; invalid bytes pass through as single units
// so scoring never throws on odd input.
std::vector<uint32_t> decode_utf8(const std::string& s) {
  std::vector<uint32_t> out;
  size_t i = 0;
  while (i < s.size()) {
    const uint8_t b = static_cast<uint8_t>(s[i]);
    int extra = 0;
    uint32_t cp = b;
    if (b >= 0xf0) { extra = 3; cp = b & 0x07; }
    else if (b >= 0xe0) { extra = 2; cp = b & 0x0f; }
    else if (b >= 0xc0) { extra = 1; cp = b & 0x1f; }
    if (i + extra >= s.size()) extra = 0;
    for (int k = 1; k <= extra; ++k) {
      const uint8_t cont = static_cast<uint8_t>(s[i + k]);
      if ((cont & 0xc0) != 0x80) { extra = k - 1; break; }
      cp = (cp << 6) | (cont & 0x3f);
    }
    out.push_back(extra == 0 ? b : cp);
    i += extra + 1;
  }
  return out;
}

struct Cell {
  long edits;
  long indel;
  bool operator<(const Cell& o) const {
    return edits != o.edits ? edits < o.edits : indel < o.indel;
  }
};

}  // namespace

EditCounts edit_distance(const std::string& ref, const std::string& hyp) {
  const std::vector<uint32_t> a = decode_utf8(ref);
  const std::vector<uint32_t> b = decode_utf8(hyp);
  const size_t n = a.size(), m = b.size();

  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = {static_cast<long>(j),
                                             static_cast<long>(j)};
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = {static_cast<long>(i), static_cast<long>(i)};
    for (size_t j = 1; j <= m; ++j) {
      const long sub_cost = (a[i - 1] == b[j - 1]) ? 0 : 1;
      Cell best = {prev[j - 1].edits + sub_cost, prev[j - 1].indel};
      const Cell del = {prev[j].edits + 1, prev[j].indel + 1};
      const Cell ins = {cur[j - 1].edits + 1, cur[j - 1].indel + 1};
      if (del < best) best = del;
      if (ins < best) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }

  const Cell final = prev[m];
  EditCounts counts;
  counts.edits = final.edits;
  // Along any alignment: ins - del = len(hyp) - len(ref).
  const long diff = static_cast<long>(m) - static_cast<long>(n);
  counts.insertions = (final.indel + diff) / 2;
  counts.deletions = final.indel - counts.insertions;
  counts.substitutions = final.edits - final.indel;
  return counts;
}

std::string normalize_label(const std::string& text, const CerOptions& opts) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  bool seen_char = false;
  for (char c : text) {
    const bool ws = (c == ' ' || c == '\t' || c == '\n' || c == '\r');
    if (ws) {
      if (seen_char) pending_space = true;
      continue;
    }
    if (pending_space) {
      if (opts.count_spaces) out.push_back(' ');
      pending_space = false;
    }
    if (opts.uppercase && c >= 'a' && c <= 'z')
      out.push_back(static_cast<char>(c - 'a' + 'A'));
    else
      out.push_back(c);
    seen_char = true;
  }
  return out;
}

CerReport cer(const std::string& ref, const std::string& hyp,
              const CerOptions& opts) {
  const std::string nref = normalize_label(ref, opts);
  const std::string nhyp = normalize_label(hyp, opts);
  if (nref.empty()) throw EmptyReference(ref);
  const EditCounts counts = edit_distance(nref, nhyp);
  CerReport report;
  report.ref_len = static_cast<long>(decode_utf8(nref).size());
  report.edits = counts.edits;
  report.cer_percent = 100.0 * counts.edits / report.ref_len;
  return report;
}

std::map<std::string, std::string> read_hypotheses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hypothesis table: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("hypothesis table line " +
                               std::to_string(line_no) + " has no tab");
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

double parse_delta(const std::string& s) {
  std::string low;
  for (char c : s) low.push_back(static_cast<char>(std::tolower(c)));
  if (low == "inf" || low == "infinity")
    return std::numeric_limits<double>::infinity();
  const double v = std::stod(s);
  if (v < 0.0) throw std::invalid_argument("delta must be non-negative");
  return v;
}

PlFilterResult filter_pseudo_labels(
    const Manifest& refs, const std::map<std::string, std::string>& hyps,
    double delta_percent, bool exclude_exact, const CerOptions& opts) {
  PlFilterResult result;
  std::vector<ManifestRecord> kept;
  for (const auto& rec : refs.records()) {
    auto it = hyps.find(rec.utt_id);
    if (it == hyps.end()) {
      result.summary.missing.push_back(rec.utt_id);
      continue;
    }
    const CerReport report = cer(rec.text, it->second, opts);
    const bool keep = report.cer_percent <= delta_percent &&
                      (!exclude_exact || report.cer_percent > 0.0);
    if (!keep) {
      result.summary.dropped++;
      continue;
    }
    ManifestRecord out = rec;  // reuses the same audio
    out.text = it->second;
    out.source = Source::pl;
    result.summary.kept++;
    result.summary.kept_hours += rec.duration_s / 3600.0;
    kept.push_back(std::move(out));
  }
  result.manifest = Manifest::from_records(std::move(kept));
  return result;
}

std::vector<SweepRow> threshold_sweep(
    const Manifest& refs, const std::map<std::string, std::string>& hyps,
    const std::vector<double>& deltas, const CerOptions& opts) {
  if (deltas.empty()) throw std::invalid_argument("no deltas given");
  // Score once, filter per delta.
  std::vector<std::pair<double, double>> cer_and_hours;
  for (const auto& rec : refs.records()) {
    auto it = hyps.find(rec.utt_id);
    if (it == hyps.end()) continue;
    const CerReport report = cer(rec.text, it->second, opts);
    cer_and_hours.emplace_back(report.cer_percent, rec.duration_s / 3600.0);
  }
  std::vector<SweepRow> rows;
  for (double delta : deltas) {
    SweepRow row;
    row.delta = delta;
    for (const auto& [cer_pct, hours] : cer_and_hours)
      if (cer_pct <= delta) {
        row.kept++;
        row.kept_hours += hours;
      }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace distaug
