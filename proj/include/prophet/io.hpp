#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prophet/analysis.hpp"
#include "prophet/core.hpp"

namespace prophet::io {

// "3,7,12" <-> {3, 7, 12}. Empty text is an empty list. Throws ParseError.
std::vector<TokenId> parse_id_list(std::string_view text, char sep = ',');
std::string format_id_list(const std::vector<TokenId>& ids, char sep = ',');

// One JSON object per step: {t, p, mean_gap, unmasked, committed[, top1]}.
// An infinite mean gap is written as null.
void write_trace_jsonl(std::ostream& out, const DecodeTrace& trace);
// Throws ParseError with a line number.
DecodeTrace read_trace_jsonl(std::istream& in);

struct DatasetInstance {
  std::vector<TokenId> prompt;
  std::vector<TokenId> answer;
  AnswerRegion region;
};

// `prompt-ids | answer-ids | region-start,region-end`; blank lines and lines
// starting with '#' are skipped. Throws ParseError naming the line.
std::vector<DatasetInstance> parse_dataset(std::istream& in);

void write_histogram_csv(std::ostream& out, const ConvergenceHistogram& hist);
void write_dynamics_csv(std::ostream& out, const DynamicsMatrix& m);

std::string read_file(const std::string& path);
// Throws Io.
void write_file(const std::string& path, std::string_view content);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace prophet::io
