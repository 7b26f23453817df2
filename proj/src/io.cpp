#include "prophet/io.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "prophet/error.hpp"

namespace prophet::io {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
T parse_number(std::string_view s, const std::string& where) {
  s = trim(s);
  T value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ParseError, where + "bad number '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

std::vector<TokenId> parse_id_list(std::string_view text, char sep) {
  std::vector<TokenId> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t i = 0;
  while (true) {
    const std::size_t j = text.find(sep, i);
    out.push_back(parse_number<TokenId>(text.substr(i, j == std::string_view::npos ? j : j - i), ""));
    if (j == std::string_view::npos) break;
    i = j + 1;
  }
  return out;
}

std::string format_id_list(const std::vector<TokenId>& ids, char sep) {
  std::string out;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out += sep;
    out += std::to_string(ids[k]);
  }
  return out;
}

void write_trace_jsonl(std::ostream& out, const DecodeTrace& trace) {
  for (const auto& s : trace.steps) {
    json j;
    j["t"] = s.t;
    j["p"] = s.progress;
    j["mean_gap"] = std::isfinite(s.mean_gap) ? json(s.mean_gap) : json(nullptr);
    j["unmasked"] = s.unmasked_positions;
    j["committed"] = s.committed;
    if (s.top1) j["top1"] = *s.top1;
    out << j.dump() << '\n';
  }
}

DecodeTrace read_trace_jsonl(std::istream& in) {
  DecodeTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    try {
      const json j = json::parse(line);
      StepRecord s;
      s.t = j.at("t").get<int>();
      s.progress = j.at("p").get<double>();
      const auto& g = j.at("mean_gap");
      s.mean_gap = g.is_null() ? kInfiniteGap : g.get<double>();
      s.unmasked_positions = j.at("unmasked").get<std::vector<std::size_t>>();
      s.committed = j.at("committed").get<bool>();
      if (j.contains("top1")) s.top1 = j.at("top1").get<std::vector<TokenId>>();
      trace.steps.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::ParseError, where + e.what());
    }
  }
  if (trace.steps.empty()) throw Error(ErrorKind::ParseError, "trace has no steps");
  trace.t_max = trace.steps.front().t;
  trace.model_calls = static_cast<int>(trace.steps.size());
  if (trace.steps.back().committed) trace.commit_step = trace.steps.back().t;
  return trace;
}

std::vector<DatasetInstance> parse_dataset(std::istream& in) {
  std::vector<DatasetInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    const auto bar1 = sv.find('|');
    const auto bar2 = bar1 == std::string_view::npos ? bar1 : sv.find('|', bar1 + 1);
    if (bar2 == std::string_view::npos || sv.find('|', bar2 + 1) != std::string_view::npos) {
      throw Error(ErrorKind::ParseError, where + "expected 'prompt-ids | answer-ids | start,end'");
    }
    DatasetInstance inst;
    try {
      inst.prompt = parse_id_list(sv.substr(0, bar1));
      inst.answer = parse_id_list(sv.substr(bar1 + 1, bar2 - bar1 - 1));
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, where + e.detail());
    }
    const std::string_view range = trim(sv.substr(bar2 + 1));
    const auto comma = range.find(',');
    if (comma == std::string_view::npos) throw Error(ErrorKind::ParseError, where + "region needs start,end");
    inst.region.start = parse_number<std::size_t>(range.substr(0, comma), where);
    inst.region.end = parse_number<std::size_t>(range.substr(comma + 1), where);
    if (inst.region.start >= inst.region.end) throw Error(ErrorKind::ParseError, where + "empty region");
    if (inst.answer.size() != inst.region.size()) {
      throw Error(ErrorKind::ParseError, where + "answer length != region length");
    }
    out.push_back(std::move(inst));
  }
  return out;
}

void write_histogram_csv(std::ostream& out, const ConvergenceHistogram& hist) {
  out << "bin_lo,bin_hi,count\n";
  for (const auto& b : hist.bins) out << json(b.lo).dump() << ',' << json(b.hi).dump() << ',' << b.count << '\n';
}

void write_dynamics_csv(std::ostream& out, const DynamicsMatrix& m) {
  out << "position,step,class\n";
  for (std::size_t i = 0; i < m.n_positions; ++i) {
    for (std::size_t k = 0; k < m.steps.size(); ++k) {
      out << i << ',' << m.steps[k] << ',' << static_cast<char>(m.at(i, k)) << '\n';
    }
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string sha256_hex(std::string_view bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorKind::Io, "sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

}  // namespace prophet::io
