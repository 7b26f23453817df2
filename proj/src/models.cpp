#include "prophet/models.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <utility>

#include "prophet/error.hpp"

namespace prophet {

// ---------------------------------------------------------------------------
// ScriptedOracle

ScriptedOracle::ScriptedOracle(Vocabulary vocab, std::vector<LogitMatrix> schedule)
    : vocab_(std::move(vocab)), schedule_(std::move(schedule)) {
  if (schedule_.empty()) throw Error(ErrorKind::InvalidInput, "oracle schedule is empty");
  const std::size_t n = schedule_.front().n_positions();
  for (auto& m : schedule_) {
    if (m.vocab_size() != vocab_.size() || m.mask_id() != vocab_.mask_id()) {
      throw Error(ErrorKind::ModelMismatch, "oracle matrix does not match vocabulary");
    }
    if (m.n_positions() != n) throw Error(ErrorKind::ModelMismatch, "oracle matrices differ in shape");
    m.apply_mask_sentinel();
    m.check_invariants();
  }
}

ScriptedOracle ScriptedOracle::constant(Vocabulary vocab, const LogitMatrix& m, int t_max) {
  if (t_max < 1) throw Error(ErrorKind::InvalidInput, "t_max must be >= 1");
  return ScriptedOracle(std::move(vocab), std::vector<LogitMatrix>(static_cast<std::size_t>(t_max), m));
}

const LogitMatrix& ScriptedOracle::at_step(int t) const {
  if (t < 1 || t > t_max()) {
    throw Error(ErrorKind::ScheduleExhausted, "no oracle matrix for t=" + std::to_string(t));
  }
  return schedule_[static_cast<std::size_t>(t - 1)];
}

LogitMatrix ScriptedOracle::predict_logits(const TokenSequence& seq, int t) const {
  const LogitMatrix& m = at_step(t);
  if (seq.size() != m.n_positions()) {
    throw Error(ErrorKind::ModelMismatch, "sequence length " + std::to_string(seq.size()) +
                                              " != oracle rows " + std::to_string(m.n_positions()));
  }
  if (seq.mask_id != vocab_.mask_id()) throw Error(ErrorKind::ModelMismatch, "mask_id differs");
  return m;
}

ScriptedOracle make_ramp_oracle(int t_star, double pre_gap, double post_gap,
                                const std::vector<TokenId>& target, int t_max,
                                const Vocabulary& vocab, std::size_t prompt_len) {
  if (t_max < 1 || t_star < 1 || t_star > t_max) {
    throw Error(ErrorKind::InvalidInput, "ramp oracle needs 1 <= t_star <= t_max");
  }
  if (!(pre_gap >= 0.0) || !(post_gap > pre_gap) || !std::isfinite(post_gap)) {
    throw Error(ErrorKind::InvalidInput, "ramp oracle needs post_gap > pre_gap >= 0");
  }
  if (target.empty()) throw Error(ErrorKind::ModelMismatch, "target is empty");
  const std::vector<TokenId> content = vocab.content_tokens();
  if (content.size() < 2) throw Error(ErrorKind::InvalidInput, "ramp oracle needs two non-mask tokens");
  for (TokenId id : target) {
    if (!vocab.contains(id) || id == vocab.mask_id()) {
      throw Error(ErrorKind::InvalidInput, "target token outside vocabulary");
    }
  }

  const std::size_t n = prompt_len + target.size();
  std::vector<LogitMatrix> schedule;
  schedule.reserve(static_cast<std::size_t>(t_max));
  std::vector<TokenId> decoys;
  decoys.reserve(content.size() - 1);
  for (int t = 1; t <= t_max; ++t) {
    LogitMatrix m(n, vocab.size(), vocab.mask_id(), 0.0);
    for (std::size_t g = 0; g < target.size(); ++g) {
      const std::size_t pos = prompt_len + g;
      if (t <= t_star) {
        m.set(pos, target[g], post_gap);
      } else {
        decoys.clear();
        for (TokenId v : content) {
          if (v != target[g]) decoys.push_back(v);
        }
        const std::size_t k = (g + static_cast<std::size_t>(t)) % decoys.size();
        m.set(pos, decoys[k], pre_gap);
      }
    }
    schedule.push_back(std::move(m));
  }
  return ScriptedOracle(vocab, std::move(schedule));
}

// ---------------------------------------------------------------------------
// NGramDenoiser

NGramDenoiser::NGramDenoiser(Vocabulary vocab, std::size_t order, double alpha, Counts counts)
    : vocab_(std::move(vocab)), order_(order), alpha_(alpha), counts_(std::move(counts)) {
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw Error(ErrorKind::InvalidInput, "alpha must be > 0");
  for (const auto& [ctx, row] : counts_) {
    if (ctx.size() != 2 * order_) throw Error(ErrorKind::InvalidInput, "context width != 2 * order");
    for (const auto& [v, c] : row) {
      if (!vocab_.contains(v) || v == vocab_.mask_id()) {
        throw Error(ErrorKind::InvalidInput, "count for token outside vocabulary");
      }
      (void)c;
    }
  }
}

std::uint64_t NGramDenoiser::count(const Context& ctx, TokenId v) const {
  const auto it = counts_.find(ctx);
  if (it == counts_.end()) return 0;
  const auto jt = it->second.find(v);
  return jt == it->second.end() ? 0 : jt->second;
}

void NGramDenoiser::add_occurrence(const Context& ctx, TokenId v, std::uint64_t n) {
  counts_[ctx][v] += n;
}

NGramDenoiser::Context NGramDenoiser::training_context(const std::vector<TokenId>& tokens,
                                                       std::size_t i) const {
  Context ctx(2 * order_, kBoundary);
  for (std::size_t d = 1; d <= order_; ++d) {
    if (i >= d) ctx[order_ - d] = tokens[i - d];
    if (i + d < tokens.size()) ctx[order_ + d - 1] = tokens[i + d];
  }
  return ctx;
}

NGramDenoiser::Context NGramDenoiser::inference_context(const TokenSequence& seq, std::size_t i) const {
  Context ctx(2 * order_, kBoundary);
  std::size_t left = 0;
  std::size_t right = 0;
  for (std::size_t d = 1; d <= order_; ++d) {
    if (i >= d && !seq.is_masked(i - d)) ctx[order_ - 1 - left++] = seq.tokens[i - d];
    if (i + d < seq.size() && !seq.is_masked(i + d)) ctx[order_ + right++] = seq.tokens[i + d];
  }
  return ctx;
}

void NGramDenoiser::fill_row(const TokenSequence& seq, std::size_t i, std::span<double> row) const {
  const double unseen = std::log(alpha_);
  const auto it = counts_.find(inference_context(seq, i));
  for (std::size_t v = 0; v < row.size(); ++v) row[v] = unseen;
  if (it != counts_.end()) {
    for (const auto& [v, c] : it->second) {
      row[static_cast<std::size_t>(v)] = std::log(static_cast<double>(c) + alpha_);
    }
  }
  row[static_cast<std::size_t>(vocab_.mask_id())] = kMaskLogit;
}

LogitMatrix NGramDenoiser::predict_logits(const TokenSequence& seq, int /*t*/) const {
  check_sequence(seq, vocab_);
  LogitMatrix out(seq.size(), vocab_.size(), vocab_.mask_id());
  const auto n = static_cast<long long>(seq.size());
#pragma omp parallel for schedule(static) if (n * static_cast<long long>(vocab_.size()) >= (1 << 15))
  for (long long i = 0; i < n; ++i) {
    fill_row(seq, static_cast<std::size_t>(i), out.row(static_cast<std::size_t>(i)));
  }
  return out;
}

namespace {

void write_ids(std::ostream& out, std::span<const TokenId> ids) {
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) out << ' ';
    if (ids[k] == NGramDenoiser::kBoundary) {
      out << '_';
    } else {
      out << ids[k];
    }
  }
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what);
}

template <class T>
T parse_number(std::string_view s, std::size_t line) {
  T value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    parse_fail(line, "bad number '" + std::string(s) + "'");
  }
  return value;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<TokenId> parse_slots(std::string_view s, std::size_t line) {
  std::vector<TokenId> out;
  for (auto tok : split_ws(trim(s))) {
    out.push_back(tok == "_" ? NGramDenoiser::kBoundary : parse_number<TokenId>(tok, line));
  }
  return out;
}

}  // namespace

void NGramDenoiser::save(std::ostream& out) const {
  out << "ngram v1 " << order_ << ' ' << format_double(alpha_) << ' ' << vocab_.size() << ' '
      << vocab_.mask_id() << '\n';
  const std::span<const TokenId> empty;
  for (const auto& [ctx, row] : counts_) {
    const std::span<const TokenId> all = ctx.empty() ? empty : std::span<const TokenId>(ctx);
    for (const auto& [v, c] : row) {
      if (c == 0) continue;
      write_ids(out, all.first(order_));
      out << " | ";
      write_ids(out, all.subspan(order_));
      out << " | " << v << ' ' << c << '\n';
    }
  }
}

std::string NGramDenoiser::to_text() const {
  std::ostringstream os;
  save(os);
  return os.str();
}

NGramDenoiser NGramDenoiser::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(1, "missing header");
  const auto head = split_ws(trim(line));
  if (head.size() != 6 || head[0] != "ngram" || head[1] != "v1") parse_fail(1, "bad header");
  const auto order = parse_number<std::size_t>(head[2], 1);
  const auto alpha = parse_number<double>(head[3], 1);
  const auto vocab_size = parse_number<std::size_t>(head[4], 1);
  const auto mask_id = parse_number<TokenId>(head[5], 1);

  Counts counts;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string_view sv(line);
    const auto bar1 = sv.find('|');
    const auto bar2 = bar1 == std::string_view::npos ? bar1 : sv.find('|', bar1 + 1);
    if (bar2 == std::string_view::npos) parse_fail(lineno, "expected 'left | right | token count'");
    auto left = parse_slots(sv.substr(0, bar1), lineno);
    auto right = parse_slots(sv.substr(bar1 + 1, bar2 - bar1 - 1), lineno);
    const auto tail = split_ws(trim(sv.substr(bar2 + 1)));
    if (left.size() != order || right.size() != order) parse_fail(lineno, "context width != order");
    if (tail.size() != 2) parse_fail(lineno, "expected '<token-id> <count>'");
    const auto v = parse_number<TokenId>(tail[0], lineno);
    const auto c = parse_number<std::uint64_t>(tail[1], lineno);
    left.insert(left.end(), right.begin(), right.end());
    counts[std::move(left)][v] += c;
  }
  try {
    return NGramDenoiser(Vocabulary(vocab_size, mask_id), order, alpha, std::move(counts));
  } catch (const Error& e) {
    throw Error(ErrorKind::ParseError, e.detail());
  }
}

NGramDenoiser NGramDenoiser::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return load(in);
}

NGramDenoiser train_ngram(const std::vector<std::vector<TokenId>>& corpus, std::size_t order,
                          double alpha, const Vocabulary& vocab) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus has no sequences");
  NGramDenoiser model(vocab, order, alpha);
  bool any = false;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& seq = corpus[s];
    for (TokenId v : seq) {
      if (v == vocab.mask_id()) {
        throw Error(ErrorKind::InvalidInput, "corpus sequence " + std::to_string(s) + " contains mask_id");
      }
      if (!vocab.contains(v)) {
        throw Error(ErrorKind::InvalidInput, "corpus sequence " + std::to_string(s) + " has token outside vocabulary");
      }
    }
    for (std::size_t i = 0; i < seq.size(); ++i) {
      model.add_occurrence(model.training_context(seq, i), seq[i]);
      any = true;
    }
  }
  if (!any) throw Error(ErrorKind::EmptyCorpus, "corpus has no tokens");
  return model;
}

}  // namespace prophet
