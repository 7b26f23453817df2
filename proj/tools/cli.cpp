#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prophet/analysis.hpp"
#include "prophet/batch.hpp"
#include "prophet/core.hpp"
#include "prophet/decoder.hpp"
#include "prophet/early_commit.hpp"
#include "prophet/error.hpp"
#include "prophet/io.hpp"
#include "prophet/models.hpp"

namespace prophet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Model specs: `ngram:<path>` or `ramp:key=value,...`.

struct RampParams {
  std::optional<int> t_star;
  std::optional<double> stable_frac;
  double pre_gap = 1.0;
  double post_gap = 9.0;
  std::size_t vocab_size = 32;
  TokenId mask_id = 0;
};

class ModelSource {
 public:
  static ModelSource open(const std::string& spec) {
    ModelSource src;
    src.spec_ = spec;
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "ngram") {
      if (rest.empty()) throw Error(ErrorKind::Io, "ngram model needs a path");
      src.ngram_ = std::make_shared<NGramDenoiser>(NGramDenoiser::load_file(rest));
      src.vocab_ = std::make_shared<Vocabulary>(src.ngram_->vocab());
      src.file_hash_ = io::sha256_hex(io::read_file(rest));
    } else if (kind == "ramp") {
      src.ramp_ = parse_ramp(rest);
      src.vocab_ = std::make_shared<Vocabulary>(src.ramp_->vocab_size, src.ramp_->mask_id);
    } else {
      throw Error(ErrorKind::Io, "unknown model kind '" + kind + "' (expected ngram: or ramp:)");
    }
    return src;
  }

  const Vocabulary& vocab() const { return *vocab_; }
  const std::string& spec() const { return spec_; }
  const std::string& file_hash() const { return file_hash_; }

  // Filler tokens over the generation region, with the answer (if any)
  // written at its region offset.
  std::vector<TokenId> ramp_target(std::size_t gen_len, std::size_t gen_begin,
                                   const std::vector<TokenId>* answer,
                                   std::optional<AnswerRegion> region) const {
    const auto content = vocab_->content_tokens();
    std::vector<TokenId> target(gen_len);
    for (std::size_t g = 0; g < gen_len; ++g) target[g] = content[g % content.size()];
    if (answer && region) {
      for (std::size_t i = region->start; i < region->end; ++i) target[i - gen_begin] = (*answer)[i - region->start];
    }
    return target;
  }

  std::shared_ptr<const DenoiserModel> instantiate(const TokenSequence& seq, int t_max,
                                                   std::vector<TokenId> target) const {
    if (ngram_) return ngram_;
    const auto& r = *ramp_;
    int t_star = r.t_star.value_or(0);
    if (r.stable_frac) t_star = t_max - static_cast<int>(std::llround(*r.stable_frac * t_max));
    if (target.size() != seq.gen_len) throw Error(ErrorKind::ModelMismatch, "target length != gen_len");
    return std::make_shared<ScriptedOracle>(
        make_ramp_oracle(t_star, r.pre_gap, r.post_gap, target, t_max, *vocab_, seq.prompt_len));
  }

  bool is_ramp() const { return ramp_.has_value(); }

 private:
  static RampParams parse_ramp(const std::string& text) {
    RampParams p;
    std::stringstream ss(text);
    std::string kv;
    while (std::getline(ss, kv, ',')) {
      if (kv.empty()) continue;
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::Io, "ramp option '" + kv + "' needs key=value");
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      try {
        if (key == "t_star") p.t_star = std::stoi(val);
        else if (key == "stable_frac") p.stable_frac = std::stod(val);
        else if (key == "pre_gap") p.pre_gap = std::stod(val);
        else if (key == "post_gap") p.post_gap = std::stod(val);
        else if (key == "vocab") p.vocab_size = std::stoul(val);
        else if (key == "mask") p.mask_id = std::stoi(val);
        else throw Error(ErrorKind::Io, "unknown ramp option '" + key + "'");
      } catch (const std::logic_error&) {
        throw Error(ErrorKind::Io, "bad value for ramp option '" + key + "'");
      }
    }
    if (p.t_star.has_value() == p.stable_frac.has_value()) {
      throw Error(ErrorKind::Io, "ramp model needs exactly one of t_star= or stable_frac=");
    }
    return p;
  }

  std::string spec_;
  std::string file_hash_;
  std::shared_ptr<const NGramDenoiser> ngram_;
  std::optional<RampParams> ramp_;
  std::shared_ptr<const Vocabulary> vocab_;
};

// ---------------------------------------------------------------------------
// Shared decode flags.

struct DecodeFlags {
  std::string model;
  std::string prompt_ids;
  std::string suffix_ids;
  std::string target_ids;
  std::size_t gen_len = 256;
  int steps = 50;
  std::size_t block_len = 0;  // 0: one block over the generation region
  std::string remask = "low_conf";
  std::string prophet = "off";
  double tau_high = 8.0;
  double tau_mid = 5.0;
  double tau_low = 3.0;
  double p1 = 0.33;
  double p2 = 0.67;
  std::string answer_region;
  std::string seed;
  double temperature = 0.0;
  bool record_top1 = false;
};

void add_decode_options(CLI::App& app, DecodeFlags& f) {
  app.add_option("--model", f.model, "ngram:<file> or ramp:t_star=N|stable_frac=F,pre_gap=,post_gap=,vocab=,mask=")
      ->required();
  app.add_option("--gen-len", f.gen_len, "generation length (tokens)");
  app.add_option("--steps", f.steps, "step budget T_max");
  app.add_option("--block-len", f.block_len, "semi-autoregressive block length (default: gen-len)");
  app.add_option("--remask", f.remask, "remasking strategy")
      ->check(CLI::IsMember({"random", "low_conf", "low_confidence"}));
  app.add_option("--tau-high", f.tau_high, "threshold for progress < p1");
  app.add_option("--tau-mid", f.tau_mid, "threshold for p1 <= progress < p2");
  app.add_option("--tau-low", f.tau_low, "threshold for progress >= p2");
  app.add_option("--p1", f.p1, "first progress breakpoint");
  app.add_option("--p2", f.p2, "second progress breakpoint");
  app.add_option("--seed", f.seed, "RNG seed (fallback: $PROPHET_SEED, then 0)");
  app.add_option("--temperature", f.temperature, "0 = greedy");
  app.add_option("--suffix-ids", f.suffix_ids, "ids appended to every prompt");
}

std::uint64_t resolve_seed(const std::string& flag) {
  std::string text = flag;
  if (text.empty()) {
    const char* env = std::getenv("PROPHET_SEED");
    if (env) text = env;
  }
  if (text.empty()) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidConfig, "seed");
  }
}

DecodeConfig make_config(const DecodeFlags& f) {
  DecodeConfig cfg;
  cfg.t_max = f.steps;
  cfg.gen_len = f.gen_len;
  cfg.block_len = f.block_len == 0 ? f.gen_len : f.block_len;
  cfg.remask_strategy = parse_remask_strategy(f.remask);
  cfg.prophet_enabled = f.prophet == "on";
  cfg.tau_high = f.tau_high;
  cfg.tau_mid = f.tau_mid;
  cfg.tau_low = f.tau_low;
  cfg.p1 = f.p1;
  cfg.p2 = f.p2;
  cfg.seed = resolve_seed(f.seed);
  cfg.temperature = f.temperature;
  cfg.record_top1 = f.record_top1;
  if (!f.answer_region.empty()) {
    std::vector<TokenId> r;
    try {
      r = io::parse_id_list(f.answer_region);
    } catch (const Error&) {
      throw Error(ErrorKind::InvalidConfig, "answer_region");
    }
    if (r.size() != 2 || r[0] < 0 || r[1] < 0) throw Error(ErrorKind::InvalidConfig, "answer_region");
    cfg.answer_region = AnswerRegion{static_cast<std::size_t>(r[0]), static_cast<std::size_t>(r[1])};
  }
  validate_config(cfg);
  return cfg;
}

int fail(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  return e.kind() == ErrorKind::InvalidConfig ? kConfig : kInput;
}

json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : "-inf";
}

double number_from_json(const json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

// ---------------------------------------------------------------------------
// decode

struct DecodeOutputs {
  std::string out;
  std::string trace_out;
  std::string manifest_out;
  std::string manifest_in;
};

json manifest_for(const DecodeFlags& f, const DecodeConfig& cfg, const ModelSource& src,
                  const std::vector<std::pair<std::string, std::string>>& outputs) {
  json m;
  m["tool"] = "prophet-cli";
  m["version"] = kVersion;
  m["command"] = "decode";
  m["model"] = {{"spec", src.spec()}, {"kind", src.is_ramp() ? "ramp" : "ngram"}};
  if (!src.file_hash().empty()) m["model"]["sha256"] = src.file_hash();
  m["prompt_ids"] = f.prompt_ids;
  m["suffix_ids"] = f.suffix_ids;
  m["target_ids"] = f.target_ids;
  m["seed"] = cfg.seed;
  m["config"] = {
      {"t_max", cfg.t_max},
      {"gen_len", cfg.gen_len},
      {"block_len", cfg.block_len},
      {"remask_strategy", std::string(to_string(cfg.remask_strategy))},
      {"prophet_enabled", cfg.prophet_enabled},
      {"tau_high", number_or_string(cfg.tau_high)},
      {"tau_mid", number_or_string(cfg.tau_mid)},
      {"tau_low", number_or_string(cfg.tau_low)},
      {"p1", cfg.p1},
      {"p2", cfg.p2},
      {"answer_region", f.answer_region},
      {"record_top1", cfg.record_top1},
      {"temperature", cfg.temperature},
  };
  json outs = json::object();
  for (const auto& [name, path] : outputs) {
    outs[name] = {{"path", path}, {"sha256", io::sha256_hex(io::read_file(path))}};
  }
  m["outputs"] = outs;
  return m;
}

void flags_from_manifest(const json& m, DecodeFlags& f, DecodeOutputs& o) {
  const auto& c = m.at("config");
  f.model = m.at("model").at("spec").get<std::string>();
  f.prompt_ids = m.at("prompt_ids").get<std::string>();
  f.suffix_ids = m.at("suffix_ids").get<std::string>();
  f.target_ids = m.at("target_ids").get<std::string>();
  f.seed = std::to_string(m.at("seed").get<std::uint64_t>());
  f.steps = c.at("t_max").get<int>();
  f.gen_len = c.at("gen_len").get<std::size_t>();
  f.block_len = c.at("block_len").get<std::size_t>();
  f.remask = c.at("remask_strategy").get<std::string>();
  f.prophet = c.at("prophet_enabled").get<bool>() ? "on" : "off";
  f.tau_high = number_from_json(c.at("tau_high"));
  f.tau_mid = number_from_json(c.at("tau_mid"));
  f.tau_low = number_from_json(c.at("tau_low"));
  f.p1 = c.at("p1").get<double>();
  f.p2 = c.at("p2").get<double>();
  f.answer_region = c.at("answer_region").get<std::string>();
  f.record_top1 = c.at("record_top1").get<bool>();
  f.temperature = c.at("temperature").get<double>();
  const auto& outs = m.at("outputs");
  if (o.out.empty() && outs.contains("tokens")) o.out = outs["tokens"].at("path").get<std::string>();
  if (o.trace_out.empty() && outs.contains("trace")) o.trace_out = outs["trace"].at("path").get<std::string>();
}

int run_decode(DecodeFlags f, DecodeOutputs o, std::ostream& out, std::ostream& err) {
  if (!o.manifest_in.empty()) {
    try {
      flags_from_manifest(json::parse(io::read_file(o.manifest_in)), f, o);
    } catch (const json::exception& e) {
      err << "error: bad manifest " << o.manifest_in << ": " << e.what() << '\n';
      return kInput;
    } catch (const Error& e) {
      return fail(e, err);
    }
  }
  if (f.model.empty()) {
    err << "error: --model is required\n";
    return kUsage;
  }

  DecodeConfig cfg;
  try {
    cfg = make_config(f);
  } catch (const Error& e) {
    return fail(e, err);
  }

  std::optional<ModelSource> src;
  try {
    src = ModelSource::open(f.model);
  } catch (const Error& e) {
    err << "error: cannot load model: " << e.what() << '\n';
    return kInput;
  }

  try {
    std::vector<TokenId> prompt = io::parse_id_list(f.prompt_ids);
    const auto suffix = io::parse_id_list(f.suffix_ids);
    prompt.insert(prompt.end(), suffix.begin(), suffix.end());
    const TokenSequence seq0 = new_sequence(prompt, cfg.gen_len, src->vocab());

    std::vector<TokenId> target = f.target_ids.empty()
                                      ? src->ramp_target(cfg.gen_len, seq0.gen_begin(), nullptr, std::nullopt)
                                      : io::parse_id_list(f.target_ids);
    const auto model = src->instantiate(seq0, cfg.t_max, std::move(target));

    TokenSequence result;
    DecodeTrace trace;
    if (cfg.prophet_enabled) {
      auto r = decode_prophet(*model, seq0, cfg);
      result = std::move(r.sequence);
      trace = std::move(r.trace);
    } else {
      auto r = decode_full(*model, seq0, cfg);
      result = std::move(r.sequence);
      trace = std::move(r.trace);
    }

    std::vector<std::pair<std::string, std::string>> written;
    const std::string tokens_line = io::format_id_list(result.tokens) + "\n";
    if (!o.out.empty()) {
      io::write_file(o.out, tokens_line);
      written.emplace_back("tokens", o.out);
    } else {
      out << tokens_line;
    }
    if (!o.trace_out.empty()) {
      std::ostringstream ts;
      io::write_trace_jsonl(ts, trace);
      io::write_file(o.trace_out, ts.str());
      written.emplace_back("trace", o.trace_out);
    }
    if (!o.manifest_out.empty()) {
      io::write_file(o.manifest_out, manifest_for(f, cfg, *src, written).dump(2) + "\n");
    }
    err << "steps used: " << trace.model_calls << " / " << cfg.t_max;
    if (trace.commit_step) err << " (committed at t=" << *trace.commit_step << ")";
    err << '\n';
  } catch (const Error& e) {
    return fail(e, err);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// compare

struct StrategyRun {
  TokenSequence output;
  int steps_used = 0;
};

struct InstanceRuns {
  StrategyRun full;
  StrategyRun half;
  StrategyRun prophet;
  AnswerRegion region;
  std::vector<TokenId> answer;
};

bool region_matches(const TokenSequence& s, AnswerRegion r, const std::vector<TokenId>& answer) {
  return std::equal(answer.begin(), answer.end(), s.tokens.begin() + static_cast<std::ptrdiff_t>(r.start));
}

int run_compare(const DecodeFlags& f, const std::string& dataset_path, const std::string& out_path,
                const std::string& instances_path, std::ostream& out, std::ostream& err) {
  DecodeConfig full_cfg;
  try {
    full_cfg = make_config(f);
  } catch (const Error& e) {
    return fail(e, err);
  }
  full_cfg.prophet_enabled = false;
  DecodeConfig half_cfg = full_cfg;
  half_cfg.t_max = full_cfg.t_max / 2;
  DecodeConfig prophet_cfg = full_cfg;
  prophet_cfg.prophet_enabled = true;
  try {
    validate_config(half_cfg);
    build_schedule(half_cfg.gen_len, half_cfg.block_len, half_cfg.t_max);
  } catch (const Error& e) {
    return fail(Error(ErrorKind::InvalidConfig, "t_max (half budget " + std::to_string(half_cfg.t_max) +
                                                    " is too small: " + e.detail() + ")"),
                err);
  }

  std::vector<io::DatasetInstance> data;
  try {
    std::ifstream in(dataset_path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + dataset_path);
    data = io::parse_dataset(in);
    if (data.empty()) throw Error(ErrorKind::EmptyInput, "dataset has no instances");
  } catch (const Error& e) {
    err << "error: dataset: " << e.what() << '\n';
    return kInput;
  }

  std::optional<ModelSource> src;
  try {
    src = ModelSource::open(f.model);
  } catch (const Error& e) {
    err << "error: cannot load model: " << e.what() << '\n';
    return kInput;
  }

  std::vector<InstanceRuns> runs;
  try {
    const auto suffix = io::parse_id_list(f.suffix_ids);
    runs = run_batch(data.size(), [&](std::size_t i) {
      const auto& inst = data[i];
      std::vector<TokenId> prompt = inst.prompt;
      prompt.insert(prompt.end(), suffix.begin(), suffix.end());
      const TokenSequence seq0 = new_sequence(prompt, full_cfg.gen_len, src->vocab());
      AnswerRegion region{inst.region.start + suffix.size(), inst.region.end + suffix.size()};
      if (!(seq0.gen_begin() <= region.start && region.end <= seq0.gen_end())) {
        throw Error(ErrorKind::InvalidInput, "instance " + std::to_string(i) + ": region outside generation");
      }
      const auto target = src->ramp_target(full_cfg.gen_len, seq0.gen_begin(), &inst.answer, region);
      const auto model = src->instantiate(seq0, full_cfg.t_max, target);

      InstanceRuns r;
      r.region = region;
      r.answer = inst.answer;
      auto with_region = [&](DecodeConfig c) {
        c.answer_region = region;
        return c;
      };
      {
        Rng rng = Rng::stream(full_cfg.seed, i);
        auto d = decode_full(*model, seq0, with_region(full_cfg), rng);
        r.full = {std::move(d.sequence), d.trace.model_calls};
      }
      {
        Rng rng = Rng::stream(full_cfg.seed, i);
        auto d = decode_full(*model, seq0, with_region(half_cfg), rng);
        r.half = {std::move(d.sequence), d.trace.model_calls};
      }
      {
        Rng rng = Rng::stream(full_cfg.seed, i);
        auto d = decode_prophet(*model, seq0, with_region(prophet_cfg), rng);
        r.prophet = {std::move(d.sequence), d.trace.model_calls};
      }
      return r;
    });
  } catch (const Error& e) {
    return fail(e, err);
  }

  std::ostringstream csv;
  csv << "strategy,budget,mean_steps,mean_speedup,answer_accuracy,agreement_exact,agreement_tokens,table_cell\n";
  const auto n = static_cast<double>(runs.size());
  auto row = [&](const char* name, int budget, StrategyRun InstanceRuns::*member) {
    double steps = 0, spd = 0, acc = 0, exact = 0, tokens = 0;
    for (const auto& r : runs) {
      const StrategyRun& s = r.*member;
      steps += s.steps_used;
      spd += speedup(full_cfg.t_max, s.steps_used);
      acc += region_matches(s.output, r.region, r.answer) ? 1.0 : 0.0;
      const Agreement a = agreement(r.full.output, s.output, r.region);
      exact += a.exact ? 1.0 : 0.0;
      tokens += a.token_match_fraction;
    }
    csv << name << ',' << budget << ',' << json(steps / n).dump() << ',' << json(spd / n).dump() << ','
        << json(acc / n).dump() << ',' << json(exact / n).dump() << ',' << json(tokens / n).dump() << ','
        << table_cell(100.0 * acc / n, spd / n) << '\n';
  };
  row("Full", full_cfg.t_max, &InstanceRuns::full);
  row("Half", half_cfg.t_max, &InstanceRuns::half);
  row("Prophet", prophet_cfg.t_max, &InstanceRuns::prophet);

  try {
    if (out_path.empty()) {
      out << csv.str();
    } else {
      io::write_file(out_path, csv.str());
    }
    if (!instances_path.empty()) {
      std::ostringstream is;
      is << "instance,full_steps,half_steps,prophet_steps,prophet_agrees,half_agrees\n";
      for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        is << i << ',' << r.full.steps_used << ',' << r.half.steps_used << ',' << r.prophet.steps_used << ','
           << (agreement(r.full.output, r.prophet.output, r.region).exact ? 1 : 0) << ','
           << (agreement(r.full.output, r.half.output, r.region).exact ? 1 : 0) << '\n';
      }
      io::write_file(instances_path, is.str());
    }
  } catch (const Error& e) {
    return fail(e, err);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// stats

struct AnswerEntry {
  std::vector<TokenId> answer;
  AnswerRegion region;
  bool with_suffix = false;
};

std::map<std::string, AnswerEntry> parse_answers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::map<std::string, AnswerEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '|')) {
      const auto b = field.find_first_not_of(" \t\r");
      const auto e = field.find_last_not_of(" \t\r");
      fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    if (fields.empty() || fields[0].empty() || fields[0][0] == '#') continue;
    const std::string where = path + " line " + std::to_string(lineno) + ": ";
    if (fields.size() < 3 || fields.size() > 4) {
      throw Error(ErrorKind::ParseError, where + "expected 'trace | answer-ids | start,end [| suffix]'");
    }
    AnswerEntry a;
    try {
      a.answer = io::parse_id_list(fields[1]);
      const auto r = io::parse_id_list(fields[2]);
      if (r.size() != 2 || r[0] < 0 || r[1] <= r[0]) throw Error(ErrorKind::ParseError, "bad region");
      a.region = {static_cast<std::size_t>(r[0]), static_cast<std::size_t>(r[1])};
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, where + e.detail());
    }
    a.with_suffix = fields.size() == 4 && fields[3] == "suffix";
    std::string name = fields[0];
    if (name.size() > 6 && name.ends_with(".jsonl")) name.resize(name.size() - 6);
    out[name] = std::move(a);
  }
  return out;
}

json summary_json(const std::vector<double>& first, const std::vector<double>& stable, std::size_t traces,
                  std::size_t bins) {
  json s;
  s["traces"] = traces;
  s["considered"] = first.size();
  s["excluded"] = traces - first.size();
  if (first.empty()) {
    s["frac_le_50"] = nullptr;
    s["frac_le_70"] = nullptr;
    return s;
  }
  const auto h = convergence_histogram(first, bins);
  const auto hs = convergence_histogram(stable, bins);
  s["frac_le_50"] = h.frac_le_50;
  s["frac_le_70"] = h.frac_le_70;
  s["stable_frac_le_50"] = hs.frac_le_50;
  s["stable_frac_le_70"] = hs.frac_le_70;
  double mf = 0, ms = 0;
  for (double x : first) mf += x;
  for (double x : stable) ms += x;
  s["mean_first_match"] = mf / static_cast<double>(first.size());
  s["mean_stable_from"] = ms / static_cast<double>(stable.size());
  return s;
}

std::string with_infix(const std::string& path, const std::string& infix) {
  const fs::path p(path);
  return (p.parent_path() / (p.stem().string() + "." + infix + p.extension().string())).string();
}

int run_stats(const std::string& traces_dir, const std::string& answers_path, std::size_t bins,
              const std::string& hist_out, const std::string& summary_out, const std::string& dynamics_dir,
              bool suffix_ab, std::ostream& out, std::ostream& err) {
  try {
    if (!fs::is_directory(traces_dir)) throw Error(ErrorKind::Io, "not a directory: " + traces_dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(traces_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::EmptyInput, "no .jsonl traces in " + traces_dir);
    const auto answers = parse_answers(answers_path);

    struct Group {
      std::vector<double> first, stable;
      std::size_t traces = 0;
    };
    std::map<std::string, Group> groups;

    for (const auto& file : files) {
      const std::string name = file.stem().string();
      const auto it = answers.find(name);
      if (it == answers.end()) throw Error(ErrorKind::InvalidInput, "no answer entry for trace " + name);
      std::ifstream in(file);
      DecodeTrace trace;
      try {
        trace = io::read_trace_jsonl(in);
      } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, file.string() + ": " + e.detail());
      }

      const std::string group = !suffix_ab ? "all" : it->second.with_suffix ? "with_suffix" : "without_suffix";
      Group& g = groups[group];
      ++g.traces;
      try {
        const auto stats = first_match_step(trace, it->second.answer, it->second.region);
        g.first.push_back(stats.first_match_fraction);
        g.stable.push_back(stats.stable_from_fraction);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotApplicable) throw Error(e.kind(), file.string() + ": " + e.detail());
      }

      if (!dynamics_dir.empty()) {
        fs::create_directories(dynamics_dir);
        std::ostringstream os;
        io::write_dynamics_csv(os, dynamics_matrix(trace));
        io::write_file((fs::path(dynamics_dir) / (name + ".dynamics.csv")).string(), os.str());
      }
    }

    if (suffix_ab) {
      groups.try_emplace("with_suffix");
      groups.try_emplace("without_suffix");
    }
    json summary = json::object();
    for (const auto& [name, g] : groups) {
      json s = summary_json(g.first, g.stable, g.traces, bins);
      if (suffix_ab) {
        summary[name] = s;
      } else {
        summary = s;
      }
      if (!hist_out.empty() && !g.first.empty()) {
        std::ostringstream os;
        io::write_histogram_csv(os, convergence_histogram(g.first, bins));
        io::write_file(suffix_ab ? with_infix(hist_out, name) : hist_out, os.str());
      }
    }
    const std::string text = summary.dump(2) + "\n";
    if (summary_out.empty()) {
      out << text;
    } else {
      io::write_file(summary_out, text);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// train-toy

int run_train(const std::string& corpus_path, std::size_t order, double alpha, std::size_t vocab_size,
              TokenId mask_id, const std::string& out_path, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(corpus_path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + corpus_path);
    std::vector<std::vector<TokenId>> corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        std::string normalized = line;
        std::replace(normalized.begin(), normalized.end(), '\t', ' ');
        std::vector<TokenId> seq;
        std::stringstream ss(normalized);
        std::string tok;
        while (ss >> tok) {
          const auto ids = io::parse_id_list(tok);
          seq.insert(seq.end(), ids.begin(), ids.end());
        }
        corpus.push_back(std::move(seq));
      } catch (const Error& e) {
        throw Error(ErrorKind::ParseError, "corpus line " + std::to_string(lineno) + ": " + e.detail());
      }
    }
    const Vocabulary vocab(vocab_size, mask_id);
    const NGramDenoiser model = train_ngram(corpus, order, alpha, vocab);
    io::write_file(out_path, model.to_text());
    out << "contexts learned: " << model.context_count() << '\n';
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Masked-diffusion decoding with early commit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  DecodeFlags dflags;
  DecodeOutputs douts;
  auto* decode = app.add_subcommand("decode", "decode one prompt");
  add_decode_options(*decode, dflags);
  decode->get_option("--model")->required(false);
  decode->add_option("--prompt-ids", dflags.prompt_ids, "comma-separated prompt ids");
  decode->add_option("--target-ids", dflags.target_ids, "ramp model target over the generation region");
  decode->add_option("--prophet", dflags.prophet, "early commit")->check(CLI::IsMember({"on", "off"}));
  decode->add_option("--answer-region", dflags.answer_region, "start,end (absolute, default: generation region)");
  decode->add_flag("--record-top1", dflags.record_top1, "store per-position top-1 ids in the trace");
  decode->add_option("--out", douts.out, "output token file (default: stdout)");
  decode->add_option("--trace-out", douts.trace_out, "trace file (JSON lines)");
  decode->add_option("--manifest-out", douts.manifest_out, "run manifest (JSON)");
  decode->add_option("--manifest-in", douts.manifest_in, "re-run the decode recorded in a manifest");

  DecodeFlags cflags;
  std::string dataset, compare_out, instances_out;
  auto* compare = app.add_subcommand("compare", "Full / Half / Prophet over a dataset");
  add_decode_options(*compare, cflags);
  compare->add_option("--dataset", dataset, "lines of 'prompt-ids | answer-ids | start,end'")->required();
  compare->add_option("--out", compare_out, "CSV (default: stdout)");
  compare->add_option("--instances-out", instances_out, "per-instance CSV");

  std::string traces_dir, answers_path, hist_out, summary_out, dynamics_dir;
  std::size_t bins = 10;
  bool suffix_ab = false;
  auto* stats = app.add_subcommand("stats", "convergence and dynamics statistics over traces");
  stats->add_option("--traces", traces_dir, "directory of *.jsonl traces recorded with --record-top1")->required();
  stats->add_option("--answers", answers_path, "lines of 'trace | answer-ids | start,end [| suffix]'")->required();
  stats->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);
  stats->add_option("--hist-out", hist_out, "histogram CSV");
  stats->add_option("--summary-out", summary_out, "summary JSON (default: stdout)");
  stats->add_option("--dynamics-dir", dynamics_dir, "per-trace dynamics CSVs");
  stats->add_flag("--suffix-ab", suffix_ab, "split statistics by the suffix column of the answers file");

  std::string corpus_path, model_out;
  std::size_t order = 1;
  double alpha = 1.0;
  std::size_t vocab_size = 0;
  TokenId mask_id = 0;
  auto* train = app.add_subcommand("train-toy", "train an n-gram denoiser");
  train->add_option("--corpus", corpus_path, "whitespace-separated ids, one sequence per line")->required();
  train->add_option("--order", order, "context tokens on each side");
  train->add_option("--alpha", alpha, "add-alpha smoothing")->check(CLI::PositiveNumber);
  train->add_option("--vocab-size", vocab_size, "vocabulary size including the mask id")->required();
  train->add_option("--mask-id", mask_id, "mask token id");
  train->add_option("--out", model_out, "model file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kUsage;
  }

  if (decode->parsed()) return run_decode(dflags, douts, out, err);
  if (compare->parsed()) return run_compare(cflags, dataset, compare_out, instances_out, out, err);
  if (stats->parsed()) {
    return run_stats(traces_dir, answers_path, bins, hist_out, summary_out, dynamics_dir, suffix_ab, out, err);
  }
  return run_train(corpus_path, order, alpha, vocab_size, mask_id, model_out, out, err);
}

}  // namespace prophet::cli
