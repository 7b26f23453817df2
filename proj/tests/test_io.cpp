#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "prophet/decoder.hpp"
#include "prophet/early_commit.hpp"
#include "prophet/error.hpp"
#include "prophet/io.hpp"

using namespace prophet;

TEST_SUITE("io") {

TEST_CASE("id lists") {
  CHECK(io::parse_id_list("3,7,12") == std::vector<TokenId>{3, 7, 12});
  CHECK(io::parse_id_list(" 3, 7 ") == std::vector<TokenId>{3, 7});
  CHECK(io::parse_id_list("").empty());
  CHECK(io::format_id_list({3, 7, 12}) == "3,7,12");
  CHECK_THROWS_AS(io::parse_id_list("3,,7"), Error);
  CHECK_THROWS_AS(io::parse_id_list("3,x"), Error);
}

TEST_CASE("trace round trip") {
  Vocabulary v(6, 0);
  Rng rng(1);
  const auto o = testing::random_oracle(9, v, 6, rng);
  DecodeConfig c;
  c.gen_len = 6;
  c.block_len = 3;
  c.t_max = 6;
  c.record_top1 = true;
  c.prophet_enabled = true;
  c.tau_high = 2.0;
  c.tau_mid = c.tau_low = 1.0;
  const auto r = decode_prophet(o, new_sequence({1, 2, 3}, 6, v), c);
  std::ostringstream out;
  io::write_trace_jsonl(out, r.trace);
  std::istringstream in(out.str());
  CHECK(io::read_trace_jsonl(in) == r.trace);

  DecodeTrace inf;
  inf.t_max = 2;
  inf.model_calls = 2;
  for (int t : {2, 1}) {
    StepRecord s;
    s.t = t;
    s.progress = progress_at(2, t);
    s.mean_gap = kInfiniteGap;
    inf.steps.push_back(s);
  }
  std::ostringstream o2;
  io::write_trace_jsonl(o2, inf);
  CHECK(o2.str().find("\"mean_gap\":null") != std::string::npos);
  std::istringstream i2(o2.str());
  CHECK(io::read_trace_jsonl(i2) == inf);
}

TEST_CASE("trace parse errors name the line") {
  std::istringstream in("{\"t\":2,\"p\":0.0,\"mean_gap\":1.0,\"unmasked\":[],\"committed\":false}\n{\"t\":1}\n");
  try {
    io::read_trace_jsonl(in);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.detail().rfind("line 2", 0) == 0);
  }
  std::istringstream empty("");
  CHECK_THROWS_AS(io::read_trace_jsonl(empty), Error);
}

TEST_CASE("dataset parsing") {
  std::istringstream in("# comment\n3,7 | 5,6 | 4,6\n\n1 | 9 | 2,3\n");
  const auto d = io::parse_dataset(in);
  REQUIRE(d.size() == 2);
  CHECK(d[0].prompt == std::vector<TokenId>{3, 7});
  CHECK(d[0].answer == std::vector<TokenId>{5, 6});
  CHECK(d[0].region == AnswerRegion{4, 6});

  auto line_of = [](const std::string& text) {
    std::istringstream s(text);
    try {
      io::parse_dataset(s);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ParseError);
      return e.detail();
    }
    return std::string();
  };
  CHECK(line_of("1 | 2 | 3,4\n1 | 2\n").rfind("line 2", 0) == 0);
  CHECK(line_of("1 | 2,3 | 3,4\n").rfind("line 1", 0) == 0);
  CHECK(line_of("1 | 2 | 4,4\n").rfind("line 1", 0) == 0);
  CHECK(line_of("\n\n1 | a | 3,4\n").rfind("line 3", 0) == 0);
}

TEST_CASE("csv writers") {
  std::ostringstream h;
  io::write_histogram_csv(h, convergence_histogram({0.4, 0.4, 0.9}, 2));
  CHECK(h.str() == "bin_lo,bin_hi,count\n0.0,0.5,2\n0.5,1.0,1\n");

  DynamicsMatrix m;
  m.n_positions = 1;
  m.steps = {2, 1};
  m.cells = {DynamicsClass::unchanged, DynamicsClass::decoded};
  std::ostringstream d;
  io::write_dynamics_csv(d, m);
  CHECK(d.str() == "position,step,class\n0,2,U\n0,1,D\n");
}

TEST_CASE("sha256") {
  CHECK(io::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // TEST_SUITE
