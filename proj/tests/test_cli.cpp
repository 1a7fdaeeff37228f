// Copyright 2026 The sadp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end checks of the CLI binary: exit codes, stdout JSON contract and
// file outputs. Paths come from compile definitions set by the build.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#ifndef SADP_CLI_BIN
#error "SADP_CLI_BIN must point at the CLI binary"
#endif
#ifndef SADP_DATA_DIR
#error "SADP_DATA_DIR must point at the bundled data directory"
#endif

namespace {

using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string out_path = "/tmp/sadp_cli_out_" + std::to_string(++counter);
  const std::string err_path = out_path + ".err";
  const std::string cmd = std::string(SADP_CLI_BIN) + " " + args + " >" + out_path +
                          " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream out(out_path), err(err_path);
  std::stringstream so, se;
  so << out.rdbuf();
  se << err.rdbuf();
  r.out = so.str();
  r.err = se.str();
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

std::string data_path(const std::string& rel) {
  return std::string(SADP_DATA_DIR) + "/" + rel;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

}  // namespace

TEST_CASE("detect reproduces the golden spans file byte for byte") {
  const auto r = run_cli("detect --corpus " + data_path("fixtures/detect_docs.txt") +
                         " --out /tmp/sadp_cli_spans.jsonl");
  REQUIRE(r.exit_code == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary.at("command") == "detect");
  CHECK(summary.at("documents") == 40);
  CHECK(read_file("/tmp/sadp_cli_spans.jsonl") ==
        read_file(data_path("fixtures/detect_golden.jsonl")));
}

TEST_CASE("detect with the bundled registry file matches the built-in registry") {
  const auto r = run_cli("detect --corpus " + data_path("fixtures/detect_docs.txt") +
                         " --registry " + data_path("registry.json") +
                         " --out /tmp/sadp_cli_spans_reg.jsonl");
  REQUIRE(r.exit_code == 0);
  CHECK(read_file("/tmp/sadp_cli_spans_reg.jsonl") ==
        read_file(data_path("fixtures/detect_golden.jsonl")));
}

TEST_CASE("detect on an empty corpus writes an empty spans file and exits 0") {
  write_file("/tmp/sadp_cli_empty.txt", "");
  const auto r = run_cli(
      "detect --corpus /tmp/sadp_cli_empty.txt --out /tmp/sadp_cli_empty_spans.jsonl");
  CHECK(r.exit_code == 0);
  CHECK(read_file("/tmp/sadp_cli_empty_spans.jsonl").empty());
  CHECK(json::parse(r.out).at("spans") == 0);
}

TEST_CASE("bad registry path exits 2 and names the path") {
  const auto r = run_cli("detect --corpus " + data_path("pipeline_smoke.txt") +
                         " --registry /no/such/registry.json --out /tmp/x.jsonl");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("/no/such/registry.json") != std::string::npos);
}

TEST_CASE("bad corpus path exits 2") {
  const auto r = run_cli("detect --corpus /no/such/corpus.txt --out /tmp/x.jsonl");
  CHECK(r.exit_code == 2);
}

TEST_CASE("score on the 5-email 1-ssn fixture reports the worked values") {
  // synthesize the spans file: 5 emails, 1 ssn
  std::string jsonl;
  for (int i = 0; i < 5; ++i) {
    jsonl += R"({"doc_id":0,"start":)" + std::to_string(10 * i) + R"(,"end":)" +
             std::to_string(10 * i + 5) + R"(,"type":"EMAIL","surface":"e"})" + "\n";
  }
  jsonl += R"({"doc_id":0,"start":90,"end":95,"type":"SSN","surface":"s"})" "\n";
  write_file("/tmp/sadp_cli_fix_spans.jsonl", jsonl);

  const auto r = run_cli(
      "score --spans /tmp/sadp_cli_fix_spans.jsonl --out /tmp/sadp_cli_report.json");
  REQUIRE(r.exit_code == 0);
  const auto report = json::parse(read_file("/tmp/sadp_cli_report.json"));
  CHECK(report.at("n_total") == 6);
  for (const auto& t : report.at("types")) {
    if (t.at("type") == "EMAIL") {
      CHECK(std::abs(t.at("s_final").get<double>() - 0.3667) < 1e-3);
    }
    if (t.at("type") == "SSN") {
      CHECK(std::abs(t.at("s_final").get<double>() - 0.9333) < 1e-3);
    }
  }
}

TEST_CASE("weights 1,0,0 project s_final onto s_freq") {
  const auto r = run_cli(
      "score --spans /tmp/sadp_cli_fix_spans.jsonl --weights 1,0,0 "
      "--out /tmp/sadp_cli_report_w.json");
  REQUIRE(r.exit_code == 0);
  const auto report = json::parse(read_file("/tmp/sadp_cli_report_w.json"));
  for (const auto& t : report.at("types")) {
    CHECK(t.at("s_final").get<double>() ==
          doctest::Approx(t.at("s_freq").get<double>()).epsilon(1e-12));
  }
}

TEST_CASE("weights that do not sum to one exit 2") {
  const auto r = run_cli("score --spans /tmp/sadp_cli_fix_spans.jsonl --weights 1,1,1");
  CHECK(r.exit_code == 2);
}

TEST_CASE("empty spans file exits 2 with the empty-corpus message") {
  write_file("/tmp/sadp_cli_none.jsonl", "");
  const auto r = run_cli("score --spans /tmp/sadp_cli_none.jsonl");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("no PII") != std::string::npos);
}

TEST_CASE("annotate writes one JSON object per document") {
  const auto d = run_cli("detect --corpus " + data_path("pipeline_smoke.txt") +
                         " --out /tmp/sadp_cli_smoke_spans.jsonl");
  REQUIRE(d.exit_code == 0);
  const auto s = run_cli(
      "score --spans /tmp/sadp_cli_smoke_spans.jsonl --out /tmp/sadp_cli_smoke_report.json");
  REQUIRE(s.exit_code == 0);
  const auto a = run_cli("annotate --corpus " + data_path("pipeline_smoke.txt") +
                         " --spans /tmp/sadp_cli_smoke_spans.jsonl"
                         " --report /tmp/sadp_cli_smoke_report.json"
                         " --out /tmp/sadp_cli_annotated.jsonl");
  REQUIRE(a.exit_code == 0);
  std::istringstream lines(read_file("/tmp/sadp_cli_annotated.jsonl"));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto obj = json::parse(line);
    CHECK(obj.at("tokens").size() == obj.at("sigmas").size());
    CHECK(obj.at("tokens").size() == obj.at("scores").size());
    ++count;
  }
  CHECK(count == 60);
}

TEST_CASE("train no_dp: metrics written, no ledger, summary on stdout") {
  std::remove("/tmp/sadp_cli_nodp.ledger.json");
  const auto r = run_cli("train --corpus " + data_path("pipeline_smoke.txt") +
                         " --arm no_dp --epochs 2 --embed-dim 4 --vocab-max 128"
                         " --out /tmp/sadp_cli_nodp");
  REQUIRE(r.exit_code == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary.at("arm") == "no_dp");
  CHECK(summary.at("epsilon_min").is_null());
  CHECK(read_file("/tmp/sadp_cli_nodp.metrics.csv").rfind("epoch,step,arm", 0) == 0);
  CHECK(read_file("/tmp/sadp_cli_nodp.ledger.json").empty());  // file absent
  CHECK_FALSE(read_file("/tmp/sadp_cli_nodp.ckpt").empty());
}

TEST_CASE("train sa_adp twice with one seed yields identical checkpoints") {
  const std::string base = "train --corpus " + data_path("pipeline_smoke.txt") +
                           " --arm sa_adp --seed 7 --epochs 2 --embed-dim 4"
                           " --vocab-max 128 --out ";
  const auto r1 = run_cli(base + "/tmp/sadp_cli_sa1");
  const auto r2 = run_cli(base + "/tmp/sadp_cli_sa2");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  const std::string c1 = read_file("/tmp/sadp_cli_sa1.ckpt");
  const std::string c2 = read_file("/tmp/sadp_cli_sa2.ckpt");
  REQUIRE_FALSE(c1.empty());
  CHECK(c1 == c2);
  CHECK(r1.out == r2.out);
}

TEST_CASE("dp_sgd_uniform at q=1 for 3 epochs charges 12 + log(1e5)/31 at order 32") {
  const auto r = run_cli("train --corpus " + data_path("pipeline_smoke.txt") +
                         " --arm dp_sgd_uniform --sigma 2 --q 1 --epochs 3"
                         " --embed-dim 4 --vocab-max 128 --out /tmp/sadp_cli_dp");
  REQUIRE(r.exit_code == 0);
  const auto ledger = json::parse(read_file("/tmp/sadp_cli_dp.ledger.json"));
  CHECK(ledger.at("steps").size() == 3);
  const double expected = 12.0 + std::log(1e5) / 31.0;
  CHECK(std::abs(ledger.at("epsilon_at_32").get<double>() - expected) < 1e-9);

  // account replays the ledger to the same conversion
  const auto a = run_cli("account --ledger /tmp/sadp_cli_dp.ledger.json");
  REQUIRE(a.exit_code == 0);
  const auto conv = json::parse(a.out);
  CHECK(std::abs(conv.at("epsilon_at_32").get<double>() - expected) < 1e-9);
  CHECK(conv.at("non_private") == false);
}

TEST_CASE("subsampling amplification lowers the charged epsilon") {
  const std::string base = "train --corpus " + data_path("pipeline_smoke.txt") +
                           " --arm dp_sgd_uniform --sigma 2 --q 0.25 --epochs 2"
                           " --embed-dim 4 --vocab-max 128 --out ";
  const auto plain = run_cli(base + "/tmp/sadp_cli_plain");
  const auto amplified = run_cli(base + "/tmp/sadp_cli_amp --amplify-subsampling");
  REQUIRE(plain.exit_code == 0);
  REQUIRE(amplified.exit_code == 0);
  const double eps_plain =
      json::parse(plain.out).at("epsilon_min").get<double>();
  const double eps_amp =
      json::parse(amplified.out).at("epsilon_min").get<double>();
  CHECK(eps_amp < eps_plain);
}

TEST_CASE("train honors a config file with flags overriding it") {
  write_file("/tmp/sadp_cli_cfg.json",
             std::string(R"({"corpus": ")") + data_path("pipeline_smoke.txt") +
                 R"(", "train": {"arm": "no_dp", "epochs": 1, "embed_dim": 4,
                                 "vocab_max": 128, "seed": 5}})");
  const auto r = run_cli(
      "train --config /tmp/sadp_cli_cfg.json --epochs 2 --out /tmp/sadp_cli_cfgrun");
  REQUIRE(r.exit_code == 0);
  const std::string csv = read_file("/tmp/sadp_cli_cfgrun.metrics.csv");
  // flag override: 2 epochs, not 1
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("unknown config file keys exit 2") {
  write_file("/tmp/sadp_cli_badcfg.json", R"({"corpsu": "typo.txt"})");
  const auto r = run_cli("train --config /tmp/sadp_cli_badcfg.json");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("corpsu") != std::string::npos);

  write_file("/tmp/sadp_cli_badcfg2.json",
             std::string(R"({"corpus": ")") + data_path("pipeline_smoke.txt") +
                 R"(", "train": {"learning_rte": 0.1}})");
  const auto r2 = run_cli("train --config /tmp/sadp_cli_badcfg2.json");
  CHECK(r2.exit_code == 2);
  CHECK(r2.err.find("learning_rte") != std::string::npos);
}

TEST_CASE("divergent training exits 4") {
  const auto r = run_cli("train --corpus " + data_path("pipeline_smoke.txt") +
                         " --arm no_dp --learning-rate 1e160 --epochs 1 --embed-dim 4"
                         " --vocab-max 128 --out /tmp/sadp_cli_div");
  CHECK(r.exit_code == 4);
}

TEST_CASE("compare runs a tiny matrix and writes all three formats") {
  write_file("/tmp/sadp_cli_cmp.json",
             std::string(R"({
    "datasets": [{"name": "smoke", "path": ")") + data_path("pipeline_smoke.txt") +
                 R"(", "format": "plain_text_lines"}],
    "arms": [{"arm": "no_dp"}, {"arm": "dp_sgd_uniform", "sigma": 2.0}],
    "seeds": [1],
    "train": {"epochs": 1, "embed_dim": 4, "vocab_max": 128, "seq_len": 16}
  })");
  const auto r = run_cli(
      "compare --config /tmp/sadp_cli_cmp.json --out /tmp/sadp_cli_cmp_out");
  REQUIRE(r.exit_code == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary.at("rows") == 2);
  CHECK(summary.at("failures") == 0);

  const std::string csv = read_file("/tmp/sadp_cli_cmp_out.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  // baseline epsilon cells are empty
  std::istringstream lines(csv);
  std::string header, baseline;
  std::getline(lines, header);
  std::getline(lines, baseline);
  CHECK(baseline.find("no_dp,") != std::string::npos);
  CHECK(baseline.find(",,") != std::string::npos);
  CHECK_FALSE(read_file("/tmp/sadp_cli_cmp_out.json").empty());
  CHECK_FALSE(read_file("/tmp/sadp_cli_cmp_out.md").empty());
}

TEST_CASE("compare with a missing dataset exits 5 with a partial report") {
  write_file("/tmp/sadp_cli_cmp_bad.json",
             std::string(R"({
    "datasets": [{"name": "smoke", "path": ")") + data_path("pipeline_smoke.txt") +
                 R"("}, {"name": "ghost", "path": "/no/such.txt"}],
    "arms": [{"arm": "no_dp"}],
    "seeds": [1],
    "train": {"epochs": 1, "embed_dim": 4, "vocab_max": 128, "seq_len": 16}
  })");
  const auto r = run_cli(
      "compare --config /tmp/sadp_cli_cmp_bad.json --out /tmp/sadp_cli_cmp_bad_out");
  CHECK(r.exit_code == 5);
  const auto summary = json::parse(r.out);
  CHECK(summary.at("rows") == 1);
  CHECK(summary.at("failures") == 1);
}

TEST_CASE("delimited corpus flows through detect and train") {
  write_file("/tmp/sadp_cli_rec.csv",
             "name,email,status\n"
             "alice,alice@x.com,active\n"
             "bob,bob@mail.net,closed\n"
             "carol,carol@corp.org,active\n");
  const auto d = run_cli(
      "detect --corpus /tmp/sadp_cli_rec.csv --format delimited "
      "--out /tmp/sadp_cli_rec_spans.jsonl");
  REQUIRE(d.exit_code == 0);
  CHECK(json::parse(d.out).at("spans").get<int>() == 6);  // 3 names + 3 emails

  const auto t = run_cli(
      "train --corpus /tmp/sadp_cli_rec.csv --format delimited --arm no_dp "
      "--epochs 1 --embed-dim 4 --vocab-max 64 --seq-len 8 --q 1 "
      "--eval-fraction 0 --out /tmp/sadp_cli_rec_run");
  REQUIRE(t.exit_code == 0);
}
