// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dcwhash/cli.hpp"
#include "dcwhash/codes.hpp"
#include "dcwhash/data_io.hpp"
#include "json.hpp"
#include "support/oracles.hpp"

using namespace dcwhash;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run dcw(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir() {
  const auto dir = fs::temp_directory_path() / "dcwhash_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// 200 rows, 6 features, labels 0..3.
void make_toy(const std::string& features, const std::string& labels) {
  std::mt19937_64 gen(1);
  Matrix x = oracle::random_matrix(gen, 200, 6, 0, 1);
  std::vector<std::uint32_t> l(200);
  for (std::size_t i = 0; i < 200; ++i) {
    l[i] = i % 4;
    x(i, l[i]) += 2.0;
  }
  save_features(features, x);
  save_labels(labels, l);
}

const std::vector<std::string> kSmallNet{"--hidden", "12", "--m", "8", "--iters", "10", "--batch", "32"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("help and usage errors") {
  const auto help = dcw({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("bench-dist") != std::string::npos);
  const auto train_help = dcw({"train", "--help"});
  CHECK(train_help.code == 0);
  for (const char* flag : {"--matcher", "--batch", "--recon-steps", "--prior-p", "--p-norm", "--out-model", "--trace"}) {
    CHECK(train_help.out.find(flag) != std::string::npos);
  }
  CHECK(dcw({}).code == 2);
  CHECK(dcw({"frobnicate"}).code == 2);
  CHECK(dcw({"split", "--features", "x"}).code == 2);
}

TEST_CASE("split writes both halves and is reproducible") {
  const fs::path data(DCWHASH_TEST_DATA);
  const std::vector<std::string> args{"--seed", "3", "split", "--features",
                                      (data / "subset-images-idx3-ubyte").string(), "--labels",
                                      (data / "subset-labels-idx1-ubyte").string(),
                                      "--queries-per-class", "100", "--out-dir", path("split1")};
  const auto r = dcw(args);
  REQUIRE(r.code == 0);
  CHECK(load_features(path("split1/query.ftrx")).rows() == 1000);
  CHECK(load_features(path("split1/retrieval.ftrx")).rows() == 9000);
  CHECK(load_labels(path("split1/retrieval.lbls")).size() == 9000);
  const auto idx = lines(slurp(path("split1/split_index.csv")));
  CHECK(idx.front() == "set,row,source_index");
  CHECK(idx.size() == 10001);

  auto again = args;
  again.back() = path("split2");
  REQUIRE(dcw(again).code == 0);
  for (const char* f : {"query.ftrx", "query.lbls", "retrieval.ftrx", "retrieval.lbls", "split_index.csv"}) {
    CHECK(slurp(path(std::string("split1/") + f)) == slurp(path(std::string("split2/") + f)));
  }
  const auto missing = dcw({"split", "--features", (data / "subset-images-idx3-ubyte").string(),
                            "--labels", path("no-such-labels"), "--out-dir", path("split3")});
  CHECK(missing.code == 2);
  CHECK_FALSE(missing.err.empty());
}

TEST_CASE("train, encode, retrieve, eval") {
  make_toy(path("toy.ftrx"), path("toy.lbls"));
  const auto train_args =
      concat({"--seed", "4", "train", "--features", path("toy.ftrx"), "--out-model", path("a.dcwm"),
              "--trace", path("a.csv")},
             kSmallNet);
  const auto r = dcw(train_args);
  REQUIRE(r.code == 0);
  const auto echo = json::parse(lines(r.out).front());
  CHECK(echo["m"] == 8);
  CHECK(echo["batch_size"] == 32);
  CHECK(echo["recon_steps"] == 5);
  CHECK(echo["matcher"] == "dcw");
  CHECK(echo["seed"] == 4);
  CHECK(echo["hidden"] == json::array({12}));
  const auto trace = lines(slurp(path("a.csv")));
  CHECK(trace.front() == "iter,loss_recon,loss_match,grad_norm,wall_ns");
  CHECK(trace.size() == 11);

  auto b_args = train_args;
  b_args[6] = path("b.dcwm");
  b_args[8] = path("b.csv");
  REQUIRE(dcw(b_args).code == 0);
  CHECK(slurp(path("a.dcwm")) == slurp(path("b.dcwm")));

  REQUIRE(dcw({"encode", "--model", path("a.dcwm"), "--features", path("toy.ftrx"), "--labels",
               path("toy.lbls"), "--out-codes", path("toy.hcds")})
              .code == 0);
  const auto codes = load_codes(path("toy.hcds"));
  CHECK(codes.size() == 200);
  CHECK(codes.bits() == 8);
  REQUIRE(codes.labels());

  const auto ret = dcw({"retrieve", "--db-codes", path("toy.hcds"), "--query-codes", path("toy.hcds"),
                        "--topk", "10"});
  REQUIRE(ret.code == 0);
  const auto rows = lines(ret.out);
  CHECK(rows.front() == "query,rank,db_index,hamming");
  CHECK(rows.size() == 1 + 200 * 10);

  const auto ev = dcw({"eval", "--db-codes", path("toy.hcds"), "--query-codes", path("toy.hcds"),
                       "--metrics", "map,p@10", "--pr-curve", path("pr.csv")});
  REQUIRE(ev.code == 0);
  const auto j = json::parse(ev.out);
  CHECK(j["map"].get<double>() > 0.0);
  CHECK(j["precision_at"]["10"].get<double>() <= 1.0);
  CHECK(j["query_count"] == 200);
  const auto pr = lines(slurp(path("pr.csv")));
  CHECK(pr.front() == "recall,precision");
  CHECK(pr.size() == 12);

  CHECK(dcw({"eval", "--db-codes", path("toy.hcds"), "--query-codes", path("toy.hcds"), "--metrics", "ndcg"}).code == 2);
  const auto stats = dcw({"codestats", "--codes", path("toy.hcds")});
  REQUIRE(stats.code == 0);
  CHECK(json::parse(stats.out)["activation"].size() == 8);
}

TEST_CASE("config file and flag precedence") {
  make_toy(path("toy.ftrx"), path("toy.lbls"));
  std::ofstream(path("cfg.json")) << R"({"m": 6, "iterations": 3, "batch_size": 16, "hidden": [10],
                                        "matcher": "swd", "n_omega": 5, "lr": 0.01})";
  const auto r = dcw({"train", "--features", path("toy.ftrx"), "--config", path("cfg.json"), "--m",
                      "4", "--out-model", path("c.dcwm")});
  REQUIRE(r.code == 0);
  const auto echo = json::parse(lines(r.out).front());
  CHECK(echo["m"] == 4);
  CHECK(echo["iterations"] == 3);
  CHECK(echo["matcher"] == "swd");
  CHECK(echo["n_omega"] == 5);
  CHECK(echo["lr"] == 0.01);

  std::ofstream(path("bad.json")) << R"({"m": 6, "colour": "blue"})";
  CHECK(dcw({"train", "--features", path("toy.ftrx"), "--config", path("bad.json"), "--out-model",
             path("c.dcwm")})
            .code == 2);
  CHECK(dcw(concat({"train", "--features", path("toy.ftrx"), "--matcher", "gan", "--out-model",
                    path("c.dcwm")},
                   kSmallNet))
            .code == 2);
}

TEST_CASE("numeric failure exits with 3") {
  save_features(path("huge.ftrx"), Matrix(64, 3, 1.0));
  const auto r = dcw(concat({"train", "--features", path("huge.ftrx"), "--out-model", path("h.dcwm"), "--lr", "1e300"},
                            kSmallNet));
  CHECK(r.code == 3);
  CHECK(r.err.find("iteration") != std::string::npos);
}

TEST_CASE("eval on hand-built codes and m mismatch") {
  // One distinct code per class, queries identical to the database.
  CodeSet db(9, 3);
  std::vector<std::uint32_t> labels(9);
  for (std::size_t i = 0; i < 9; ++i) {
    labels[i] = i % 3;
    db.set_bit(i, labels[i], true);
  }
  db.set_labels(labels);
  save_codes(path("db.hcds"), db);
  const auto r = dcw({"eval", "--db-codes", path("db.hcds"), "--query-codes", path("db.hcds"),
                      "--metrics", "map,p@3"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["map"] == 1.0);
  CHECK(j["precision_at"]["3"] == 1.0);

  CodeSet wide(2, 5);
  wide.set_labels({0, 1});
  save_codes(path("wide.hcds"), wide);
  CHECK(dcw({"eval", "--db-codes", path("db.hcds"), "--query-codes", path("wide.hcds")}).code == 2);
  CHECK(dcw({"retrieve", "--db-codes", path("db.hcds"), "--query-codes", path("wide.hcds")}).code == 2);
}

TEST_CASE("lsh subcommand") {
  make_toy(path("toy.ftrx"), path("toy.lbls"));
  REQUIRE(dcw({"--seed", "2", "lsh", "--features", path("toy.ftrx"), "--labels", path("toy.lbls"),
               "--m", "16", "--out-codes", path("lsh.hcds")})
              .code == 0);
  const auto c = load_codes(path("lsh.hcds"));
  CHECK(c.bits() == 16);
  CHECK(c.words() == lsh_codes(load_features(path("toy.ftrx")), 16, 2).words());
  CHECK(c.labels() == load_labels(path("toy.lbls")));
}

TEST_CASE("bench-dist output") {
  const auto r = dcw({"--seed", "5", "bench-dist", "--estimators", "dcw,swd:20,ot", "--n", "8,16",
                      "--m", "4", "--trials", "3", "--out", path("bench.csv")});
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(path("bench.csv")));
  CHECK(rows.front() == "estimator,n,m,p,trial,estimate,wall_ns");
  CHECK(rows.size() == 1 + 3 * 2 * 3);
  const auto again = dcw({"--seed", "5", "bench-dist", "--estimators", "dcw,swd:20,ot", "--n", "8,16",
                          "--m", "4", "--trials", "3"});
  const auto rows2 = lines(again.out);
  REQUIRE(rows2.size() == rows.size());
  // Same estimates; only the timing column may differ.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].substr(0, rows[i].rfind(',')) == rows2[i].substr(0, rows2[i].rfind(',')));
  }
  CHECK(dcw({"bench-dist", "--estimators", "sinkhorn"}).code == 2);
  CHECK(dcw({"bench-dist", "--estimators", "ot", "--n", "5000", "--trials", "1"}).code == 2);
}

TEST_CASE("bench-train output") {
  make_toy(path("toy.ftrx"), path("toy.lbls"));
  const std::vector<std::string> args{"bench-train", "--features", path("toy.ftrx"), "--matchers",
                                      "dcw,ot,none", "--hidden", "8", "--m", "4", "--batch", "16"};
  const auto a = dcw(args);
  REQUIRE(a.code == 0);
  const auto rows = lines(a.out);
  // config echo, header, one row per matcher
  REQUIRE(rows.size() == 5);
  CHECK(rows[1] == "matcher,epoch_wall_ns");
  CHECK(rows[2].rfind("dcw,", 0) == 0);
  CHECK(rows[3].rfind("ot,", 0) == 0);
  const auto b = dcw(args);
  CHECK(lines(b.out).front() == rows.front());
  CHECK(json::parse(rows.front())["iterations_per_epoch"] == 2);
}

TEST_CASE("installed binary exit codes") {
  const std::string tool = DCWHASH_TOOL;
  auto status = [](const std::string& cmd) {
    const int raw = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status(tool + " --help") == 0);
  CHECK(status(tool + " eval --db-codes /nonexistent --query-codes /nonexistent") == 2);
}
