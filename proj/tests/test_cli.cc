#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <array>
#include <cstdio>

#include "fixtures.h"
#include "masgcn/checkpoint.h"

using namespace masgcn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g_cli;

struct Run {
  int code = 0;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = g_cli + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("end-to-end workflow") {
  fx::TempDir dir;
  const std::string d = dir.path().string();
  ::unsetenv("MASGCN_CACHE_DIR");
  Run s = run("synth --out " + d + "/data/syn --train-count 30 --test-count 12");
  REQUIRE(s.code == 0);
  Run p = run("prepare --dataset syn --data-dir " + d + "/data --out " + d + "/cache --num-views 3");
  INFO(p.out);
  REQUIRE(p.code == 0);
  CHECK(p.out.find("train") != std::string::npos);
  CHECK(fs::exists(dir / "cache" / "syn" / "features.bin"));

  TrainConfig c = fx::small_config(dir.path(), "syn");
  c.epochs = 1;
  c.out_dir = d + "/runs";
  c.save(d + "/c.json");
  Run t = run("train --config " + d + "/c.json");
  INFO(t.out);
  REQUIRE(t.code == 0);
  CHECK(t.out.find("epoch   1") != std::string::npos);
  const std::string ckpt = d + "/runs/syn.best.ckpt";
  REQUIRE(fs::exists(ckpt));

  Run e = run("eval --ckpt " + ckpt + " --split test --out " + d + "/eval.json");
  INFO(e.out);
  REQUIRE(e.code == 0);
  json rep = json::parse(read_file(dir / "eval.json"));
  CHECK(rep["count"] == 12);
  CHECK(rep["config_hash"] == c.hash());
  CHECK(rep["seed"] == 42);
  CHECK(e.out.find("macro_f1") != std::string::npos);

  Run x = run("export-matrices --ckpt " + ckpt + " --id 1 --out " + d + "/m.json");
  REQUIRE(x.code == 0);
  json m = json::parse(read_file(dir / "m.json"));
  CHECK(m["a"].size() == 3);
  Run bad_id = run("export-matrices --ckpt " + ckpt + " --id 500");
  CHECK(bad_id.code == 1);
  CHECK(bad_id.out.find("unknown sentence id") != std::string::npos);

  Run sw = run("sweep --param gamma --values 0,0.1 --config " + d + "/c.json --out " + d + "/sweep.json");
  INFO(sw.out);
  REQUIRE(sw.code == 0);
  CHECK(json::parse(read_file(dir / "sweep.json"))["rows"].size() == 2);
  Run ab = run("ablate --config " + d + "/c.json");
  REQUIRE(ab.code == 0);
  json abj = json::parse(read_file(dir / "runs" / "syn.ablation.json"));
  CHECK(abj["rows"].size() == 3);
  CHECK(ab.out.find("no_structural_entropy") != std::string::npos);

  // The cache location can be moved through the environment.
  fs::rename(dir / "cache", dir / "moved");
  ::setenv("MASGCN_CACHE_DIR", (d + "/moved").c_str(), 1);
  CHECK(run("eval --ckpt " + ckpt).code == 0);
  ::unsetenv("MASGCN_CACHE_DIR");
  CHECK(run("eval --ckpt " + ckpt).code == 1);
}

TEST_CASE("argument and config errors") {
  fx::TempDir dir;
  const std::string d = dir.path().string();
  write_file_atomic(dir / "bad.json", "{\"num_views\": 3, \"colour\": 1}");
  Run r = run("train --config " + d + "/bad.json");
  CHECK(r.code == 1);
  CHECK(r.out.find("colour") != std::string::npos);
  CHECK(run("sweep --param L --values 1").code != 0);
  CHECK(run("sweep --param gamma --values 0,abc --config " + d + "/bad.json").code != 0);
  CHECK(run("").code != 0);
  CHECK(run("eval --ckpt " + d + "/nope.ckpt").code == 1);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-masgcn> [doctest options]\n");
    return 2;
  }
  g_cli = argv[1];
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  return ctx.run();
}
