#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "data/png_io.h"
#include "test_util.h"

using namespace stvsr;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

std::string bin() {
  const char* b = std::getenv("STVSR_BIN");
  REQUIRE(b != nullptr);
  return b;
}

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("stvsr_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct RunOut {
  int code;
  std::string out;
};

RunOut run(const std::string& args, const fs::path& workdir = fs::temp_directory_path()) {
  fs::path log = workdir / "cmd_output.txt";
  std::string cmd = "cd '" + workdir.string() + "' && " + bin() + " " + args + " > '" +
                    log.string() + "' 2>&1";
  int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  fs::remove(log);
  return {WEXITSTATUS(status), text};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const std::string kTinyModel = "--channels 8 -M 1 --scale 2 --patch 0 ";

}  // namespace

TEST_CASE("train without --data exits 2 and prints usage") {
  fs::path dir = temp_dir("usage");
  RunOut r = run("train --out out", dir);
  CHECK(r.code == 2);
  CHECK(r.out.find("--data") != std::string::npos);
  CHECK(r.out.find("Usage") != std::string::npos);
}

TEST_CASE("unknown ablate variant exits 2") {
  fs::path dir = temp_dir("badvariant");
  RunOut r = run("ablate --data synth:2:32x32 --out out --variants q --steps 1 " + kTinyModel, dir);
  CHECK(r.code == 2);
}

TEST_CASE("train smoke: checkpoint + log appear, nothing outside --out") {
  fs::path dir = temp_dir("smoke");
  RunOut r = run("train --data synth:4:64x64 --out out --steps 2 --batch 2 --epochs 1 "
                 "--seed 3 --val-every 0 " + kTinyModel,
                 dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out/last/manifest.json"));
  CHECK(fs::exists(dir / "out/train_log.csv"));
  CHECK(fs::exists(dir / "out/config.txt"));
  // only --out (plus the captured log removed by run()) may be created
  std::set<std::string> entries;
  for (auto& e : fs::directory_iterator(dir)) entries.insert(e.path().filename().string());
  CHECK(entries == std::set<std::string>{"out"});
}

TEST_CASE("same seed twice produces identical logs; different seed differs") {
  fs::path dir = temp_dir("determinism");
  std::string args = "train --data synth:4:64x64 --steps 4 --batch 2 --epochs 2 --seed 11 "
                     "--val-every 0 " + kTinyModel;
  CHECK(run(args + " --out a", dir).code == 0);
  CHECK(run(args + " --out b", dir).code == 0);
  CHECK(read_file(dir / "a/train_log.csv") == read_file(dir / "b/train_log.csv"));

  CHECK(run("train --data synth:4:64x64 --steps 4 --batch 2 --epochs 2 --seed 12 "
            "--val-every 0 " + kTinyModel + " --out c",
            dir).code == 0);
  CHECK(read_file(dir / "a/train_log.csv") != read_file(dir / "c/train_log.csv"));
}

TEST_CASE("huge learning rate aborts with exit code 3") {
  fs::path dir = temp_dir("nanabort");
  RunOut r = run("train --data synth:4:64x64 --out out --steps 8 --batch 2 --epochs 8 "
                 "--lr 1e18 --val-every 0 " + kTinyModel,
                 dir);
  CHECK(r.code == 3);
}

TEST_CASE("eval: wrong scale exits 2, matching scale emits the three groups") {
  fs::path dir = temp_dir("eval");
  REQUIRE(run("train --data synth:2:64x64 --out ck --steps 1 --batch 1 --epochs 1 "
              "--seed 5 --val-every 0 " + kTinyModel,
              dir).code == 0);

  RunOut wrong = run("eval --ckpt ck/last --data synth:2:64x64 --scale 4", dir);
  CHECK(wrong.code == 2);

  RunOut table = run("eval --ckpt ck/last --data synth:2:64x64 --report table", dir);
  CHECK(table.code == 0);
  CHECK(table.out.find("st_vsr") != std::string::npos);
  CHECK(table.out.find("s_vsr") != std::string::npos);
  CHECK(table.out.find("t_vsr") != std::string::npos);
  CHECK(table.out.find("PSNR") != std::string::npos);
  CHECK(table.out.find("SSIM") != std::string::npos);
  CHECK(table.out.find("IE") != std::string::npos);

  RunOut csv = run("eval --ckpt ck/last --data synth:2:64x64 --report csv", dir);
  CHECK(csv.code == 0);
  CHECK(csv.out.find("group,id,psnr,ssim,ie") != std::string::npos);
  CHECK(csv.out.find("aggregate") != std::string::npos);
}

TEST_CASE("infer: output sizes, trace dump count, mismatched inputs") {
  fs::path dir = temp_dir("infer");
  // a scale-8 checkpoint with two units
  REQUIRE(run("train --data synth:2:256x256 --out ck --steps 1 --batch 1 --epochs 1 "
              "--seed 7 --val-every 0 --patch 0 --channels 8 -M 2 --scale 8",
              dir).code == 0);

  Tensor<float> f0 = random_uniform<float>(Shape::chw(3, 32, 32), 100, 0.0f, 1.0f);
  Tensor<float> f1 = random_uniform<float>(Shape::chw(3, 32, 32), 101, 0.0f, 1.0f);
  data::write_png((dir / "f0.png").string(), f0);
  data::write_png((dir / "f1.png").string(), f1);

  RunOut r = run("infer --ckpt ck/last --frame0 f0.png --frame1 f1.png --out res "
                 "--dump-trace trace",
                 dir);
  CHECK(r.code == 0);
  for (const char* name : {"H0.png", "Ht.png", "H1.png", "Lt.png"})
    CHECK(fs::exists(dir / "res" / name));
  Tensor<float> ht = data::read_png((dir / "res/Ht.png").string());
  CHECK(ht.shape == Shape::chw(3, 256, 256));
  Tensor<float> lt = data::read_png((dir / "res/Lt.png").string());
  CHECK(lt.shape == Shape::chw(3, 32, 32));

  // M h-maps per time index in the trace dump
  for (const char* t : {"t0", "tt", "t1"}) {
    int count = 0;
    for (auto& e : fs::directory_iterator(dir / "trace")) {
      std::string n = e.path().filename().string();
      if (n.find("_h_" + std::string(t)) != std::string::npos) ++count;
    }
    CHECK(count == 2);
  }

  Tensor<float> small = random_uniform<float>(Shape::chw(3, 16, 32), 102, 0.0f, 1.0f);
  data::write_png((dir / "small.png").string(), small);
  RunOut bad = run("infer --ckpt ck/last --frame0 f0.png --frame1 small.png --out res2", dir);
  CHECK(bad.code == 2);
}

TEST_CASE("ablate --sweep-m with no training emits strictly increasing parameter counts") {
  fs::path dir = temp_dir("sweep");
  RunOut r = run("ablate --sweep-m 2,6 --out out --steps 0 " + kTinyModel, dir);
  CHECK(r.code == 0);
  std::string csv = read_file(dir / "out/ablation.csv");
  REQUIRE(!csv.empty());
  // parse params column of the two rows
  std::vector<int64_t> params;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    size_t a = line.find(',');
    size_t b = line.find(',', a + 1);
    params.push_back(std::stoll(line.substr(a + 1, b - a - 1)));
  }
  REQUIRE(params.size() == 2);
  CHECK(params[1] > params[0]);
}

TEST_CASE("materialize writes the on-disk layout and trains from it") {
  fs::path dir = temp_dir("materialize");
  RunOut r = run("train --data synth:3:64x64 --materialize mat --out out --steps 2 "
                 "--batch 1 --epochs 1 --seed 5 --val-every 0 " + kTinyModel,
                 dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "mat/tri_list.txt"));
  CHECK(fs::exists(dir / "mat/sequences/00001/0001/im2.png"));
  CHECK(fs::exists(dir / "out/last/manifest.json"));
}
