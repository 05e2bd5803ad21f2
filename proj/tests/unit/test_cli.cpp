#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "rlzg/genome.hpp"
#include "rlzg_tools/cli.hpp"

using namespace rlzg;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result rlzg_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("rlzg-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string normalized(const std::string& fasta) {
  std::string out;
  for (const auto& s : parse_fasta(fasta)) out += write_fasta(s);
  return out;
}

std::map<std::string, std::string> key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    REQUIRE(eq != std::string::npos);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string wrapped(const std::string& header, const std::vector<Symbol>& s, std::size_t width) {
  std::string out = ">" + header + "\n";
  const auto text = symbols_to_text(s);
  for (std::size_t i = 0; i < text.size(); i += width) out += text.substr(i, width) + "\n";
  return out;
}

struct Fixture {
  TempDir dir;
  std::vector<Symbol> chr1, chr2;
  std::string ref, a, b;

  Fixture() {
    testing::Rng rng(301);
    chr1 = testing::random_acgt(rng, 30'000);
    chr2 = testing::random_acgt(rng, 12'000);
    testing::MutationMix mix;
    mix.snp_rate = 0.004;
    mix.indels = 4;
    mix.novel_segments = 1;
    ref = dir / "chrom.fa";
    a = dir / "a.fasta";
    b = dir / "b.fa";
    spit(ref, wrapped("chr1 reference", chr1, 60) + wrapped("chr2", chr2, 80));
    auto a1 = testing::mutate(rng, chr1, mix);
    a1[50] = kN;
    spit(a, wrapped("chr1", a1, 50) + wrapped("chr2", testing::mutate(rng, chr2, mix), 50) + ">weird\nacgtRYKMnnACGT\n");
    spit(b, wrapped("chr1", testing::mutate(rng, chr1, mix), 70));
  }
};

}  // namespace

TEST_CASE("compress then decompress reproduces normalized inputs") {
  Fixture f;
  const auto archive = f.dir / "out.rlzg";
  auto r = rlzg_run({"compress", "--ref", f.ref, f.a, f.b, "-o", archive});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("bpb=") != std::string::npos);
  CHECK(r.out.find("relative_bpb=") != std::string::npos);
  CHECK(r.out.find("mb_per_s=") != std::string::npos);

  for (const std::string threads : {"1", "3"}) {
    const auto out = f.dir / ("restored" + threads);
    r = rlzg_run({"decompress", archive, "-o", out, "--threads", threads});
    REQUIRE(r.code == 0);
    CHECK(slurp(out + "/chrom.fa") == normalized(slurp(f.ref)));
    CHECK(slurp(out + "/a.fa") == normalized(slurp(f.a)));
    CHECK(slurp(out + "/b.fa") == normalized(slurp(f.b)));
  }
}

TEST_CASE("extract equals the decompressed slice") {
  Fixture f;
  const auto archive = f.dir / "out.rlzg";
  REQUIRE(rlzg_run({"compress", f.ref, f.a, f.b, "-o", archive}).code == 0);
  const auto r = rlzg_run({"extract", archive, "--seq", "b/chr1", "--range", "100:200"});
  REQUIRE(r.code == 0);
  const auto seqs = parse_fasta(r.out);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].name == "chr1:100-200");
  CHECK(seqs[0].length() == 100);
  const auto full = parse_fasta(slurp(f.b));
  CHECK(seqs[0].symbols == std::vector<Symbol>(full[0].symbols.begin() + 100, full[0].symbols.begin() + 200));

  const auto weird = rlzg_run({"extract", archive, "--seq", "weird", "--range", "0:14"});
  REQUIRE(weird.code == 0);
  CHECK(weird.out == ">weird:0-14\nACGTNNNNNNACGT\n");
  const auto empty = rlzg_run({"extract", archive, "--seq", "weird", "--range", "3:3"});
  CHECK(empty.code == 0);
  CHECK(empty.out == ">weird:3-3\n");
}

TEST_CASE("reference choice by name, by path and automatically") {
  Fixture f;
  const auto archive = f.dir / "out.rlzg";
  REQUIRE(rlzg_run({"compress", f.ref, f.a, f.b, "--ref", "b", "-o", archive}).code == 0);
  CHECK(key_values(rlzg_run({"stats", archive}).out)["reference"] == "b");
  REQUIRE(rlzg_run({"compress", f.a, f.b, "--auto-ref", "-o", archive}).code == 0);
  CHECK(key_values(rlzg_run({"stats", archive}).out)["reference"] == "a");
  CHECK(rlzg_run({"compress", f.a, "--ref", "nosuch", "-o", archive}).code == 2);
  CHECK(rlzg_run({"compress", f.a, "--ref", "a", "--auto-ref", "-o", archive}).code == 2);
}

TEST_CASE("profiles and parameter overrides") {
  Fixture f;
  const auto archive = f.dir / "out.rlzg";
  REQUIRE(rlzg_run({"compress", f.ref, f.a, "--profile", "human", "-o", archive}).code == 0);
  auto kv = key_values(rlzg_run({"stats", archive}).out);
  CHECK(kv["m1"] == "20");
  CHECK(kv["granularity"] == "per-record");
  REQUIRE(rlzg_run({"compress", f.ref, f.a, "--m1", "16", "--m2", "5", "--m3", "40", "--checkpoint-interval", "1000",
                    "--candidate-cap", "8", "--per-record", "-o", archive})
              .code == 0);
  kv = key_values(rlzg_run({"stats", archive}).out);
  CHECK(kv["m1"] == "16");
  CHECK(kv["m2"] == "5");
  CHECK(kv["m3"] == "40");
  CHECK(kv["checkpoint_interval"] == "1000");
  CHECK(kv["candidate_cap"] == "8");
  CHECK(kv["granularity"] == "per-record");
  const auto r = rlzg_run({"decompress", archive, "-o", f.dir / "pr"});
  REQUIRE(r.code == 0);
  CHECK(slurp(f.dir / "pr/a.fa") == normalized(slurp(f.a)));

  CHECK(rlzg_run({"compress", f.ref, "--m1", "4", "--m2", "4", "-o", archive}).code == 2);
  CHECK(rlzg_run({"compress", f.ref, "--m3", "5", "-o", archive}).code == 2);
  CHECK(rlzg_run({"compress", f.ref, "--profile", "mouse", "-o", archive}).code == 2);
}

TEST_CASE("stats output is key=value") {
  Fixture f;
  const auto archive = f.dir / "out.rlzg";
  REQUIRE(rlzg_run({"compress", f.ref, f.a, f.b, "-o", archive}).code == 0);
  const auto r = rlzg_run({"stats", archive});
  REQUIRE(r.code == 0);
  const auto kv = key_values(r.out);
  CHECK(kv.at("sequences") == "6");
  CHECK(kv.at("relative_sequences") == "4");
  CHECK(std::stoull(kv.at("total_bytes")) == fs::file_size(archive));
  for (const char* key : {"header_bytes", "reference_payload_bytes", "relative_payload_bytes", "relative_table_bytes",
                          "model_bytes", "reservoir_table_bytes", "bpb", "relative_bpb"}) {
    CHECK(kv.count(key) == 1);
  }
}

TEST_CASE("select-ref prints name and window count") {
  Fixture f;
  const auto r = rlzg_run({"select-ref", f.b, f.ref});
  REQUIRE(r.code == 0);
  const auto kv = key_values(r.out);
  CHECK(kv.at("reference") == "chrom");
  CHECK(kv.at("windows") == std::to_string((30'000 - 12) + (12'000 - 12)));
}

TEST_CASE("usage errors exit with 2") {
  auto r = rlzg_run({"compress"});
  CHECK(r.code == 2);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(rlzg_run({}).code == 2);
  CHECK(rlzg_run({"frobnicate"}).code == 2);
  CHECK(rlzg_run({"compress", "missing.fa", "-o", "x"}).code == 2);
  CHECK(rlzg_run({"--help"}).code == 0);

  Fixture f;
  const auto archive = f.dir / "out.rlzg";
  REQUIRE(rlzg_run({"compress", f.ref, f.b, "-o", archive}).code == 0);
  for (const std::string range : {"5", "a:b", "10:5", "0:999999", ":5", "-1:4"}) {
    r = rlzg_run({"extract", archive, "--seq", "chr2", "--range", range});
    CHECK(r.code == 2);
    CHECK(r.err.rfind("rlzg: error:", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
  CHECK(rlzg_run({"extract", archive, "--seq", "nosuch", "--range", "0:1"}).code == 2);
  REQUIRE(rlzg_run({"compress", f.ref, f.a, "-o", archive}).code == 0);
  CHECK(rlzg_run({"extract", archive, "--seq", "chr2", "--range", "0:1"}).code == 2);  // ambiguous
  CHECK(rlzg_run({"extract", archive, "--seq", "a/chr2", "--range", "0:1"}).code == 0);

  const auto dup = f.dir / "sub";
  fs::create_directories(dup);
  spit(dup + "/b.fa", ">x\nACGT\n");
  CHECK(rlzg_run({"compress", f.b, dup + "/b.fa", "-o", archive}).code == 2);
  spit(f.dir / "bad.fa", "ACGT\n");
  CHECK(rlzg_run({"compress", f.dir / "bad.fa", "-o", archive}).code == 2);
}

TEST_CASE("I/O errors exit with 3") {
  Fixture f;
  CHECK(rlzg_run({"stats", f.dir / "missing.rlzg"}).code == 3);
  CHECK(rlzg_run({"compress", f.b, "-o", f.dir / "no/such/dir/out.rlzg"}).code == 3);
}

TEST_CASE("damaged archives exit with 4") {
  Fixture f;
  const auto archive = f.dir / "out.rlzg";
  REQUIRE(rlzg_run({"compress", f.ref, f.b, "-o", archive}).code == 0);
  const auto good = slurp(archive);

  spit(archive, good.substr(0, good.size() - 10));
  CHECK(rlzg_run({"decompress", archive, "-o", f.dir / "x"}).code == 4);
  auto newer = good;
  newer[4] = static_cast<char>(newer[4] + 1);
  spit(archive, newer);
  const auto r = rlzg_run({"stats", archive});
  CHECK(r.code == 4);
  CHECK(r.err.find("version") != std::string::npos);
  auto flipped = good;
  flipped[good.size() / 2] = static_cast<char>(flipped[good.size() / 2] ^ 0x40);
  spit(archive, flipped);
  CHECK(rlzg_run({"extract", archive, "--seq", "b/chr1", "--range", "0:10"}).code == 4);
  spit(archive, "not an archive at all, just text");
  CHECK(rlzg_run({"stats", archive}).code == 4);
}
