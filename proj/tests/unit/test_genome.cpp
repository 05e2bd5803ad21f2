#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "rlzg/error.hpp"
#include "rlzg/genome.hpp"

using namespace rlzg;

namespace {

std::vector<Symbol> syms(std::initializer_list<int> v) {
  std::vector<Symbol> out;
  for (int x : v) out.push_back(static_cast<Symbol>(x));
  return out;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInternal;
}

}  // namespace

TEST_CASE("parse_fasta maps bases directly") {
  const auto seqs = parse_fasta(">s1\nACGT\n");
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].name == "s1");
  CHECK(seqs[0].symbols == syms({0, 1, 2, 3}));
}

TEST_CASE("parse_fasta folds case and ambiguity codes to N") {
  const auto seqs = parse_fasta(">s1\nacgRn\n");
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].symbols == syms({0, 1, 2, 4, 4}));
  for (char c : std::string("RYKMSWBDHVNrykmswbdhvnXx")) CHECK(symbol_from_char(c) == kN);
}

TEST_CASE("parse_fasta splits records") {
  const auto seqs = parse_fasta(">a\nAC\n>b\nGT\n");
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[0].name == "a");
  CHECK(seqs[1].name == "b");
  CHECK(seqs[0].length() == 2);
  CHECK(seqs[1].length() == 2);
}

TEST_CASE("parse_fasta tolerates CRLF and arbitrary widths") {
  const auto seqs = parse_fasta(">x desc\r\nAC\r\nG\r\nTTTT\r\n");
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].name == "x desc");
  CHECK(seqs[0].symbols == syms({0, 1, 2, 3, 3, 3, 3}));
}

TEST_CASE("parse_fasta rejects malformed input") {
  CHECK(kind_of([] { parse_fasta(""); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { parse_fasta(">\nACGT\n"); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { parse_fasta("ACGT\n"); }) == ErrorKind::kInvalidArgument);
  CHECK(kind_of([] { parse_fasta(std::string(">a\nAC\0GT\n", 10)); }) == ErrorKind::kInvalidArgument);
  try {
    parse_fasta(">a\nAC\x01GT\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("write_fasta layout") {
  CHECK(write_fasta({"s1", syms({0, 1, 2, 3})}, 2) == ">s1\nAC\nGT\n");
  CHECK(write_fasta({"e", {}}) == ">e\n");
  CHECK(write_fasta({"n", syms({4, 4, 4})}, 70) == ">n\nNNN\n");
  CHECK_THROWS_AS(write_fasta({"s", syms({0})}, 0), Error);
}

TEST_CASE("write then parse is the identity") {
  testing::Rng rng(7);
  for (std::size_t width : {1u, 3u, 60u, 70u, 10'001u}) {
    Sequence s{"r", testing::random_acgt(rng, 10'000)};
    for (std::size_t i = 0; i < s.symbols.size(); i += 97) s.symbols[i] = kN;
    const auto back = parse_fasta(write_fasta(s, width));
    REQUIRE(back.size() == 1);
    CHECK(back[0] == s);
  }
}

TEST_CASE("parse_fasta keeps every letter exactly once") {
  testing::Rng rng(11);
  const std::string letters = "ACGTNacgtnRYKMSWBDHV";
  std::string text = ">z\n";
  std::size_t count = 0;
  for (int i = 0; i < 5000; ++i) {
    text += letters[rng() % letters.size()];
    ++count;
    if (rng() % 50 == 0) text += '\n';
  }
  const auto seqs = parse_fasta(text);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0].length() == count);
  for (Symbol s : seqs[0].symbols) CHECK(s <= kN);
}

TEST_CASE("collection validation") {
  Collection c;
  CHECK_THROWS_AS(validate_collection(c), Error);
  c.sequences = {{"a", syms({0})}, {"a", syms({1})}};
  CHECK_THROWS_AS(validate_collection(c), Error);
  c.sequences[1].name = "b";
  validate_collection(c);
  c.reference_index = 2;
  CHECK_THROWS_AS(validate_collection(c), Error);
}
