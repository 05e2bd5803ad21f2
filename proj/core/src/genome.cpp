#include "rlzg/genome.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "rlzg/error.hpp"

namespace rlzg {

std::vector<Symbol> symbols_from_text(std::string_view text) {
  std::vector<Symbol> out;
  out.reserve(text.size());
  for (char c : text) out.push_back(symbol_from_char(c));
  return out;
}

std::string symbols_to_text(std::span<const Symbol> symbols) {
  std::string out;
  out.reserve(symbols.size());
  for (Symbol s : symbols) out.push_back(symbol_to_char(s));
  return out;
}

namespace {

bool is_alpha(unsigned char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view trim_left(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

[[noreturn]] void bad_fasta(std::size_t line, const std::string& what) {
  fail(ErrorKind::kInvalidArgument, "FASTA line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<Sequence> parse_fasta(std::string_view bytes) {
  std::vector<Sequence> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_content = false;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = bytes.size();
    std::string_view line = bytes.substr(pos, eol - pos);
    ++line_no;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const auto c = static_cast<unsigned char>(line[i]);
      if ((c < 0x20 && c != '\t' && c != '\r') || c >= 0x7f) {
        bad_fasta(line_no, "non-printable byte 0x" + std::to_string(c) + " at column " + std::to_string(i + 1));
      }
    }
    if (!line.empty() && line.front() == '>') {
      std::string_view name = trim_left(trim_right(line.substr(1)));
      if (name.empty()) bad_fasta(line_no, "record header without a name");
      records.push_back(Sequence{std::string(name), {}});
      saw_content = true;
    } else {
      std::string_view body = trim_right(line);
      bool has_letters = false;
      for (char c : body) has_letters |= is_alpha(static_cast<unsigned char>(c));
      if (has_letters) {
        if (records.empty()) bad_fasta(line_no, "sequence data before the first '>' header");
        auto& symbols = records.back().symbols;
        for (char c : body) {
          if (is_alpha(static_cast<unsigned char>(c))) symbols.push_back(symbol_from_char(c));
        }
      }
      saw_content |= !body.empty();
    }
    pos = eol + 1;
  }
  if (records.empty()) {
    fail(ErrorKind::kInvalidArgument, saw_content ? "FASTA input has no '>' record header" : "empty FASTA input");
  }
  return records;
}

std::string write_fasta(const Sequence& seq, std::size_t line_width) {
  if (line_width == 0) fail(ErrorKind::kInvalidArgument, "FASTA line width must be positive");
  std::string out;
  out.reserve(seq.name.size() + 2 + seq.length() + seq.length() / line_width + 1);
  out.push_back('>');
  out += seq.name;
  out.push_back('\n');
  for (std::size_t i = 0; i < seq.length(); i += line_width) {
    const std::size_t end = std::min(seq.length(), i + line_width);
    for (std::size_t j = i; j < end; ++j) out.push_back(symbol_to_char(seq.symbols[j]));
    out.push_back('\n');
  }
  return out;
}

void validate_collection(const Collection& c) {
  if (c.sequences.empty()) fail(ErrorKind::kInvalidArgument, "collection has no sequences");
  if (c.reference_index >= c.sequences.size()) {
    fail(ErrorKind::kInvalidArgument, "reference index " + std::to_string(c.reference_index) + " out of range");
  }
  if (!c.groups.empty() && c.groups.size() != c.sequences.size()) {
    fail(ErrorKind::kInvalidArgument, "group labels do not match the sequence count");
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < c.sequences.size(); ++i) {
    const auto& s = c.sequences[i];
    if (s.name.empty()) fail(ErrorKind::kInvalidArgument, "sequence " + std::to_string(i) + " has no name");
    for (Symbol sym : s.symbols) {
      if (sym >= kAlphabetSize) fail(ErrorKind::kInvalidArgument, "sequence '" + s.name + "' has an invalid symbol code");
    }
    if (!seen.emplace(c.group_of(i), s.name).second) {
      fail(ErrorKind::kInvalidArgument, "duplicate sequence name '" + s.name + "'");
    }
  }
}

}  // namespace rlzg
