#include "rlzg_tools/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "rlzg/archive.hpp"
#include "rlzg/error.hpp"

namespace rlzg::cli {

namespace fs = std::filesystem;

namespace {

std::shared_ptr<spdlog::logger> logger() {
  static const auto log = [] {
    auto l = spdlog::stderr_logger_st("rlzg");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("RLZG_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorKind::kIo, "cannot read '" + path.string() + "'");
  return data;
}

void write_file(const fs::path& path, std::span<const char> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot create '" + path.string() + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
}

Archive load_archive(const fs::path& path) {
  const std::string data = read_file(path);
  return Archive::from_bytes(std::vector<std::uint8_t>(data.begin(), data.end()));
}

std::string group_name(const fs::path& path) { return path.stem().string(); }

// Input files in collection order, one group per file.
Collection load_collection(const std::vector<std::string>& files) {
  Collection c;
  std::map<std::string, std::string> seen;
  for (const auto& file : files) {
    const std::string group = group_name(file);
    if (auto [it, fresh] = seen.emplace(group, file); !fresh) {
      fail(ErrorKind::kInvalidArgument, "inputs '" + it->second + "' and '" + file + "' share the name '" + group + "'");
    }
    std::vector<Sequence> records;
    try {
      records = parse_fasta(read_file(file));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) throw;
      fail(e.kind(), file + ": " + e.what());
    }
    spdlog::logger& log = *logger();
    log.info("read {} ({} records)", file, records.size());
    for (auto& r : records) {
      c.sequences.push_back(std::move(r));
      c.groups.push_back(group);
    }
  }
  return c;
}

std::size_t first_of_group(const Collection& c, const std::string& group) {
  for (std::size_t i = 0; i < c.sequences.size(); ++i) {
    if (c.group_of(i) == group) return i;
  }
  fail(ErrorKind::kInvalidArgument, "no input named '" + group + "' for --ref");
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

struct CompressArgs {
  std::vector<std::string> inputs;
  std::string output;
  std::string ref;
  bool auto_ref = false;
  bool per_record = false;
  std::string profile = "default";
  std::optional<std::uint32_t> m1, m2, m3, interval, cap;
};

int do_compress(const CompressArgs& a, std::ostream& out) {
  ParseParams params = a.profile == "human" ? ParseParams::human() : ParseParams{};
  if (a.m1) params.min_match = *a.m1;
  if (a.m2) params.min_extension = *a.m2;
  if (a.m3) params.min_reservoir_run = *a.m3;
  if (a.interval) params.checkpoint_interval = *a.interval;
  if (a.cap) params.candidate_cap = *a.cap;
  validate_params(params);

  std::vector<std::string> inputs = a.inputs;
  // --ref names an input genome, or else a FASTA path that joins the inputs.
  const bool ref_is_name = std::any_of(inputs.begin(), inputs.end(),
                                       [&](const std::string& f) { return group_name(f) == a.ref; });
  std::string ref_group = a.ref;
  if (!a.ref.empty() && !ref_is_name) {
    if (!fs::is_regular_file(a.ref)) fail(ErrorKind::kInvalidArgument, "--ref '" + a.ref + "' is neither an input name nor a file");
    const bool listed = std::any_of(inputs.begin(), inputs.end(),
                                    [&](const std::string& f) { return fs::equivalent(f, a.ref); });
    if (!listed) inputs.insert(inputs.begin(), a.ref);
    ref_group = group_name(a.ref);
  }
  Collection c = load_collection(inputs);
  if (a.per_record || a.profile == "human") c.granularity = MatchingGranularity::kPerRecord;
  if (a.auto_ref) {
    const auto choice = select_reference(c, params.min_match);
    c.reference_index = choice.index;
    logger()->info("auto reference: {} ({} windows)", c.group_of(choice.index), choice.windows);
  } else if (!a.ref.empty()) {
    c.reference_index = first_of_group(c, ref_group);
  }

  CompressStats stats;
  const Archive archive = compress(c, params, {}, &stats);
  const auto& bytes = archive.bytes();
  write_file(a.output, std::span(reinterpret_cast<const char*>(bytes.data()), bytes.size()));

  const auto& sz = archive.sizes();
  const double in_mb = static_cast<double>(stats.input_symbols) / 1e6;
  const double out_mb = static_cast<double>(sz.total) / 1e6;
  const double bpb = stats.input_symbols ? 8.0 * static_cast<double>(sz.total) / static_cast<double>(stats.input_symbols) : 0.0;
  const double rel_bpb =
      sz.relative_symbols ? 8.0 * static_cast<double>(sz.relative_part()) / static_cast<double>(sz.relative_symbols) : 0.0;
  const double speed = stats.seconds > 0 ? in_mb / stats.seconds : 0.0;
  out << "input_mb=" << fixed(in_mb, 3) << " output_mb=" << fixed(out_mb, 3) << " bpb=" << fixed(bpb, 4)
      << " relative_bpb=" << fixed(rel_bpb, 4) << " mb_per_s=" << fixed(speed, 2)
      << " reference=" << c.group_of(c.reference_index) << "\n";
  return kExitOk;
}

int do_decompress(const std::string& input, const std::string& dir, unsigned threads, std::ostream& out) {
  const Archive archive = load_archive(input);
  const auto t0 = std::chrono::steady_clock::now();
  const Collection c = decompress(archive, {std::max(1u, threads)});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create directory '" + dir + "': " + ec.message());
  std::vector<std::string> order;
  std::map<std::string, std::string> files;
  std::uint64_t symbols = 0;
  for (std::size_t i = 0; i < c.sequences.size(); ++i) {
    const std::string& g = c.group_of(i);
    if (!files.count(g)) order.push_back(g);
    files[g] += write_fasta(c.sequences[i]);
    symbols += c.sequences[i].length();
  }
  for (const auto& g : order) {
    const fs::path path = fs::path(dir) / (g + ".fa");
    write_file(path, files[g]);
    logger()->info("wrote {}", path.string());
  }
  out << "files=" << order.size() << " output_mb=" << fixed(static_cast<double>(symbols) / 1e6, 3)
      << " mb_per_s=" << fixed(seconds > 0 ? static_cast<double>(symbols) / 1e6 / seconds : 0.0, 2) << "\n";
  return kExitOk;
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
      fail(ErrorKind::kInvalidArgument, "bad --range '" + text + "' (expected START:END, 0-based, end exclusive)");
    }
    return v;
  };
  if (colon == std::string::npos) number("");
  const std::string_view all(text);
  return {number(all.substr(0, colon)), number(all.substr(colon + 1))};
}

int do_extract(const std::string& input, const std::string& seq, const std::string& range, std::ostream& out) {
  const auto [start, end] = parse_range(range);
  const Archive archive = load_archive(input);
  const std::size_t index = archive.find_sequence(seq);
  ExtractStats stats;
  const auto symbols = extract(archive, index, start, end, &stats);
  logger()->info("extract: {} windows, {} coded bytes, {} reference bytes, {} reservoir lookups", stats.windows_decoded,
                 stats.coded_bytes_read, stats.reference_bytes_read, stats.reservoir_lookups);
  const auto& name = archive.header().sequences[index].name;
  out << write_fasta({name + ":" + std::to_string(start) + "-" + std::to_string(end), symbols});
  return kExitOk;
}

int do_select_ref(const std::vector<std::string>& inputs, std::uint32_t window, std::ostream& out) {
  const Collection c = load_collection(inputs);
  const auto choice = select_reference(c, window);
  out << "reference=" << c.group_of(choice.index) << "\nwindows=" << choice.windows << "\n";
  return kExitOk;
}

int do_stats(const std::string& input, std::ostream& out) {
  const Archive archive = load_archive(input);
  const auto& h = archive.header();
  const auto& sz = archive.sizes();
  std::size_t relative = 0;
  for (const auto& e : h.sequences) relative += e.role == SequenceRole::kRelative;
  const std::uint64_t symbols = sz.reference_symbols + sz.relative_symbols;
  auto kv = [&](const char* k, const auto& v) { out << k << "=" << v << "\n"; };
  kv("version", static_cast<int>(h.version));
  kv("sequences", h.sequences.size());
  kv("relative_sequences", relative);
  kv("reference", h.sequences[archive.reference_record()].group);
  kv("granularity", h.granularity == MatchingGranularity::kPerRecord ? "per-record" : "whole-sequence");
  kv("m1", h.params.min_match);
  kv("m2", h.params.min_extension);
  kv("m3", h.params.min_reservoir_run);
  kv("candidate_cap", h.params.candidate_cap);
  kv("checkpoint_interval", h.params.checkpoint_interval);
  kv("total_bytes", sz.total);
  kv("header_bytes", sz.header);
  kv("reference_payload_bytes", sz.reference_payload);
  kv("reference_index_bytes", sz.reference_index);
  kv("reservoir_table_bytes", sz.reservoir_table);
  kv("reservoir_phrases", h.reservoir.entries().size());
  kv("reservoir_symbols", h.reservoir.total_length());
  kv("model_bytes", sz.models);
  kv("sequence_table_bytes", sz.sequence_table);
  kv("relative_payload_bytes", sz.relative_payload);
  kv("relative_table_bytes", sz.relative_tables);
  kv("reference_symbols", sz.reference_symbols);
  kv("relative_symbols", sz.relative_symbols);
  auto bpb = [](std::uint64_t bytes, std::uint64_t n) { return n ? fixed(8.0 * static_cast<double>(bytes) / static_cast<double>(n), 4) : std::string("0"); };
  kv("bpb", bpb(sz.total, symbols));
  kv("reference_bpb", bpb(sz.compressed_reference(), sz.reference_symbols));
  kv("relative_bpb", bpb(sz.relative_part(), sz.relative_symbols));
  return kExitOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kOutOfRange:
    case ErrorKind::kNotFound:
      return kExitUsage;
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kCorrupt:
    case ErrorKind::kUnsupportedVersion:
      return kExitCorrupt;
    case ErrorKind::kInternal:
      break;
  }
  return kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relative LZ compressor for collections of similar genomes", "rlzg"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CompressArgs ca;
  auto* compress_cmd = app.add_subcommand("compress", "Compress FASTA files into an archive");
  compress_cmd->add_option("inputs", ca.inputs, "FASTA files; each file is one genome named by its file stem")
      ->required()
      ->check(CLI::ExistingFile);
  compress_cmd->add_option("-o,--output", ca.output, "Archive to write")->required();
  auto* ref_opt = compress_cmd->add_option("--ref", ca.ref, "Reference genome: an input name or a FASTA path");
  compress_cmd->add_flag("--auto-ref", ca.auto_ref, "Pick the genome with the most N-free M1 windows")->excludes(ref_opt);
  compress_cmd->add_flag("--per-record", ca.per_record, "Match each record only against its counterpart reference record");
  compress_cmd->add_option("--profile", ca.profile, "Parameter preset (human: m1=20 and --per-record)")
      ->check(CLI::IsMember({"default", "human"}));
  compress_cmd->add_option("--m1", ca.m1, "Minimum match length (default 13)");
  compress_cmd->add_option("--m2", ca.m2, "Minimum piece length after a gap (default 4)");
  compress_cmd->add_option("--m3", ca.m3, "Minimum literal run kept as an extra reference phrase (default 32)");
  compress_cmd->add_option("--checkpoint-interval", ca.interval, "Symbols per random-access window (default 8192)");
  compress_cmd->add_option("--candidate-cap", ca.cap, "Match candidates examined per position (default 128)");

  std::string archive_path, out_dir;
  unsigned threads = 1;
  auto* decompress_cmd = app.add_subcommand("decompress", "Restore every genome as DIR/<name>.fa");
  decompress_cmd->add_option("archive", archive_path, "Archive file")->required();
  decompress_cmd->add_option("-o,--output", out_dir, "Output directory")->required();
  decompress_cmd->add_option("--threads", threads, "Decoder threads")->check(CLI::Range(1u, 256u));

  std::string seq_name, range;
  auto* extract_cmd = app.add_subcommand("extract", "Print one range of one sequence as FASTA");
  extract_cmd->add_option("archive", archive_path, "Archive file")->required();
  extract_cmd->add_option("--seq", seq_name, "Sequence name, or genome/name when the name is not unique")->required();
  extract_cmd->add_option("--range", range, "START:END, 0-based, END exclusive")->required();

  std::vector<std::string> select_inputs;
  std::uint32_t window = 13;
  auto* select_cmd = app.add_subcommand("select-ref", "Suggest a reference genome");
  select_cmd->add_option("inputs", select_inputs, "FASTA files")->required()->check(CLI::ExistingFile);
  select_cmd->add_option("--m1", window, "Window length (default 13)")->check(CLI::PositiveNumber);

  auto* stats_cmd = app.add_subcommand("stats", "Print archive section sizes as key=value lines");
  stats_cmd->add_option("archive", archive_path, "Archive file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*compress_cmd) return do_compress(ca, out);
    if (*decompress_cmd) return do_decompress(archive_path, out_dir, threads, out);
    if (*extract_cmd) return do_extract(archive_path, seq_name, range, out);
    if (*select_cmd) return do_select_ref(select_inputs, window, out);
    if (*stats_cmd) return do_stats(archive_path, out);
  } catch (const Error& e) {
    err << "rlzg: error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    err << "rlzg: error: out of memory\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "rlzg: error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace rlzg::cli
