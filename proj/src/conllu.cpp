#include "swapmin/conllu.hpp"

#include <zlib.h>

#include <charconv>
#include <istream>
#include <string_view>

#include "swapmin/error.hpp"

namespace swapmin {

namespace {

class StreamSource final : public LineSource {
 public:
  explicit StreamSource(std::istream& in) : in_(in) {}

  bool next_line(std::string& line) override {
    if (!std::getline(in_, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

 private:
  std::istream& in_;
};

class GzipSource final : public LineSource {
 public:
  explicit GzipSource(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
    if (file_ == nullptr) throw DataError("cannot open " + path);
    gzbuffer(file_, 1 << 17);
  }
  ~GzipSource() override { gzclose(file_); }
  GzipSource(const GzipSource&) = delete;
  GzipSource& operator=(const GzipSource&) = delete;

  bool next_line(std::string& line) override {
    line.clear();
    char buf[4096];
    bool got_any = false;
    while (gzgets(file_, buf, sizeof buf) != nullptr) {
      got_any = true;
      std::string_view chunk(buf);
      if (!chunk.empty() && chunk.back() == '\n') {
        chunk.remove_suffix(1);
        line.append(chunk);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      line.append(chunk);
    }
    int err = 0;
    gzerror(file_, &err);
    if (err != Z_OK && err != Z_STREAM_END) throw DataError("gzip read error");
    return got_any;
  }

 private:
  gzFile file_;
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

// Validates ids (1..n, consecutive) and heads (0 or an id in range).
std::optional<std::string> check_sentence(const Sentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.id != i + 1) return "token ids must run 1..n without gaps";
    if (t.head < 0 || t.head > n) return "head " + std::to_string(t.head) + " out of range";
    if (t.head == t.id) return "token " + std::to_string(t.id) + " is its own head";
  }
  return std::nullopt;
}

}  // namespace

std::unique_ptr<LineSource> make_stream_source(std::istream& in) {
  return std::make_unique<StreamSource>(in);
}

std::unique_ptr<LineSource> make_file_source(const std::string& path) {
  return std::make_unique<GzipSource>(path);
}

ConlluReader::ConlluReader(std::unique_ptr<LineSource> source, std::string source_name,
                           ParseMode mode, Diagnostic on_skip)
    : source_(std::move(source)),
      name_(std::move(source_name)),
      mode_(mode),
      on_skip_(std::move(on_skip)) {}

std::optional<Sentence> ConlluReader::next() {
  std::string line;
  Sentence sentence;
  std::optional<std::string> problem;
  std::size_t problem_line = 0;
  std::size_t first_line = 0;

  auto fail = [&](std::string what) {
    if (!problem) {
      problem = std::move(what);
      problem_line = line_no_;
    }
  };

  // Returns true when a sentence should be handed out, false to keep
  // scanning (an empty block or a skipped malformed sentence).
  auto finish = [&]() -> bool {
    if (!problem && sentence.tokens.empty()) return false;
    if (!problem) {
      if (auto bad = check_sentence(sentence)) {
        problem = *bad;
        problem_line = first_line;
      }
    }
    if (!problem) return true;
    if (mode_ == ParseMode::Strict) throw ParseError(name_, problem_line, *problem);
    ++skipped_;
    if (on_skip_)
      on_skip_(name_ + ":" + std::to_string(problem_line) + ": skipped sentence: " + *problem);
    sentence.tokens.clear();
    problem.reset();
    return false;
  };

  while (source_->next_line(line)) {
    ++line_no_;
    if (line.empty()) {
      if (finish()) return sentence;
      continue;
    }
    if (line.front() == '#') continue;
    if (problem) continue;  // discard the rest of a broken sentence
    if (sentence.tokens.empty()) first_line = line_no_;

    const auto fields = split_tabs(line);
    if (fields.size() != 10) {
      fail("expected 10 tab-separated columns, found " + std::to_string(fields.size()));
      continue;
    }
    const std::string_view id_field = fields[0];
    // Multiword ranges ("3-4") and empty nodes ("3.1") carry no basic tree.
    if (id_field.find('-') != std::string_view::npos ||
        id_field.find('.') != std::string_view::npos)
      continue;

    const auto id = parse_int(id_field);
    const auto head = parse_int(fields[6]);
    if (!id || *id < 1) {
      fail("unparsable token id '" + std::string(id_field) + "'");
      continue;
    }
    if (!head) {
      fail("unparsable head '" + std::string(fields[6]) + "'");
      continue;
    }
    sentence.tokens.push_back(
        Token{*id, std::string(fields[1]), std::string(fields[3]), *head, std::string(fields[7])});
  }
  // A file need not end with a blank line.
  if (finish()) return sentence;
  return std::nullopt;
}

std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source_name,
                                   ParseMode mode) {
  ConlluReader reader(make_stream_source(in), source_name, mode);
  std::vector<Sentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace swapmin
