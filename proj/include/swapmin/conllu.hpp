#pragma once

// Streaming CoNLL-U reader. Only the columns needed for triplet extraction
// are kept (ID, FORM, UPOS, HEAD, DEPREL).

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swapmin {

struct Token {
  int id = 0;  // 1-based word index
  std::string form;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;
};

struct Sentence {
  std::vector<Token> tokens;

  // tokens[id - 1]; id must be valid.
  const Token& at(int id) const { return tokens.at(static_cast<std::size_t>(id - 1)); }
};

enum class ParseMode { Strict, Lenient };

// Line-oriented byte source.
class LineSource {
 public:
  virtual ~LineSource() = default;
  // Reads the next line without its terminator. Returns false at end.
  virtual bool next_line(std::string& line) = 0;
};

// Wraps a caller-owned istream.
std::unique_ptr<LineSource> make_stream_source(std::istream& in);

// Opens a file, transparently decompressing gzip. Throws DataError if the
// file cannot be opened.
std::unique_ptr<LineSource> make_file_source(const std::string& path);

class ConlluReader {
 public:
  using Diagnostic = std::function<void(const std::string&)>;

  ConlluReader(std::unique_ptr<LineSource> source, std::string source_name,
               ParseMode mode = ParseMode::Strict, Diagnostic on_skip = {});

  // Next sentence in file order, or nullopt at end of input. In strict mode
  // malformed input throws ParseError; in lenient mode the offending
  // sentence is skipped and reported through the diagnostic callback.
  std::optional<Sentence> next();

  std::size_t skipped_sentences() const noexcept { return skipped_; }

 private:
  std::unique_ptr<LineSource> source_;
  std::string name_;
  ParseMode mode_;
  Diagnostic on_skip_;
  std::size_t line_no_ = 0;
  std::size_t skipped_ = 0;
};

// Convenience for tests and small inputs.
std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source_name = "<stream>",
                                   ParseMode mode = ParseMode::Strict);

}  // namespace swapmin
