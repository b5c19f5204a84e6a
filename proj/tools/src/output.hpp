#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace dyntun::app {

// Shortest decimal text that round-trips the double.
std::string format_number(double v);

std::string sha256_hex(const std::string& bytes);

// Files produced by one run. Every write is recorded so the manifest can
// list and hash it; the manifest itself is written last.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::ordered_json& value);

  // Lists files with their byte counts and SHA-256 digests.
  nlohmann::ordered_json file_records() const;

 private:
  struct Record {
    std::string name;
    std::size_t bytes;
    std::string sha256;
  };
  std::filesystem::path dir_;
  std::vector<Record> records_;
};

// Incremental CSV text builder.
class Csv {
 public:
  explicit Csv(const std::string& header) { text_ = header + "\n"; }
  template <typename... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((text_ += (first ? "" : ","), text_ += cell(values), first = false), ...);
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  std::string text_;
};

}  // namespace dyntun::app
