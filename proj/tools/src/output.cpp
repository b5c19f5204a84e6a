#include "output.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#include "dyntun/error.hpp"

namespace dyntun::app {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorKind::numeric, "number formatting failed");
  return std::string(buf.data(), end);
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw Error(ErrorKind::io, "cannot create output directory " + dir_.string() +
                                   (ec ? ": " + ec.message() : ""));
  }
}

void OutputSet::write(const std::string& name, const std::string& content) {
  const auto path = dir_ / name;
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  }
  for (auto& r : records_) {
    if (r.name == name) {
      r = {name, content.size(), sha256_hex(content)};
      return;
    }
  }
  records_.push_back({name, content.size(), sha256_hex(content)});
}

void OutputSet::write_json(const std::string& name, const nlohmann::ordered_json& value) {
  write(name, value.dump(2) + "\n");
}

nlohmann::ordered_json OutputSet::file_records() const {
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& r : records_) {
    files.push_back({{"name", r.name}, {"bytes", r.bytes}, {"sha256", r.sha256}});
  }
  return files;
}

}  // namespace dyntun::app
