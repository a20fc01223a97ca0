// Copyright 2026 The MIBCI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mibci/util.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <random>
#include <system_error>

#include "mibci/errors.hpp"

namespace mibci {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) fail("ParseError", "failed to format double");
  return std::string(buf, end);
}

double parse_double(std::string_view token) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    fail("ParseError", "not a number: '" + std::string(token) + "'");
  }
  return value;
}

std::int64_t parse_int(std::string_view token) {
  std::int64_t value = 0;
  auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || end != token.data() + token.size()) {
    fail("ParseError", "not an integer: '" + std::string(token) + "'");
  }
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("IoError", "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) fail("IoError", "read failed for " + path.string());
  return data;
}

void atomic_write_file(const std::filesystem::path& path,
                       std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);

  std::random_device rd;
  const fs::path tmp =
      dir / (path.filename().string() + ".tmp." + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("IoError", "cannot create " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      fail("IoError", "write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    fail("IoError", "rename to " + path.string() + " failed: " + ec.message());
  }
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

void BinaryWriter::raw(const void* p, std::size_t n) {
  static_assert(std::endian::native == std::endian::little,
                "big-endian hosts need byte swaps here");
  buf_.append(static_cast<const char*>(p), n);
}

std::string_view BinaryReader::bytes(std::size_t n) {
  if (remaining() < n) fail("TruncatedFile", "unexpected end of data");
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint16_t BinaryReader::u16() {
  std::uint16_t v;
  std::memcpy(&v, bytes(2).data(), 2);
  return v;
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  std::memcpy(&v, bytes(4).data(), 4);
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  std::memcpy(&v, bytes(8).data(), 8);
  return v;
}

double BinaryReader::f64() {
  double v;
  std::memcpy(&v, bytes(8).data(), 8);
  return v;
}

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  return std::string(bytes(n));
}

}  // namespace mibci
