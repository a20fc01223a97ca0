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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "mibci/fetch.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <httplib.h>

#include "mibci/errors.hpp"
#include "mibci/util.hpp"

namespace mibci::fetch {
namespace {

bool is_hex_digest(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

// Splits "https://host[:port]/path" into (scheme://host[:port], /path).
std::pair<std::string, std::string> split_url(const std::string& url) {
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail("TransportError", "URL without scheme: " + url);
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

DatasetManifest DatasetManifest::from_string(std::string_view text) {
  DatasetManifest m;
  int line_no = 0;
  for (const std::string& line : split(text, '\n')) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const std::vector<std::string> fields = split_whitespace(body);
    if (fields.size() != 5) {
      fail("ParseError", "manifest line " + std::to_string(line_no) +
                             ": expected 5 fields, got " +
                             std::to_string(fields.size()));
    }
    ManifestEntry e{fields[0], fields[1], fields[2], fields[3],
                    static_cast<std::uint64_t>(parse_int(fields[4]))};
    if (!is_hex_digest(e.digest)) {
      fail("ParseError", "manifest line " + std::to_string(line_no) +
                             ": digest is not 64 hex chars");
    }
    const auto key = std::make_pair(e.subject, e.run);
    if (m.entries_.count(key)) {
      fail("ParseError", "manifest line " + std::to_string(line_no) +
                             ": duplicate entry " + e.subject + "/" + e.run);
    }
    m.entries_.emplace(key, std::move(e));
  }
  return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  return from_string(read_file(path));
}

bool DatasetManifest::contains(const std::string& subject,
                               const std::string& run) const {
  return entries_.count({subject, run}) != 0;
}

const ManifestEntry& DatasetManifest::entry(const std::string& subject,
                                            const std::string& run) const {
  const auto it = entries_.find({subject, run});
  if (it == entries_.end()) {
    fail("NotInManifest", subject + "/" + run + " is not in the manifest");
  }
  return it->second;
}

std::vector<const ManifestEntry*> DatasetManifest::entries() const {
  std::vector<const ManifestEntry*> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(&e);
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                  nullptr)) {
    fail("TransportError", "sha256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string HttpTransport::get(const std::string& url) {
  const auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  httplib::Result res = client.Get(path);
  if (!res) {
    fail("TransportError", url + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail("TransportError", url + ": HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::string FileTransport::get(const std::string& url) {
  std::string path = url;
  if (path.rfind("file://", 0) == 0) path = path.substr(7);
  try {
    return read_file(path);
  } catch (const Error& e) {
    fail("TransportError", e.what());
  }
}

std::string AutoTransport::get(const std::string& url) {
  if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0) {
    return http_.get(url);
  }
  return file_.get(url);
}

std::filesystem::path cache_path(const std::filesystem::path& cache_dir,
                                 const std::string& subject,
                                 const std::string& run) {
  return cache_dir / (subject + "_" + run + ".edf");
}

std::string fetch_run(const DatasetManifest& manifest, const std::string& subject,
                      const std::string& run,
                      const std::filesystem::path& cache_dir,
                      Transport& transport) {
  const ManifestEntry& e = manifest.entry(subject, run);
  const std::filesystem::path cached = cache_path(cache_dir, subject, run);

  if (std::filesystem::exists(cached)) {
    std::string bytes = read_file(cached);
    if (sha256_hex(bytes) == e.digest) return bytes;
    std::filesystem::remove(cached);  // stale or corrupt; refetch below
  }

  std::string bytes = transport.get(e.url);
  if (sha256_hex(bytes) != e.digest) {
    fail("DigestMismatch", subject + "/" + run + ": downloaded " +
                               std::to_string(bytes.size()) +
                               " bytes do not match the manifest digest");
  }
  atomic_write_file(cached, bytes);
  return bytes;
}

}  // namespace mibci::fetch
