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

#ifndef MIBCI_FETCH_HPP
#define MIBCI_FETCH_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mibci::fetch {

struct ManifestEntry {
  std::string subject;
  std::string run;
  std::string url;
  std::string digest;  // sha256, lowercase hex
  std::uint64_t bytes = 0;
};

// Plain-text manifest: one `subject run url digest bytes` line per entry.
// Blank lines and lines starting with '#' are skipped.
class DatasetManifest {
 public:
  static DatasetManifest from_string(std::string_view text);
  static DatasetManifest load(const std::filesystem::path& path);

  const ManifestEntry& entry(const std::string& subject,
                             const std::string& run) const;
  bool contains(const std::string& subject, const std::string& run) const;
  std::vector<const ManifestEntry*> entries() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, ManifestEntry> entries_;
};

class Transport {
 public:
  virtual ~Transport() = default;
  // Returns the full body; throws Error("TransportError", ...) on failure.
  virtual std::string get(const std::string& url) = 0;
};

// http:// and https:// URLs.
class HttpTransport : public Transport {
 public:
  std::string get(const std::string& url) override;
};

// file:// URLs and bare paths; useful for local mirrors and tests.
class FileTransport : public Transport {
 public:
  std::string get(const std::string& url) override;
};

// Picks HttpTransport or FileTransport from the URL scheme.
class AutoTransport : public Transport {
 public:
  std::string get(const std::string& url) override;

 private:
  HttpTransport http_;
  FileTransport file_;
};

std::string sha256_hex(std::string_view data);

// Returns the verified bytes for (subject, run). Downloads go to a unique
// temp file and are renamed into the cache only after the digest matches;
// a warm cache entry is served without touching the transport.
// Throws: NotInManifest, DigestMismatch, TransportError.
std::string fetch_run(const DatasetManifest& manifest, const std::string& subject,
                      const std::string& run,
                      const std::filesystem::path& cache_dir,
                      Transport& transport);

// Cache location of a run, whether or not it exists yet.
std::filesystem::path cache_path(const std::filesystem::path& cache_dir,
                                 const std::string& subject,
                                 const std::string& run);

}  // namespace mibci::fetch

#endif  // MIBCI_FETCH_HPP
