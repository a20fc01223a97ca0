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

#include "mibci/config.hpp"

#include <cstdlib>

#include "mibci/util.hpp"

namespace mibci::config {
namespace {

[[noreturn]] void config_error(const std::string& field, const std::string& why) {
  fail("ConfigError", field + ": " + why);
}

std::vector<std::string> parse_list(const std::string& csv) {
  std::vector<std::string> out;
  for (const std::string& item : split(csv, ',')) {
    const std::string_view t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

}  // namespace

KeyValueFile KeyValueFile::from_string(std::string_view text,
                                       const std::vector<std::string>& overrides) {
  KeyValueFile kv;
  int line_no = 0;
  for (const std::string& line : split(text, '\n')) {
    ++line_no;
    const std::string_view body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) {
      fail("ConfigError", "line " + std::to_string(line_no) +
                              ": expected `key = value`");
    }
    const std::string key(trim(body.substr(0, eq)));
    if (key.empty()) {
      fail("ConfigError", "line " + std::to_string(line_no) + ": empty key");
    }
    kv.values_[key] = std::string(trim(body.substr(eq + 1)));
  }
  for (const std::string& ov : overrides) {
    const std::size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      fail("ConfigError", "--set expects key=value, got '" + ov + "'");
    }
    kv.values_[std::string(trim(std::string_view(ov).substr(0, eq)))] =
        std::string(trim(std::string_view(ov).substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path,
                                const std::vector<std::string>& overrides) {
  if (!std::filesystem::exists(path)) {
    fail("ConfigError", "config file " + path.string() + " does not exist");
  }
  return from_string(read_file(path), overrides);
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_double(it->second);
  } catch (const Error&) {
    config_error(key, "'" + it->second + "' is not a number");
  }
}

long KeyValueFile::get_int(const std::string& key, long fallback) const {
  read_[key] = true;
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return parse_int(it->second);
  } catch (const Error&) {
    config_error(key, "'" + it->second + "' is not an integer");
  }
}

std::vector<std::string> KeyValueFile::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!read_.count(key)) out.push_back(key);
  }
  return out;
}

namespace {

RunConfig build(const KeyValueFile& kv) {
  RunConfig cfg;

  cfg.manifest_path = kv.get_string("dataset.manifest", "");
  cfg.cache_dir = kv.get_string("dataset.cache_dir", "cache");
  if (const char* env = std::getenv("MIBCI_CACHE"); env && *env) {
    cfg.cache_dir = env;
  }
  cfg.subjects = parse_list(kv.get_string("dataset.subjects", ""));
  cfg.runs = parse_list(kv.get_string("dataset.runs", ""));
  cfg.test_fraction = kv.get_double("dataset.test_fraction", 0.1);
  cfg.classes = parse_list(kv.get_string("dataset.classes", "T0,T1,T2"));
  cfg.split_seed = static_cast<std::uint64_t>(kv.get_int("dataset.seed", 0));

  cfg.dsp.filter.low_hz = kv.get_double("dsp.low_hz", 5.0);
  cfg.dsp.filter.high_hz = kv.get_double("dsp.high_hz", 50.0);
  cfg.dsp.filter.order = static_cast<int>(kv.get_int("dsp.order", 4));
  cfg.dsp.morlet.center_freq_hz = kv.get_double("dsp.center_freq_hz", 1.0);
  cfg.dsp.morlet.fwhm_s = kv.get_double("dsp.fwhm_s", 3.0);
  cfg.dsp.morlet.freqs_hz = dsp::frequency_grid(
      kv.get_double("dsp.freq_lo_hz", 8.0), kv.get_double("dsp.freq_hi_hz", 30.0),
      kv.get_double("dsp.freq_step_hz", 1.0));
  cfg.dsp.time_bins = static_cast<int>(kv.get_int("dsp.time_bins", 64));
  cfg.dsp.window_s = kv.get_double("dsp.window_s", 4.0);
  cfg.dsp.offset_s = kv.get_double("dsp.offset_s", 0.0);
  cfg.scout_file = kv.get_string("dsp.scout_file", "");
  cfg.scout_name = kv.get_string("dsp.scout", "R5");

  cfg.model_seed = static_cast<std::uint64_t>(kv.get_int("model.seed", 0));
  const std::string arch = kv.get_string("model.arch", "");
  if (!arch.empty()) cfg.arch_tokens = split_whitespace(arch);

  cfg.train.batch_size = static_cast<int>(kv.get_int("train.batch_size", 32));
  cfg.train.max_epochs = static_cast<int>(kv.get_int("train.max_epochs", 100));
  cfg.train.learning_rate = kv.get_double("train.learning_rate", 1e-3);
  cfg.train.seed = static_cast<std::uint64_t>(kv.get_int("train.seed", 0));
  cfg.train.eval_every = static_cast<int>(kv.get_int("train.eval_every", 1));
  cfg.train.early_stop_patience =
      static_cast<int>(kv.get_int("train.early_stop_patience", 10));

  cfg.out_dir = kv.get_string("paths.out_dir", "out");

  for (const std::string& key : kv.unused_keys()) {
    config_error(key, "unknown configuration key");
  }

  // Eager validation with field-level messages.
  if (!(cfg.dsp.filter.low_hz > 0.0)) config_error("dsp.low_hz", "must be > 0");
  if (!(cfg.dsp.filter.high_hz > cfg.dsp.filter.low_hz)) {
    config_error("dsp.high_hz", "must exceed dsp.low_hz");
  }
  if (cfg.dsp.filter.order < 2 || cfg.dsp.filter.order % 2 != 0) {
    config_error("dsp.order", "must be even and >= 2");
  }
  if (!(cfg.dsp.morlet.fwhm_s > 0.0)) config_error("dsp.fwhm_s", "must be > 0");
  if (!(cfg.dsp.morlet.center_freq_hz > 0.0)) {
    config_error("dsp.center_freq_hz", "must be > 0");
  }
  if (cfg.dsp.time_bins < 1) config_error("dsp.time_bins", "must be >= 1");
  if (!(cfg.dsp.window_s > 0.0)) config_error("dsp.window_s", "must be > 0");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
    config_error("dataset.test_fraction", "must lie in (0, 1)");
  }
  if (cfg.classes.empty()) config_error("dataset.classes", "must not be empty");
  if (cfg.train.batch_size < 1) config_error("train.batch_size", "must be >= 1");
  if (cfg.train.max_epochs < 1) config_error("train.max_epochs", "must be >= 1");
  if (!(cfg.train.learning_rate > 0.0)) {
    config_error("train.learning_rate", "must be > 0");
  }
  if (cfg.train.eval_every < 1) config_error("train.eval_every", "must be >= 1");
  if (cfg.train.early_stop_patience < 0) {
    config_error("train.early_stop_patience", "must be >= 0");
  }
  if (!cfg.manifest_path.empty() && !std::filesystem::exists(cfg.manifest_path)) {
    config_error("dataset.manifest",
                 "file " + cfg.manifest_path.string() + " does not exist");
  }
  if (!cfg.scout_file.empty() && !std::filesystem::exists(cfg.scout_file)) {
    config_error("dsp.scout_file",
                 "file " + cfg.scout_file.string() + " does not exist");
  }
  return cfg;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::string>& overrides) {
  return build(KeyValueFile::load(path, overrides));
}

RunConfig run_config_from_string(std::string_view text,
                                 const std::vector<std::string>& overrides) {
  return build(KeyValueFile::from_string(text, overrides));
}

}  // namespace mibci::config
