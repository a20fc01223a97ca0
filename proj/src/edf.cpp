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

#include "mibci/edf.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>

#include "mibci/errors.hpp"
#include "mibci/util.hpp"

namespace mibci::edf {
namespace {

constexpr char kTalField = '\x14';
constexpr char kTalDuration = '\x15';

std::string field(std::string_view bytes, std::size_t off, std::size_t len) {
  return std::string(trim(bytes.substr(off, len)));
}

double numeric_field(std::string_view bytes, std::size_t off, std::size_t len,
                     const char* what) {
  const std::string s = field(bytes, off, len);
  if (s.empty()) fail("MalformedHeader", std::string("empty ") + what);
  try {
    return parse_double(s);
  } catch (const Error&) {
    fail("MalformedHeader", std::string(what) + " is not numeric: '" + s + "'");
  }
}

bool is_known_label(const std::string& label) {
  return label == "T0" || label == "T1" || label == "T2";
}

}  // namespace

EdfHeader parse_edf_header(std::string_view bytes) {
  if (bytes.size() < 256) fail("TruncatedFile", "file shorter than fixed header");

  EdfHeader h;
  h.version = field(bytes, 0, 8);
  h.patient_id = field(bytes, 8, 80);
  h.recording_id = field(bytes, 88, 80);
  h.start_date = field(bytes, 168, 8);
  h.start_time = field(bytes, 176, 8);
  h.header_bytes = static_cast<int>(numeric_field(bytes, 184, 8, "header byte count"));
  h.n_records = static_cast<long>(numeric_field(bytes, 236, 8, "record count"));
  h.record_duration_s = numeric_field(bytes, 244, 8, "record duration");
  h.n_signals = static_cast<int>(numeric_field(bytes, 252, 4, "signal count"));

  if (h.n_signals <= 0) fail("MalformedHeader", "signal count must be positive");
  if (h.header_bytes != 256 * (h.n_signals + 1)) {
    fail("MalformedHeader", "header byte count does not equal 256*(n_signals+1)");
  }
  if (h.n_records < -1) fail("MalformedHeader", "record count below -1 sentinel");
  if (bytes.size() < static_cast<std::size_t>(h.header_bytes)) {
    fail("TruncatedFile", "file shorter than declared header");
  }

  const int ns = h.n_signals;
  const std::size_t sig = 256;  // signal headers start after the fixed block
  h.signals.resize(ns);
  for (int i = 0; i < ns; ++i) {
    SignalHeader& s = h.signals[i];
    s.label = field(bytes, sig + 16 * i, 16);
    s.physical_min = numeric_field(bytes, sig + ns * (16 + 80 + 8) + 8 * i, 8,
                                   "physical min");
    s.physical_max = numeric_field(bytes, sig + ns * (16 + 80 + 8 + 8) + 8 * i, 8,
                                   "physical max");
    s.digital_min = static_cast<int>(numeric_field(
        bytes, sig + ns * (16 + 80 + 8 + 8 + 8) + 8 * i, 8, "digital min"));
    s.digital_max = static_cast<int>(numeric_field(
        bytes, sig + ns * (16 + 80 + 8 + 8 + 8 + 8) + 8 * i, 8, "digital max"));
    s.samples_per_record = static_cast<int>(numeric_field(
        bytes, sig + ns * (16 + 80 + 8 + 8 + 8 + 8 + 8 + 80) + 8 * i, 8,
        "samples per record"));

    if (s.digital_min >= s.digital_max) {
      fail("MalformedHeader", "digital_min >= digital_max for " + s.label);
    }
    if (s.physical_min == s.physical_max) {
      fail("MalformedHeader", "physical_min == physical_max for " + s.label);
    }
    if (s.samples_per_record <= 0) {
      fail("MalformedHeader", "non-positive samples per record for " + s.label);
    }
  }
  return h;
}

TalAnnotations parse_annotation_stream(std::string_view tal_bytes) {
  TalAnnotations out;

  std::size_t pos = 0;
  while (pos < tal_bytes.size()) {
    // TALs are NUL-terminated; padding between/after TALs is NUL as well.
    if (tal_bytes[pos] == '\0') {
      ++pos;
      continue;
    }
    const std::size_t end = tal_bytes.find('\0', pos);
    if (end == std::string_view::npos) {
      fail("MalformedTal", "TAL not NUL-terminated");
    }
    std::string_view tal = tal_bytes.substr(pos, end - pos);
    pos = end + 1;

    const std::size_t first14 = tal.find(kTalField);
    if (first14 == std::string_view::npos) {
      fail("MalformedTal", "TAL without 0x14 delimiter");
    }
    std::string_view head = tal.substr(0, first14);
    if (head.empty() || (head[0] != '+' && head[0] != '-')) {
      fail("MalformedTal", "onset must begin with '+' or '-'");
    }

    double onset = 0.0;
    double duration = 0.0;
    bool has_duration = false;
    const std::size_t dur_pos = head.find(kTalDuration);
    try {
      if (dur_pos == std::string_view::npos) {
        onset = parse_double(head[0] == '+' ? head.substr(1) : head);
      } else {
        std::string_view onset_sv = head.substr(0, dur_pos);
        onset = parse_double(onset_sv[0] == '+' ? onset_sv.substr(1) : onset_sv);
        duration = parse_double(head.substr(dur_pos + 1));
        has_duration = true;
      }
    } catch (const Error&) {
      fail("MalformedTal", "unparsable onset/duration in TAL");
    }

    // Remaining content: annotation texts, each terminated by 0x14.
    std::string_view body = tal.substr(first14 + 1);
    while (!body.empty()) {
      const std::size_t sep = body.find(kTalField);
      if (sep == std::string_view::npos) {
        fail("MalformedTal", "annotation text not 0x14-terminated");
      }
      const std::string label(body.substr(0, sep));
      body.remove_prefix(sep + 1);
      if (label.empty()) continue;  // timekeeping TAL carries an empty text
      if (!is_known_label(label)) {
        ++out.ignored;
        continue;
      }
      if (!has_duration || duration <= 0.0) {
        fail("MalformedTal", "annotation '" + label + "' lacks a positive duration");
      }
      if (onset < 0.0) {
        fail("MalformedTal", "negative onset for annotation '" + label + "'");
      }
      out.annotations.push_back({onset, duration, label});
    }
  }

  std::stable_sort(out.annotations.begin(), out.annotations.end(),
                   [](const Annotation& a, const Annotation& b) {
                     return a.onset_s < b.onset_s;
                   });
  for (std::size_t i = 1; i < out.annotations.size(); ++i) {
    const Annotation& prev = out.annotations[i - 1];
    if (out.annotations[i].onset_s < prev.onset_s + prev.duration_s - 1e-9) {
      fail("NonMonotoneOnsets", "annotations overlap at onset " +
                                    format_double(out.annotations[i].onset_s));
    }
  }
  return out;
}

Recording parse_edf(std::string_view bytes) {
  const EdfHeader header = parse_edf_header(bytes);

  std::size_t record_bytes = 0;
  for (const SignalHeader& s : header.signals) {
    record_bytes += static_cast<std::size_t>(s.samples_per_record) * 2;
  }

  long n_records = header.n_records;
  const std::size_t payload = bytes.size() - header.header_bytes;
  if (n_records == -1) {
    n_records = static_cast<long>(payload / record_bytes);
  } else if (payload < static_cast<std::size_t>(n_records) * record_bytes) {
    fail("TruncatedFile", "fewer data records than the header promises");
  }

  int data_spr = -1;
  std::vector<int> data_signals;
  std::vector<int> annotation_signals;
  for (int i = 0; i < header.n_signals; ++i) {
    if (header.signals[i].is_annotation_channel()) {
      annotation_signals.push_back(i);
      continue;
    }
    if (data_spr == -1) {
      data_spr = header.signals[i].samples_per_record;
    } else if (header.signals[i].samples_per_record != data_spr) {
      fail("UnsupportedLayout",
           "signals with differing sample rates: " + header.signals[i].label);
    }
    data_signals.push_back(i);
  }
  if (!data_signals.empty() && header.record_duration_s <= 0.0) {
    fail("MalformedHeader", "non-positive record duration with data signals");
  }

  Recording rec;
  rec.sample_rate_hz =
      data_signals.empty() ? 0.0 : data_spr / header.record_duration_s;
  for (int i : data_signals) rec.channels.push_back(header.signals[i].label);

  const long total_samples = data_signals.empty() ? 0 : n_records * data_spr;
  rec.data.resize(static_cast<Eigen::Index>(data_signals.size()), total_samples);

  // Byte offset of each signal inside a record.
  std::vector<std::size_t> signal_offset(header.n_signals, 0);
  {
    std::size_t off = 0;
    for (int i = 0; i < header.n_signals; ++i) {
      signal_offset[i] = off;
      off += static_cast<std::size_t>(header.signals[i].samples_per_record) * 2;
    }
  }

  std::string tal_stream;
  const char* base = bytes.data() + header.header_bytes;
  for (long r = 0; r < n_records; ++r) {
    const char* record = base + static_cast<std::size_t>(r) * record_bytes;
    for (std::size_t ci = 0; ci < data_signals.size(); ++ci) {
      const SignalHeader& s = header.signals[data_signals[ci]];
      const double scale = (s.physical_max - s.physical_min) /
                           (s.digital_max - s.digital_min);
      const char* p = record + signal_offset[data_signals[ci]];
      for (int k = 0; k < data_spr; ++k) {
        std::int16_t digital;
        std::memcpy(&digital, p + 2 * k, 2);
        rec.data(static_cast<Eigen::Index>(ci), r * data_spr + k) =
            s.physical_min + (digital - s.digital_min) * scale;
      }
    }
    for (int ai : annotation_signals) {
      tal_stream.append(record + signal_offset[ai],
                        static_cast<std::size_t>(
                            header.signals[ai].samples_per_record) * 2);
      tal_stream.push_back('\0');  // record boundary also terminates a TAL run
    }
  }

  TalAnnotations tal = parse_annotation_stream(tal_stream);
  rec.ignored_annotations = tal.ignored;

  const double total_s = rec.duration_s();
  for (Annotation& a : tal.annotations) {
    if (!data_signals.empty() && a.onset_s >= total_s) {
      ++rec.ignored_annotations;  // starts past the sampled data
      continue;
    }
    if (!data_signals.empty() && a.onset_s + a.duration_s > total_s) {
      a.duration_s = total_s - a.onset_s;  // clamp a trailing annotation
    }
    rec.annotations.push_back(a);
  }
  return rec;
}

}  // namespace mibci::edf
