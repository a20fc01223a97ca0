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

#ifndef MIBCI_EDF_HPP
#define MIBCI_EDF_HPP

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

namespace mibci::edf {

// One signal block of the EDF header (256 bytes per signal on disk).
struct SignalHeader {
  std::string label;
  double physical_min = 0.0;
  double physical_max = 0.0;
  int digital_min = 0;
  int digital_max = 0;
  int samples_per_record = 0;

  bool is_annotation_channel() const { return label == "EDF Annotations"; }
};

struct EdfHeader {
  std::string version;
  std::string patient_id;
  std::string recording_id;
  std::string start_date;  // dd.mm.yy as recorded
  std::string start_time;  // hh.mm.ss as recorded
  int header_bytes = 0;
  // Resolved from file length when the header carries the -1 sentinel.
  long n_records = 0;
  double record_duration_s = 0.0;
  int n_signals = 0;
  std::vector<SignalHeader> signals;
};

struct Annotation {
  double onset_s = 0.0;
  double duration_s = 0.0;
  std::string label;  // one of T0, T1, T2
};

struct Recording {
  std::vector<std::string> channels;
  double sample_rate_hz = 0.0;
  Eigen::MatrixXd data;  // channels x samples, physical units (microvolts)
  std::vector<Annotation> annotations;
  std::string subject_id;
  std::string run_id;
  // Annotations whose label was not T0/T1/T2, surfaced for audit.
  int ignored_annotations = 0;

  Eigen::Index n_samples() const { return data.cols(); }
  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(n_samples()) / sample_rate_hz
                              : 0.0;
  }
};

struct TalAnnotations {
  std::vector<Annotation> annotations;  // sorted by onset, non-overlapping
  int ignored = 0;
};

// Parses the fixed 256-byte header plus the per-signal header blocks.
// Throws Error kinds: TruncatedFile, MalformedHeader.
EdfHeader parse_edf_header(std::string_view bytes);

// Parses a whole EDF/EDF+ file. Digital codes are converted to physical
// units with the header's linear calibration; the "EDF Annotations" channel
// is decoded into annotations and excluded from the channel list.
// Throws: TruncatedFile, MalformedHeader, UnsupportedLayout, and the
// annotation-stream errors below.
Recording parse_edf(std::string_view bytes);

// Decodes an EDF+ timestamped-annotation-list byte stream (0x14/0x15/0x00
// delimiters). Labels outside {T0,T1,T2} are counted and dropped.
// Throws: MalformedTal, NonMonotoneOnsets.
TalAnnotations parse_annotation_stream(std::string_view tal_bytes);

}  // namespace mibci::edf

#endif  // MIBCI_EDF_HPP
