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

#ifndef MIBCI_TESTS_SUPPORT_EDF_WRITER_HPP
#define MIBCI_TESTS_SUPPORT_EDF_WRITER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mibci/edf.hpp"

namespace mibci::testsupport {

// Independent EDF/EDF+ writer used as a round-trip oracle for the parser.
// It builds the byte layout directly from the format definition (fixed
// 256-byte header, 256 bytes per signal header, int16 little-endian
// samples, TAL-encoded annotation channel) without sharing code with the
// parser under test.

struct OracleSignal {
  std::string label;
  double physical_min = -32768.0;
  double physical_max = 32767.0;
  int digital_min = -32768;
  int digital_max = 32767;
  int samples_per_record = 0;
  std::vector<std::int16_t> digital;  // n_records * samples_per_record codes
};

struct OracleEdf {
  long n_records = 0;
  double record_duration_s = 1.0;
  bool unknown_record_count = false;  // write the -1 sentinel
  std::vector<OracleSignal> signals;
  std::vector<edf::Annotation> annotations;  // empty: no annotation channel
  int annotation_spr = 30;                   // 60 bytes of TAL per record
};

std::string write_edf(const OracleEdf& file);

// The TAL byte run for one data record: a timekeeping TAL for the record
// onset followed by one TAL per annotation, NUL-padded to `bytes`.
std::string encode_tal_record(double record_onset_s,
                              const std::vector<edf::Annotation>& annotations,
                              std::size_t bytes);

// Quantizes a physical series into an OracleSignal with the given range.
OracleSignal signal_from_physical(const std::string& label,
                                  const std::vector<double>& physical,
                                  int samples_per_record, double physical_min,
                                  double physical_max);

// A synthetic motor-imagery-like run: 160 Hz, six channels (the built-in R5
// scout's electrodes plus a noise-only C3), trials of 4.2 s cycling
// T0/T1/T2 where T1 adds an 11 Hz burst and T2 a 22 Hz burst on the
// right-motor channels over Gaussian noise.
std::string make_synthetic_run(std::uint64_t seed, int n_trials = 24);

}  // namespace mibci::testsupport

#endif  // MIBCI_TESTS_SUPPORT_EDF_WRITER_HPP
