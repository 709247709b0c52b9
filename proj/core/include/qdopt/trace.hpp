// Copyright 2026 The qdopt Authors.
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

#ifndef QDOPT_TRACE_HPP_
#define QDOPT_TRACE_HPP_

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "qdopt/archive.hpp"
#include "qdopt/space.hpp"

namespace qdopt {

inline constexpr int kTraceSchemaVersion = 1;

struct TraceHeader {
  int schema_version = kTraceSchemaVersion;
  std::string config_hash;
  std::string config_json;  // materialized experiment config, for provenance
  std::uint64_t seed = 0;
  int replication = 0;
  std::string optimizer;
  std::string problem;
  std::string space_json;
  NicheSet niches;
  double reference_fidelity = 0.0;
  double penalty = 100.0;
  double budget_units = 0.0;
};

/// Streaming JSON-lines writer: one header line, one line per evaluation,
/// one end marker. A file without the end marker is an incomplete
/// (resumable) replication.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, const TraceHeader& header);

  void write(const Evaluation& eval);
  void finish();

  std::size_t written() const { return written_; }

 private:
  std::ofstream out_;
  NicheSet niches_;
  std::size_t written_ = 0;
  double last_budget_ = 0.0;
};

struct TraceRecord {
  std::uint64_t iteration = 0;
  Configuration config;
  std::string key;
  double fidelity = 0.0;
  double objective = 0.0;
  std::vector<double> features;
  std::vector<int> member_of;  // niche ids
  double budget = 0.0;
};

struct Trace {
  TraceHeader header;
  SearchSpace space;
  std::vector<TraceRecord> records;
  bool complete = false;
};

/// Throws std::runtime_error on malformed files or a schema-version
/// mismatch.
Trace read_trace(const std::string& path);

/// True iff the file exists and carries the end marker.
bool trace_is_complete(const std::string& path);

/// Rebuilds the archive (log + elites) from a trace.
Archive replay_trace(const Trace& trace);

}  // namespace qdopt

#endif  // QDOPT_TRACE_HPP_
