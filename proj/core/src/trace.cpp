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

#include "qdopt/trace.hpp"

#include <stdexcept>
#include <utility>

#include "json_detail.hpp"

namespace qdopt {

namespace {

nlohmann::json header_to_json(const TraceHeader& header) {
  nlohmann::json j;
  j["type"] = "header";
  j["schema_version"] = header.schema_version;
  j["config_hash"] = header.config_hash;
  j["config"] = header.config_json.empty()
                    ? nlohmann::json(nullptr)
                    : nlohmann::json::parse(header.config_json);
  j["seed"] = header.seed;
  j["replication"] = header.replication;
  j["optimizer"] = header.optimizer;
  j["problem"] = header.problem;
  j["space"] = nlohmann::json::parse(header.space_json);
  j["niches"] = detail::niche_set_to_json_obj(header.niches);
  j["reference_fidelity"] = header.reference_fidelity;
  j["penalty"] = header.penalty;
  j["budget_units"] = header.budget_units;
  return j;
}

TraceHeader header_from_json(const nlohmann::json& j) {
  TraceHeader header;
  header.schema_version = j.at("schema_version").get<int>();
  if (header.schema_version != kTraceSchemaVersion) {
    throw std::runtime_error(
        "trace: schema version mismatch (file has " +
        std::to_string(header.schema_version) + ", reader expects " +
        std::to_string(kTraceSchemaVersion) + ")");
  }
  header.config_hash = j.at("config_hash").get<std::string>();
  if (!j.at("config").is_null()) header.config_json = j.at("config").dump();
  header.seed = j.at("seed").get<std::uint64_t>();
  header.replication = j.at("replication").get<int>();
  header.optimizer = j.at("optimizer").get<std::string>();
  header.problem = j.at("problem").get<std::string>();
  header.space_json = j.at("space").dump();
  header.niches = detail::niche_set_from_json_obj(j.at("niches"));
  header.reference_fidelity = j.at("reference_fidelity").get<double>();
  header.penalty = j.at("penalty").get<double>();
  header.budget_units = j.at("budget_units").get<double>();
  return header;
}

}  // namespace

TraceWriter::TraceWriter(const std::string& path, const TraceHeader& header)
    : out_(path, std::ios::trunc), niches_(header.niches) {
  if (!out_) {
    throw std::runtime_error("trace: cannot open " + path + " for writing");
  }
  out_ << header_to_json(header).dump() << "\n";
  out_.flush();
}

void TraceWriter::write(const Evaluation& eval) {
  nlohmann::json j;
  j["type"] = "eval";
  j["iteration"] = eval.index;
  j["config"] = nlohmann::json::parse(eval.key);  // canonical form
  j["fidelity"] = eval.fidelity;
  j["objective"] = eval.objective;
  j["features"] = eval.features;
  auto member_of = nlohmann::json::array();
  const std::vector<bool> member = membership(eval.features, niches_);
  for (std::size_t i = 0; i < member.size(); ++i) {
    if (member[i]) member_of.push_back(niches_.niches[i].id);
  }
  j["member_of"] = std::move(member_of);
  j["budget"] = eval.budget;
  out_ << j.dump() << "\n";
  out_.flush();
  ++written_;
  last_budget_ = eval.budget;
}

void TraceWriter::finish() {
  nlohmann::json j;
  j["type"] = "end";
  j["evaluations"] = written_;
  j["budget"] = last_budget_;
  out_ << j.dump() << "\n";
  out_.flush();
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("trace: cannot open " + path);
  }
  Trace trace;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("trace: malformed line in " + path + ": " +
                               e.what());
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      trace.header = header_from_json(j);
      trace.space = space_from_json(trace.header.space_json);
      have_header = true;
    } else if (type == "eval") {
      if (!have_header) {
        throw std::runtime_error("trace: evaluation before header in " + path);
      }
      TraceRecord record;
      record.iteration = j.at("iteration").get<std::uint64_t>();
      record.config = detail::config_from_json(j.at("config"), trace.space);
      record.key = j.at("config").dump();
      record.fidelity = j.at("fidelity").get<double>();
      record.objective = j.at("objective").get<double>();
      record.features = j.at("features").get<std::vector<double>>();
      record.member_of = j.at("member_of").get<std::vector<int>>();
      record.budget = j.at("budget").get<double>();
      trace.records.push_back(std::move(record));
    } else if (type == "end") {
      trace.complete = true;
    } else {
      throw std::runtime_error("trace: unknown record type '" + type + "'");
    }
  }
  if (!have_header) {
    throw std::runtime_error("trace: missing header in " + path);
  }
  return trace;
}

bool trace_is_complete(const std::string& path) {
  std::ifstream in(path);
  if (!in) return false;
  std::string line;
  std::string last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) return false;
  try {
    const nlohmann::json j = nlohmann::json::parse(last);
    return j.value("type", "") == "end";
  } catch (const std::exception&) {
    return false;
  }
}

Archive replay_trace(const Trace& trace) {
  Archive archive(trace.header.niches, trace.header.reference_fidelity);
  for (const TraceRecord& record : trace.records) {
    Evaluation eval;
    eval.config = record.config;
    eval.key = record.key;
    eval.fidelity = record.fidelity;
    eval.objective = record.objective;
    eval.features = record.features;
    eval.budget = record.budget;
    archive.record(std::move(eval));
  }
  return archive;
}

}  // namespace qdopt
