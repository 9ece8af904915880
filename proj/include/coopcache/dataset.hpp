#pragma once

// Demonstration export along the look-ahead expert trajectory.
//
// File format: UTF-8 JSON Lines, one object per line with sorted keys.
//   SFT record:  {"completion": str, "meta": {...}, "prompt": str}
//   GRPO record: {"expert": str, "meta": {...}, "peek_hash": str,
//                 "peek_slots": [first, last], "prompt": str}
//   meta:        {"instance_hash": str, "seed": uint, "slot": int}
// Strings use JSON escaping (\n for newlines, \" and \\; other control
// characters as \u00XX). When the trace runs out before the requested count,
// a final line {"requested": N, "truncated": true, "written": k} is appended.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coopcache/traffic.hpp"

namespace coopcache {

struct RecordMeta {
  std::uint64_t seed = 0;
  int slot = 0;
  std::string instance_hash;
};

struct SftRecord {
  std::string prompt;
  std::string completion;
  RecordMeta meta;
};

struct GrpoStateRecord {
  std::string prompt;
  std::string expert;  // serialized expert joint action
  std::string peek_hash;
  int peek_first = 0;
  int peek_last = 0;
  RecordMeta meta;
};

struct ExportOptions {
  int horizon = 10;
  double discount = 0.9;
  // Negative means the instance's configured warm-up length.
  int warmup_slots = -1;
  int target_records = 0;
};

template <typename Record>
struct ExportResult {
  std::vector<Record> records;
  bool truncated = false;
  int requested = 0;
};

// Warm-up, then per slot: expert actions for every BS; a record when every
// cache is full; step with the expert action. Stops after target_records
// records or when the look-ahead would run past the trace.
ExportResult<SftRecord> generate_sft(const Instance& instance,
                                     const ExportOptions& options);
// Same loop, one record per full-cache slot with the expert attached.
ExportResult<GrpoStateRecord> generate_grpo_states(const Instance& instance,
                                                   const ExportOptions& options);

std::string to_jsonl(const ExportResult<SftRecord>& result);
std::string to_jsonl(const ExportResult<GrpoStateRecord>& result);

struct AuditReport {
  int records = 0;
  int invalid = 0;
  std::vector<int> invalid_indices;  // 0-based record indices
  std::map<std::string, int> invalid_reasons;
  int full_cache_violations = 0;
  std::vector<int> full_cache_indices;
  // Records whose completion is NOOP on every BS.
  int all_noop_records = 0;
  double noop_fraction = 0.0;
  // Per BS (0-based): decision counts.
  std::vector<int> noop_per_bs;
  std::vector<int> swap_per_bs;
  bool truncated = false;
};

// Re-parses every completion against the observation decoded from its own
// prompt. Throws StructuralError naming the record index on schema errors.
AuditReport audit_dataset_text(const std::string& text);
AuditReport audit_dataset(const std::filesystem::path& path);

}  // namespace coopcache
