/*
 * Copyright 2026 The smddp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SMDDP_TRANSCRIPT_H_
#define SMDDP_TRANSCRIPT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "smddp/wire.h"

namespace smddp::protocol {

// Receiver value for a message delivered to every party.
inline constexpr int kAllParties = -1;

struct TranscriptEntry {
  int sender = 0;
  int receiver = 0;  // kAllParties for broadcasts
  MessageKind kind = MessageKind::kBounds;
  std::size_t bytes = 0;
  std::int64_t timestamp_us = 0;
  std::vector<std::uint8_t> frame;  // empty unless frames are retained
};

struct Transcript {
  std::vector<TranscriptEntry> entries;

  std::size_t Count(MessageKind kind) const;
  std::size_t TotalBytes() const;
};

// Thread-safe append-only log used by transports.
class TranscriptRecorder {
 public:
  explicit TranscriptRecorder(bool retain_frames) : retain_frames_(retain_frames) {}

  void Record(TranscriptEntry entry);
  Transcript Snapshot() const;

 private:
  bool retain_frames_;
  mutable std::mutex mu_;
  Transcript transcript_;
};

// Text dump: a "# smddp transcript v1" line, a CSV header, then one
// "seq,sender,receiver,kind,bytes,timestamp_us" row per entry. Frames are
// not written.
void WriteTranscriptDump(const std::filesystem::path& path, const Transcript& transcript);
Transcript ReadTranscriptDump(const std::filesystem::path& path);

struct TranscriptAudit {
  bool ok = true;
  std::vector<std::string> violations;
};

// Mechanical privacy and shape audit of a transcript with retained frames:
//  * protocol order: n bounds, one setup-params broadcast, n aggregates, one
//    publish broadcast;
//  * only setup-params and publish carry real-valued model or parameter
//    fields besides the public running bounds; aggregate payloads consist of
//    ciphertexts under the distributed key, each in [n, n^2);
//  * hop counts advance by exactly one per hop;
//  * none of `forbidden_values` (typically the parties' plaintext
//    statistics) appears as an IEEE-754 big-endian byte pattern in any frame
//    other than setup-params and publish.
TranscriptAudit AuditTranscript(const Transcript& transcript, std::uint32_t n_parties,
                                std::span<const double> forbidden_values = {});

}  // namespace smddp::protocol

#endif  // SMDDP_TRANSCRIPT_H_
