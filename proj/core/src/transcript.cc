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

#include "smddp/transcript.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "smddp/error.h"

namespace smddp::protocol {
namespace {

constexpr std::string_view kDumpBanner = "# smddp transcript v1";
constexpr std::string_view kDumpHeader = "seq,sender,receiver,kind,bytes,timestamp_us";

MessageKind ParseKind(std::string_view name) {
  for (auto kind : {MessageKind::kBounds, MessageKind::kAggregate, MessageKind::kPublish,
                    MessageKind::kSetupParams}) {
    if (MessageKindName(kind) == name) return kind;
  }
  throw DecodeError("transcript dump: unknown message kind '" + std::string(name) + "'");
}

template <typename T>
T ParseInt(std::string_view field, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw DecodeError("transcript dump: bad integer on line " + std::to_string(line));
  }
  return value;
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// True if any aligned or unaligned 8-byte window of the frame is in the set.
bool ContainsAny(std::span<const std::uint8_t> frame,
                 const std::unordered_set<std::uint64_t>& patterns) {
  if (patterns.empty() || frame.size() < 8) return false;
  std::uint64_t window = 0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    window = (window << 8) | frame[i];
    if (i >= 7 && patterns.contains(window)) return true;
  }
  return false;
}

}  // namespace

std::size_t Transcript::Count(MessageKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [&](const TranscriptEntry& e) { return e.kind == kind; }));
}

std::size_t Transcript::TotalBytes() const {
  std::size_t total = 0;
  for (const auto& e : entries) total += e.bytes;
  return total;
}

void TranscriptRecorder::Record(TranscriptEntry entry) {
  if (!retain_frames_) entry.frame.clear();
  std::lock_guard lock(mu_);
  transcript_.entries.push_back(std::move(entry));
}

Transcript TranscriptRecorder::Snapshot() const {
  std::lock_guard lock(mu_);
  return transcript_;
}

void WriteTranscriptDump(const std::filesystem::path& path, const Transcript& transcript) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write transcript dump " + path.string());
  out << kDumpBanner << '\n' << kDumpHeader << '\n';
  for (std::size_t i = 0; i < transcript.entries.size(); ++i) {
    const auto& e = transcript.entries[i];
    out << i << ',' << e.sender << ',';
    if (e.receiver == kAllParties) {
      out << "all";
    } else {
      out << e.receiver;
    }
    out << ',' << MessageKindName(e.kind) << ',' << e.bytes << ',' << e.timestamp_us << '\n';
  }
  if (!out) throw IoError("failed writing transcript dump " + path.string());
}

Transcript ReadTranscriptDump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript dump " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kDumpBanner) {
    throw DecodeError("transcript dump: missing banner line");
  }
  if (!std::getline(in, line) || line != kDumpHeader) {
    throw DecodeError("transcript dump: missing header line");
  }
  Transcript t;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = SplitCsv(line);
    if (fields.size() != 6) {
      throw DecodeError("transcript dump: expected 6 fields on line " + std::to_string(line_no));
    }
    TranscriptEntry e;
    e.sender = ParseInt<int>(fields[1], line_no);
    e.receiver = fields[2] == "all" ? kAllParties : ParseInt<int>(fields[2], line_no);
    e.kind = ParseKind(fields[3]);
    e.bytes = ParseInt<std::size_t>(fields[4], line_no);
    e.timestamp_us = ParseInt<std::int64_t>(fields[5], line_no);
    t.entries.push_back(std::move(e));
  }
  return t;
}

TranscriptAudit AuditTranscript(const Transcript& transcript, std::uint32_t n_parties,
                                std::span<const double> forbidden_values) {
  TranscriptAudit audit;
  auto fail = [&](std::string message) {
    audit.ok = false;
    audit.violations.push_back(std::move(message));
  };

  // Expected kind sequence.
  std::vector<MessageKind> expected;
  expected.insert(expected.end(), n_parties, MessageKind::kBounds);
  expected.push_back(MessageKind::kSetupParams);
  expected.insert(expected.end(), n_parties, MessageKind::kAggregate);
  expected.push_back(MessageKind::kPublish);
  if (transcript.entries.size() != expected.size()) {
    fail("expected " + std::to_string(expected.size()) + " transcript entries, found " +
         std::to_string(transcript.entries.size()));
  }
  const std::size_t common = std::min(expected.size(), transcript.entries.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (transcript.entries[i].kind != expected[i]) {
      fail("entry " + std::to_string(i) + " is " +
           std::string(MessageKindName(transcript.entries[i].kind)) + ", expected " +
           std::string(MessageKindName(expected[i])));
    }
  }

  std::unordered_set<std::uint64_t> patterns;
  for (double v : forbidden_values) patterns.insert(std::bit_cast<std::uint64_t>(v));

  std::optional<ahe::PublicKey> key;
  std::uint32_t expected_bounds_hop = 1;
  std::uint32_t expected_aggregate_hop = 1;
  for (std::size_t i = 0; i < transcript.entries.size(); ++i) {
    const TranscriptEntry& e = transcript.entries[i];
    const std::string where = "entry " + std::to_string(i);
    if (e.frame.empty()) {
      fail(where + ": frame not retained, cannot audit");
      continue;
    }
    if (e.frame.size() != e.bytes) fail(where + ": recorded size does not match frame");

    Message message;
    try {
      message = DecodeMessage(e.frame);
    } catch (const DecodeError& err) {
      fail(where + ": undecodable frame: " + err.what());
      continue;
    }
    if (KindOf(message) != e.kind) fail(where + ": frame kind differs from recorded kind");

    const bool may_carry_reals =
        e.kind == MessageKind::kSetupParams || e.kind == MessageKind::kPublish;
    if (!may_carry_reals) {
      if (ContainsAny(e.frame, patterns)) {
        fail(where + ": plaintext statistic found in " + std::string(MessageKindName(e.kind)) +
             " frame");
      }
    }

    if (const auto* setup = std::get_if<SetupParamsMessage>(&message)) {
      key = setup->public_key;
      if (e.receiver != kAllParties) fail(where + ": setup-params must be broadcast");
    } else if (const auto* bounds = std::get_if<BoundsMessage>(&message)) {
      if (bounds->hop_count != expected_bounds_hop) fail(where + ": bounds hop count out of order");
      ++expected_bounds_hop;
    } else if (const auto* agg = std::get_if<AggregateMessage>(&message)) {
      if (agg->hop_count != expected_aggregate_hop) {
        fail(where + ": aggregate hop count out of order");
      }
      ++expected_aggregate_hop;
      if (!key) {
        fail(where + ": aggregate sent before the public key was distributed");
        continue;
      }
      if (agg->aggregate.key_fingerprint != key->fingerprint()) {
        fail(where + ": aggregate is not under the distributed key");
      }
      auto check = [&](const ahe::Ciphertext& c) {
        return c.value() >= key->n() && c.value() < key->n_squared();
      };
      bool all_ciphertext = check(agg->aggregate.o);
      for (const auto& c : agg->aggregate.p) all_ciphertext = all_ciphertext && check(c);
      for (const auto& c : agg->aggregate.v) all_ciphertext = all_ciphertext && check(c);
      if (!all_ciphertext) fail(where + ": aggregate field is not a ciphertext residue");
    } else if (std::holds_alternative<PublishMessage>(message)) {
      if (e.receiver != kAllParties) fail(where + ": publish must be broadcast");
    }
  }
  return audit;
}

}  // namespace smddp::protocol
