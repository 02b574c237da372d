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

#ifndef SMDDP_TRANSPORT_H_
#define SMDDP_TRANSPORT_H_

// Ring transports. Party i only ever sends to its successor (i + 1) mod n
// and receives from its predecessor; each party's endpoints are touched only
// by that party's thread, so parties share no mutable state beyond the
// transcript recorder.

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "smddp/transcript.h"

namespace smddp::protocol {

enum class SendMode {
  kDirect,     // logged with the actual receiver
  kBroadcast,  // origin of a ring broadcast, logged once as kAllParties
  kRelay,      // forwarding a broadcast, not logged
};

inline constexpr std::chrono::milliseconds kDefaultHopTimeout{30000};

class Transport {
 public:
  Transport(std::uint32_t n_parties, bool retain_frames,
            std::chrono::milliseconds hop_timeout);
  virtual ~Transport() = default;

  Transport(const Transport&) = delete;
  Transport& operator=(const Transport&) = delete;

  // Throws TransportError if `to` is not the ring successor of `from`.
  void Send(int from, int to, std::vector<std::uint8_t> frame,
            SendMode mode = SendMode::kDirect);
  // Blocks for the next frame from the predecessor of `self`. Throws
  // TransportError on timeout or after Shutdown().
  std::vector<std::uint8_t> Receive(int self);

  // Unblocks every pending and future Receive with a TransportError.
  virtual void Shutdown() = 0;

  Transcript TakeTranscript() const { return recorder_.Snapshot(); }
  std::uint32_t n_parties() const { return n_parties_; }
  std::chrono::milliseconds hop_timeout() const { return hop_timeout_; }

 protected:
  virtual void Deliver(int from, int to, std::vector<std::uint8_t> frame) = 0;
  virtual std::vector<std::uint8_t> Await(int self) = 0;

 private:
  std::uint32_t n_parties_;
  std::chrono::milliseconds hop_timeout_;
  std::chrono::steady_clock::time_point start_;
  TranscriptRecorder recorder_;
};

// Thread-safe mailboxes, one per party.
std::unique_ptr<Transport> MakeInProcessTransport(
    std::uint32_t n_parties, bool retain_frames = true,
    std::chrono::milliseconds hop_timeout = kDefaultHopTimeout);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
};

// One TCP stream per ring edge. Every party's listening socket is bound in
// the constructor; outbound connections are opened on first send and frames
// are written by a per-party writer thread so a party never blocks on its
// own send. `endpoints` must be empty (all loopback, ephemeral) or hold one
// entry per party.
std::unique_ptr<Transport> MakeSocketTransport(
    std::uint32_t n_parties, std::vector<Endpoint> endpoints = {},
    bool retain_frames = true, std::chrono::milliseconds hop_timeout = kDefaultHopTimeout);

}  // namespace smddp::protocol

#endif  // SMDDP_TRANSPORT_H_
