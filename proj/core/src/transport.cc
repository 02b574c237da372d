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

#include "smddp/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <exception>
#include <mutex>
#include <span>
#include <thread>

#include "smddp/error.h"
#include "smddp/wire.h"

namespace smddp::protocol {

Transport::Transport(std::uint32_t n_parties, bool retain_frames,
                     std::chrono::milliseconds hop_timeout)
    : n_parties_(n_parties),
      hop_timeout_(hop_timeout),
      start_(std::chrono::steady_clock::now()),
      recorder_(retain_frames) {
  if (n_parties_ == 0) throw InvalidArgumentError("transport needs at least one party");
}

void Transport::Send(int from, int to, std::vector<std::uint8_t> frame, SendMode mode) {
  const int n = static_cast<int>(n_parties_);
  if (from < 0 || from >= n || to != (from + 1) % n) {
    throw TransportError("party " + std::to_string(from) +
                         " may only send to its ring successor, not " + std::to_string(to));
  }
  const FrameHeader header = DecodeFrameHeader(frame);
  if (mode != SendMode::kRelay) {
    TranscriptEntry entry;
    entry.sender = from;
    entry.receiver = mode == SendMode::kBroadcast ? kAllParties : to;
    entry.kind = header.kind;
    entry.bytes = frame.size();
    entry.timestamp_us = std::chrono::duration_cast<std::chrono::microseconds>(
                             std::chrono::steady_clock::now() - start_)
                             .count();
    entry.frame = frame;
    recorder_.Record(std::move(entry));
  }
  Deliver(from, to, std::move(frame));
}

std::vector<std::uint8_t> Transport::Receive(int self) {
  if (self < 0 || self >= static_cast<int>(n_parties_)) {
    throw TransportError("receive: invalid party index");
  }
  return Await(self);
}

namespace {

class InProcessTransport final : public Transport {
 public:
  InProcessTransport(std::uint32_t n, bool retain, std::chrono::milliseconds timeout)
      : Transport(n, retain, timeout), boxes_(n) {
    for (auto& b : boxes_) b = std::make_unique<Mailbox>();
  }

  void Shutdown() override {
    shutdown_ = true;
    for (auto& b : boxes_) {
      std::lock_guard lock(b->mu);
      b->cv.notify_all();
    }
  }

 protected:
  void Deliver(int, int to, std::vector<std::uint8_t> frame) override {
    Mailbox& box = *boxes_[static_cast<std::size_t>(to)];
    {
      std::lock_guard lock(box.mu);
      box.queue.push_back(std::move(frame));
    }
    box.cv.notify_one();
  }

  std::vector<std::uint8_t> Await(int self) override {
    Mailbox& box = *boxes_[static_cast<std::size_t>(self)];
    std::unique_lock lock(box.mu);
    const bool ready = box.cv.wait_for(lock, hop_timeout(),
                                       [&] { return !box.queue.empty() || shutdown_.load(); });
    if (shutdown_) throw TransportError("transport shut down");
    if (!ready) {
      throw TransportError("party " + std::to_string(self) + " timed out waiting for a message");
    }
    std::vector<std::uint8_t> frame = std::move(box.queue.front());
    box.queue.pop_front();
    return frame;
  }

 private:
  struct Mailbox {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::vector<std::uint8_t>> queue;
  };
  std::vector<std::unique_ptr<Mailbox>> boxes_;
  std::atomic<bool> shutdown_{false};
};

constexpr int kPollSliceMs = 50;

std::string ErrnoText(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

class SocketTransport final : public Transport {
 public:
  SocketTransport(std::uint32_t n, std::vector<Endpoint> endpoints, bool retain,
                  std::chrono::milliseconds timeout)
      : Transport(n, retain, timeout) {
    if (endpoints.empty()) endpoints.assign(n, Endpoint{});
    if (endpoints.size() != n) {
      throw InvalidArgumentError("socket transport: expected one endpoint per party");
    }
    slots_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      slots_.push_back(std::make_unique<Slot>());
      Listen(*slots_.back(), endpoints[i]);
    }
  }

  ~SocketTransport() override {
    for (auto& slot : slots_) {
      {
        std::lock_guard lock(slot->mu);
        slot->closing = true;
      }
      slot->cv.notify_all();
    }
    for (auto& slot : slots_) {
      if (slot->writer.joinable()) slot->writer.join();
      for (int fd : {slot->listen_fd, slot->in_fd, slot->out_fd}) {
        if (fd >= 0) ::close(fd);
      }
    }
  }

  void Shutdown() override {
    shutdown_ = true;
    for (auto& slot : slots_) {
      std::lock_guard lock(slot->mu);
      slot->cv.notify_all();
    }
  }

 protected:
  void Deliver(int from, int to, std::vector<std::uint8_t> frame) override {
    Slot& slot = *slots_[static_cast<std::size_t>(from)];
    if (slot.out_fd < 0) {
      slot.out_fd = Connect(*slots_[static_cast<std::size_t>(to)]);
      slot.writer = std::thread([this, &slot] { WriterLoop(slot); });
    }
    std::lock_guard lock(slot.mu);
    if (slot.write_error) std::rethrow_exception(slot.write_error);
    slot.queue.push_back(std::move(frame));
    slot.cv.notify_one();
  }

  std::vector<std::uint8_t> Await(int self) override {
    Slot& slot = *slots_[static_cast<std::size_t>(self)];
    const auto deadline = std::chrono::steady_clock::now() + hop_timeout();
    if (slot.in_fd < 0) {
      WaitFor(slot.listen_fd, POLLIN, deadline, self);
      slot.in_fd = ::accept(slot.listen_fd, nullptr, nullptr);
      if (slot.in_fd < 0) throw TransportError(ErrnoText("accept"));
    }
    std::vector<std::uint8_t> frame(kFrameHeaderSize);
    ReadExact(slot.in_fd, std::span(frame), deadline, self);
    const FrameHeader header = DecodeFrameHeader(frame);
    frame.resize(kFrameHeaderSize + header.payload_length);
    ReadExact(slot.in_fd, std::span(frame).subspan(kFrameHeaderSize), deadline, self);
    return frame;
  }

 private:
  struct Slot {
    int listen_fd = -1;
    int in_fd = -1;
    int out_fd = -1;
    sockaddr_storage addr{};
    socklen_t addr_len = 0;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::vector<std::uint8_t>> queue;
    bool closing = false;
    std::exception_ptr write_error;
    std::thread writer;
  };

  static void Listen(Slot& slot, const Endpoint& endpoint) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE | AI_NUMERICSERV;
    addrinfo* result = nullptr;
    const std::string port = std::to_string(endpoint.port);
    if (int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &result); rc != 0) {
      throw TransportError("cannot resolve " + endpoint.host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(result, ::freeaddrinfo);
    slot.listen_fd = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
    if (slot.listen_fd < 0) throw TransportError(ErrnoText("socket"));
    int one = 1;
    ::setsockopt(slot.listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(slot.listen_fd, result->ai_addr, result->ai_addrlen) < 0) {
      throw TransportError(ErrnoText(("bind " + endpoint.host + ":" + port).c_str()));
    }
    if (::listen(slot.listen_fd, 4) < 0) throw TransportError(ErrnoText("listen"));
    slot.addr_len = sizeof slot.addr;
    if (::getsockname(slot.listen_fd, reinterpret_cast<sockaddr*>(&slot.addr),
                      &slot.addr_len) < 0) {
      throw TransportError(ErrnoText("getsockname"));
    }
  }

  static int Connect(const Slot& target) {
    int fd = ::socket(target.addr.ss_family, SOCK_STREAM, 0);
    if (fd < 0) throw TransportError(ErrnoText("socket"));
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&target.addr), target.addr_len) < 0) {
      const std::string message = ErrnoText("connect");
      ::close(fd);
      throw TransportError(message);
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return fd;
  }

  void WaitFor(int fd, short events, std::chrono::steady_clock::time_point deadline,
               int party) const {
    for (;;) {
      if (shutdown_) throw TransportError("transport shut down");
      if (std::chrono::steady_clock::now() >= deadline) {
        throw TransportError("party " + std::to_string(party) + " timed out on socket");
      }
      pollfd p{fd, events, 0};
      int rc = ::poll(&p, 1, kPollSliceMs);
      if (rc < 0 && errno != EINTR) throw TransportError(ErrnoText("poll"));
      if (rc > 0) return;
    }
  }

  void ReadExact(int fd, std::span<std::uint8_t> out,
                 std::chrono::steady_clock::time_point deadline, int party) const {
    std::size_t got = 0;
    while (got < out.size()) {
      WaitFor(fd, POLLIN, deadline, party);
      ssize_t rc = ::recv(fd, out.data() + got, out.size() - got, 0);
      if (rc == 0) throw TransportError("peer closed the connection");
      if (rc < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw TransportError(ErrnoText("recv"));
      }
      got += static_cast<std::size_t>(rc);
    }
  }

  void WriterLoop(Slot& slot) {
    for (;;) {
      std::vector<std::uint8_t> frame;
      {
        std::unique_lock lock(slot.mu);
        slot.cv.wait(lock, [&] { return !slot.queue.empty() || slot.closing || shutdown_; });
        if (slot.queue.empty() || shutdown_) return;
        frame = std::move(slot.queue.front());
        slot.queue.pop_front();
      }
      try {
        std::size_t sent = 0;
        const auto deadline = std::chrono::steady_clock::now() + hop_timeout();
        while (sent < frame.size()) {
          WaitFor(slot.out_fd, POLLOUT, deadline, -1);
          ssize_t rc = ::send(slot.out_fd, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
          if (rc < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw TransportError(ErrnoText("send"));
          }
          sent += static_cast<std::size_t>(rc);
        }
      } catch (...) {
        std::lock_guard lock(slot.mu);
        slot.write_error = std::current_exception();
        return;
      }
    }
  }

  std::vector<std::unique_ptr<Slot>> slots_;
  std::atomic<bool> shutdown_{false};
};

}  // namespace

std::unique_ptr<Transport> MakeInProcessTransport(std::uint32_t n_parties, bool retain_frames,
                                                  std::chrono::milliseconds hop_timeout) {
  return std::make_unique<InProcessTransport>(n_parties, retain_frames, hop_timeout);
}

std::unique_ptr<Transport> MakeSocketTransport(std::uint32_t n_parties,
                                               std::vector<Endpoint> endpoints,
                                               bool retain_frames,
                                               std::chrono::milliseconds hop_timeout) {
  return std::make_unique<SocketTransport>(n_parties, std::move(endpoints), retain_frames,
                                           hop_timeout);
}

}  // namespace smddp::protocol
