#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "ilora/frame.hpp"
#include "ilora/types.hpp"

namespace ilora::prop {

// Seeded generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t next() { return rng_(); }
  // inclusive range
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin(double p = 0.5) { return static_cast<double>(rng_() >> 11) * 0x1.0p-53 < p; }
  std::uint8_t byte() { return static_cast<std::uint8_t>(rng_()); }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = byte();
    return out;
  }

  // Printable ASCII, which is always valid UTF-8.
  std::string text(std::size_t n) {
    std::string out(n, ' ');
    for (auto& c : out) c = static_cast<char>(range(0x21, 0x7e));
    return out;
  }

  frame::Frame frame(std::size_t max_frame_bytes = frame::kDefaultMaxFrameBytes) {
    using frame::Frame;
    const std::size_t room = max_frame_bytes - frame::kHeaderBytes;
    const NodeId from = node(static_cast<unsigned>(byte()));
    const NodeId to = node(static_cast<unsigned>(byte()));
    const std::uint8_t rid = byte();
    switch (range(0, 3)) {
      case 0:
        return Frame::request(from, to, rid, text(static_cast<std::size_t>(range(1, static_cast<std::int64_t>(room)))));
      case 1: {
        const bool last = coin();
        const auto len = static_cast<std::size_t>(range(last ? 0 : 1, static_cast<std::int64_t>(room)));
        return Frame::data(from, to, rid, byte(), last, bytes(len));
      }
      case 2:
        return Frame::ack(from, to, rid, byte(), coin());
      default:
        return Frame::error(from, to, rid, static_cast<std::uint16_t>(rng_()));
    }
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace ilora::prop
