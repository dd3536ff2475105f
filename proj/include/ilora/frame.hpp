#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ilora/types.hpp"

// Wire format of everything exchanged over the constrained link.
//
//   byte 0   version(2) | type(2) | last(1) | ack_ok(1) | reserved(2)   (MSB first)
//   byte 1   sender node id
//   byte 2   recipient node id
//   byte 3   request id (wraps at 256)
//   byte 4   chunk id (DATA, and the acknowledged chunk in an ACK)
//   byte 5.. payload
namespace ilora::frame {

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderBytes = 5;
inline constexpr std::size_t kDefaultMaxFrameBytes = 255;
inline constexpr std::size_t kMaxChunks = 256;

enum class FrameType : std::uint8_t { Request = 0, Data = 1, Ack = 2, Error = 3 };

std::string_view to_string(FrameType t);

struct Frame {
  std::uint8_t version{kProtocolVersion};
  FrameType type{FrameType::Request};
  NodeId sender{};
  NodeId recipient{};
  std::uint8_t request_id{0};
  std::uint8_t chunk_id{0};
  bool last{false};
  bool ack_ok{false};
  Bytes payload;

  static Frame request(NodeId from, NodeId to, std::uint8_t request_id, std::string_view url);
  static Frame data(NodeId from, NodeId to, std::uint8_t request_id, std::uint8_t chunk_id,
                    bool last, Bytes payload);
  static Frame ack(NodeId from, NodeId to, std::uint8_t request_id, std::uint8_t chunk_id,
                   bool ok);
  static Frame error(NodeId from, NodeId to, std::uint8_t request_id, std::uint16_t status);

  std::string url() const;              // REQUEST payload as text
  std::uint16_t error_status() const;   // ERROR payload, big-endian

  std::size_t encoded_size() const { return kHeaderBytes + payload.size(); }

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class FrameErrc {
  OversizePayload,
  FieldRange,
  TooShort,
  BadVersion,
  BadType,  // unreachable with a 2-bit type field; kept for decoders of wider layouts
  BadFlags,
  BadPayload,
  BadErrorPayload,
  TooLarge,
  Incomplete,
};

std::string_view to_string(FrameErrc e);

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  FrameErrc code() const noexcept { return code_; }

 private:
  FrameErrc code_;
};

Bytes encode_frame(const Frame& f, std::size_t max_frame_bytes = kDefaultMaxFrameBytes);

// Accepts arbitrary input. Throws FrameError unless the bytes are the exact
// encoding of some valid frame.
Frame decode_frame(std::span<const std::uint8_t> bytes,
                   std::size_t max_frame_bytes = kDefaultMaxFrameBytes);

// Non-throwing variant for receive paths.
std::optional<Frame> try_decode_frame(std::span<const std::uint8_t> bytes,
                                      std::size_t max_frame_bytes = kDefaultMaxFrameBytes);

struct Chunk {
  std::uint8_t id{0};
  Bytes bytes;
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct ChunkSet {
  std::uint8_t request_id{0};
  std::vector<Chunk> chunks;

  std::size_t total() const { return chunks.size(); }
};

/// Splits content into chunk_capacity-sized pieces with consecutive ids.
/// Empty content yields a single empty chunk; more than 256 chunks is TooLarge.
ChunkSet chunk_payload(std::span<const std::uint8_t> content, std::size_t chunk_capacity,
                       std::uint8_t request_id = 0);

/// Concatenates chunks 0..last_id. Throws Incomplete on a gap.
Bytes reassemble(const std::map<std::uint8_t, Bytes>& chunks, std::uint8_t last_id);
Bytes reassemble(const ChunkSet& set);

bool is_valid_utf8(std::span<const std::uint8_t> bytes);

}  // namespace ilora::frame
