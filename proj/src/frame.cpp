#include "ilora/frame.hpp"

#include <algorithm>

namespace ilora::frame {

namespace {

constexpr std::uint8_t kLastBit = 0x08;
constexpr std::uint8_t kAckBit = 0x04;
constexpr std::uint8_t kReservedMask = 0x03;

struct Violation {
  FrameErrc code;
  const char* what;
};

// Type-dependent rules shared by the encoder and decoder, so that decode is
// the exact inverse of encode.
std::optional<Violation> check_semantics(const Frame& f) {
  const bool carries_chunk = f.type == FrameType::Data || f.type == FrameType::Ack;
  if (f.last && f.type != FrameType::Data) return Violation{FrameErrc::BadFlags, "last flag outside DATA"};
  if (f.ack_ok && f.type != FrameType::Ack) return Violation{FrameErrc::BadFlags, "ack flag outside ACK"};
  if (!carries_chunk && f.chunk_id != 0) return Violation{FrameErrc::BadFlags, "chunk id outside DATA/ACK"};

  switch (f.type) {
    case FrameType::Request:
      if (f.payload.empty() || !is_valid_utf8(f.payload))
        return Violation{FrameErrc::BadPayload, "REQUEST payload must be a non-empty UTF-8 URL"};
      break;
    case FrameType::Data:
      if (f.payload.empty() && !f.last)
        return Violation{FrameErrc::BadPayload, "empty DATA payload is only allowed on the last chunk"};
      break;
    case FrameType::Ack:
      if (!f.payload.empty()) return Violation{FrameErrc::BadPayload, "ACK payload must be empty"};
      break;
    case FrameType::Error:
      if (f.payload.size() != 2)
        return Violation{FrameErrc::BadErrorPayload, "ERROR payload must be a 2-byte status"};
      break;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(FrameType t) {
  switch (t) {
    case FrameType::Request: return "REQUEST";
    case FrameType::Data: return "DATA";
    case FrameType::Ack: return "ACK";
    case FrameType::Error: return "ERROR";
  }
  return "?";
}

std::string_view to_string(FrameErrc e) {
  switch (e) {
    case FrameErrc::OversizePayload: return "OversizePayload";
    case FrameErrc::FieldRange: return "FieldRange";
    case FrameErrc::TooShort: return "TooShort";
    case FrameErrc::BadVersion: return "BadVersion";
    case FrameErrc::BadType: return "BadType";
    case FrameErrc::BadFlags: return "BadFlags";
    case FrameErrc::BadPayload: return "BadPayload";
    case FrameErrc::BadErrorPayload: return "BadErrorPayload";
    case FrameErrc::TooLarge: return "TooLarge";
    case FrameErrc::Incomplete: return "Incomplete";
  }
  return "?";
}

Frame Frame::request(NodeId from, NodeId to, std::uint8_t request_id, std::string_view url) {
  Frame f;
  f.type = FrameType::Request;
  f.sender = from;
  f.recipient = to;
  f.request_id = request_id;
  f.payload.assign(url.begin(), url.end());
  return f;
}

Frame Frame::data(NodeId from, NodeId to, std::uint8_t request_id, std::uint8_t chunk_id,
                  bool last, Bytes payload) {
  Frame f;
  f.type = FrameType::Data;
  f.sender = from;
  f.recipient = to;
  f.request_id = request_id;
  f.chunk_id = chunk_id;
  f.last = last;
  f.payload = std::move(payload);
  return f;
}

Frame Frame::ack(NodeId from, NodeId to, std::uint8_t request_id, std::uint8_t chunk_id,
                 bool ok) {
  Frame f;
  f.type = FrameType::Ack;
  f.sender = from;
  f.recipient = to;
  f.request_id = request_id;
  f.chunk_id = chunk_id;
  f.ack_ok = ok;
  return f;
}

Frame Frame::error(NodeId from, NodeId to, std::uint8_t request_id, std::uint16_t status) {
  Frame f;
  f.type = FrameType::Error;
  f.sender = from;
  f.recipient = to;
  f.request_id = request_id;
  f.payload = {static_cast<std::uint8_t>(status >> 8), static_cast<std::uint8_t>(status & 0xff)};
  return f;
}

std::string Frame::url() const { return std::string(payload.begin(), payload.end()); }

std::uint16_t Frame::error_status() const {
  if (payload.size() != 2) throw FrameError(FrameErrc::BadErrorPayload, "not a 2-byte status");
  return static_cast<std::uint16_t>((payload[0] << 8) | payload[1]);
}

Bytes encode_frame(const Frame& f, std::size_t max_frame_bytes) {
  if (f.payload.size() + kHeaderBytes > max_frame_bytes) {
    throw FrameError(FrameErrc::OversizePayload,
                     "payload of " + std::to_string(f.payload.size()) + " bytes exceeds frame limit " +
                         std::to_string(max_frame_bytes));
  }
  if (f.version > 3) throw FrameError(FrameErrc::FieldRange, "version does not fit in 2 bits");
  if (auto v = check_semantics(f)) {
    // Inconsistent flags are a caller range error on the encode side.
    throw FrameError(v->code == FrameErrc::BadFlags ? FrameErrc::FieldRange : v->code, v->what);
  }

  Bytes out;
  out.reserve(f.encoded_size());
  std::uint8_t b0 = static_cast<std::uint8_t>(f.version << 6);
  b0 |= static_cast<std::uint8_t>(static_cast<std::uint8_t>(f.type) << 4);
  if (f.last) b0 |= kLastBit;
  if (f.ack_ok) b0 |= kAckBit;
  out.push_back(b0);
  out.push_back(static_cast<std::uint8_t>(f.sender));
  out.push_back(static_cast<std::uint8_t>(f.recipient));
  out.push_back(f.request_id);
  out.push_back(f.chunk_id);
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t max_frame_bytes) {
  if (bytes.size() < kHeaderBytes) throw FrameError(FrameErrc::TooShort, "frame shorter than header");
  if (bytes.size() > max_frame_bytes) throw FrameError(FrameErrc::OversizePayload, "frame exceeds limit");

  const std::uint8_t b0 = bytes[0];
  Frame f;
  f.version = static_cast<std::uint8_t>(b0 >> 6);
  if (f.version != kProtocolVersion) {
    throw FrameError(FrameErrc::BadVersion, "unsupported version " + std::to_string(f.version));
  }
  f.type = static_cast<FrameType>((b0 >> 4) & 0x03);
  f.last = (b0 & kLastBit) != 0;
  f.ack_ok = (b0 & kAckBit) != 0;
  if ((b0 & kReservedMask) != 0) throw FrameError(FrameErrc::BadFlags, "reserved bits set");
  f.sender = static_cast<NodeId>(bytes[1]);
  f.recipient = static_cast<NodeId>(bytes[2]);
  f.request_id = bytes[3];
  f.chunk_id = bytes[4];
  f.payload.assign(bytes.begin() + kHeaderBytes, bytes.end());

  if (auto v = check_semantics(f)) throw FrameError(v->code, v->what);
  return f;
}

std::optional<Frame> try_decode_frame(std::span<const std::uint8_t> bytes,
                                      std::size_t max_frame_bytes) {
  try {
    return decode_frame(bytes, max_frame_bytes);
  } catch (const FrameError&) {
    return std::nullopt;
  }
}

ChunkSet chunk_payload(std::span<const std::uint8_t> content, std::size_t chunk_capacity,
                       std::uint8_t request_id) {
  if (chunk_capacity == 0) throw FrameError(FrameErrc::FieldRange, "chunk capacity must be positive");
  const std::size_t count =
      content.empty() ? 1 : (content.size() + chunk_capacity - 1) / chunk_capacity;
  if (count > kMaxChunks) {
    throw FrameError(FrameErrc::TooLarge, std::to_string(content.size()) + " bytes needs " +
                                              std::to_string(count) + " chunks");
  }

  ChunkSet set;
  set.request_id = request_id;
  set.chunks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t begin = i * chunk_capacity;
    const std::size_t end = std::min(content.size(), begin + chunk_capacity);
    set.chunks.push_back(
        Chunk{static_cast<std::uint8_t>(i), Bytes(content.begin() + begin, content.begin() + end)});
  }
  return set;
}

Bytes reassemble(const std::map<std::uint8_t, Bytes>& chunks, std::uint8_t last_id) {
  Bytes out;
  for (unsigned id = 0; id <= last_id; ++id) {
    auto it = chunks.find(static_cast<std::uint8_t>(id));
    if (it == chunks.end()) {
      throw FrameError(FrameErrc::Incomplete, "chunk " + std::to_string(id) + " missing");
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

Bytes reassemble(const ChunkSet& set) {
  if (set.chunks.empty()) throw FrameError(FrameErrc::Incomplete, "no chunks");
  std::map<std::uint8_t, Bytes> m;
  for (const auto& c : set.chunks) m.emplace(c.id, c.bytes);
  return reassemble(m, set.chunks.back().id);
}

bool is_valid_utf8(std::span<const std::uint8_t> bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::uint8_t c = bytes[i];
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= bytes.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((bytes[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (bytes[i + k] & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

}  // namespace ilora::frame
