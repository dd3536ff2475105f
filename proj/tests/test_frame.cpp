#include <gtest/gtest.h>

#include "ilora/frame.hpp"
#include "support.hpp"

using namespace ilora;
using namespace ilora::frame;

namespace {

FrameErrc decode_error(const Bytes& b) {
  try {
    decode_frame(b);
  } catch (const FrameError& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode accepted " << b.size() << " bytes";
  return FrameErrc::Incomplete;
}

}  // namespace

TEST(FrameCodec, AckIsHeaderOnly) {
  const auto b = encode_frame(Frame::ack(node(1), node(0), 7, 0, true));
  ASSERT_EQ(b.size(), 5u);
  EXPECT_EQ(b[0], 0x40 | 0x20 | 0x04);  // version 1, type ACK, ack_ok
  EXPECT_EQ(b[1], 1);
  EXPECT_EQ(b[2], 0);
  EXPECT_EQ(b[3], 7);
  EXPECT_EQ(b[4], 0);
}

TEST(FrameCodec, RequestForTheApiUrlIs39Bytes) {
  const std::string url = "http://13.232.192.17:5000/api/data";
  ASSERT_EQ(url.size(), 34u);
  const auto b = encode_frame(Frame::request(node(2), node(1), 0, url));
  EXPECT_EQ(b.size(), 39u);
  EXPECT_EQ(decode_frame(b).url(), url);
}

TEST(FrameCodec, ErrorStatusIsBigEndian) {
  const Bytes b{0x70, 1, 2, 9, 0, 0x01, 0x94};  // version 1, type ERROR
  const auto f = decode_frame(b);
  EXPECT_EQ(f.type, FrameType::Error);
  EXPECT_EQ(f.error_status(), 404);
  EXPECT_EQ(encode_frame(Frame::error(node(1), node(2), 9, 404)), b);
}

TEST(FrameCodec, DataLayout) {
  const auto b = encode_frame(Frame::data(node(1), node(2), 3, 4, true, {0xaa, 0xbb}));
  EXPECT_EQ(b, (Bytes{0x58, 1, 2, 3, 4, 0xaa, 0xbb}));
}

TEST(FrameCodec, OversizePayloadRejected) {
  EXPECT_NO_THROW(encode_frame(Frame::data(node(1), node(2), 0, 0, true, Bytes(250, 1))));
  try {
    encode_frame(Frame::data(node(1), node(2), 0, 0, true, Bytes(251, 1)));
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::OversizePayload);
  }
  try {
    encode_frame(Frame::data(node(1), node(2), 0, 0, true, Bytes(100, 1)), 100);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::OversizePayload);
  }
}

TEST(FrameCodec, FieldRangeOnEncode) {
  auto f = Frame::ack(node(1), node(2), 0, 0, true);
  f.version = 4;
  EXPECT_THROW(encode_frame(f), FrameError);
  auto g = Frame::request(node(1), node(2), 0, "http://a/");
  g.last = true;
  try {
    encode_frame(g);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::FieldRange);
  }
}

TEST(FrameCodec, DecodeErrors) {
  EXPECT_EQ(decode_error(Bytes{0x40, 1, 2, 3}), FrameErrc::TooShort);
  EXPECT_EQ(decode_error(Bytes{}), FrameErrc::TooShort);
  EXPECT_EQ(decode_error(Bytes{0x80 | 0x20, 1, 2, 3, 0}), FrameErrc::BadVersion);
  EXPECT_EQ(decode_error(Bytes{0x00 | 0x20, 1, 2, 3, 0}), FrameErrc::BadVersion);
  EXPECT_EQ(decode_error(Bytes{0x70, 1, 2, 3, 0, 0x01}), FrameErrc::BadErrorPayload);
  EXPECT_EQ(decode_error(Bytes{0x70, 1, 2, 3, 0, 0x01, 0x94, 0x00}), FrameErrc::BadErrorPayload);
  EXPECT_EQ(decode_error(Bytes{0x60 | 0x01, 1, 2, 3, 0}), FrameErrc::BadFlags);  // reserved bit
  EXPECT_EQ(decode_error(Bytes{0x60 | 0x08, 1, 2, 3, 0}), FrameErrc::BadFlags);  // last on ACK
  EXPECT_EQ(decode_error(Bytes{0x50, 1, 2, 3, 0}), FrameErrc::BadPayload);      // empty non-last DATA
  EXPECT_EQ(decode_error(Bytes{0x40, 1, 2, 3, 0, 0xff}), FrameErrc::BadPayload);  // REQUEST not UTF-8
  EXPECT_EQ(decode_error(Bytes(256, 0x58)), FrameErrc::OversizePayload);
}

TEST(FrameCodec, EmptyLastDataIsValid) {
  const auto f = decode_frame(Bytes{0x58, 1, 2, 3, 0});
  EXPECT_TRUE(f.last);
  EXPECT_TRUE(f.payload.empty());
}

TEST(FrameProperty, RoundTripRandomFrames) {
  prop::Gen gen(0x5eed);
  for (int i = 0; i < 20000; ++i) {
    const auto f = gen.frame();
    const auto b = encode_frame(f);
    ASSERT_EQ(b.size(), f.payload.size() + kHeaderBytes);
    ASSERT_EQ(decode_frame(b), f) << "iteration " << i;
  }
}

TEST(FrameProperty, RoundTripUnderSmallFrameLimits) {
  prop::Gen gen(77);
  for (int i = 0; i < 5000; ++i) {
    const std::size_t limit = static_cast<std::size_t>(gen.range(7, 255));  // an ERROR payload needs two bytes
    const auto f = gen.frame(limit);
    ASSERT_EQ(decode_frame(encode_frame(f, limit), limit), f);
  }
}

// Every input either decodes to a frame that re-encodes to the same bytes or
// fails with a typed error.
TEST(FrameProperty, DecodeIsTotal) {
  prop::Gen gen(1234);
  int accepted = 0;
  for (int i = 0; i < 50000; ++i) {
    Bytes b = gen.bytes(static_cast<std::size_t>(gen.range(0, 300)));
    if (!b.empty() && gen.coin(0.7)) b[0] = static_cast<std::uint8_t>(0x40 | (b[0] & 0x3c));
    try {
      const auto f = decode_frame(b);
      ++accepted;
      ASSERT_EQ(encode_frame(f), b);
    } catch (const FrameError&) {
    }
    ASSERT_EQ(try_decode_frame(b).has_value(), [&] {
      try {
        decode_frame(b);
        return true;
      } catch (const FrameError&) {
        return false;
      }
    }());
  }
  EXPECT_GT(accepted, 1000);
}

TEST(FrameProperty, HeaderOverheadIsConstant) {
  prop::Gen gen(9);
  for (int i = 0; i < 2000; ++i) {
    const auto f = gen.frame();
    EXPECT_EQ(encode_frame(f).size() - f.payload.size(), 5u);
  }
}

TEST(Chunking, MeasuredBodySizes) {
  const Bytes body(930, 'x');
  auto sizes = [&](std::size_t cap) {
    std::vector<std::size_t> out;
    for (const auto& c : chunk_payload(body, cap).chunks) out.push_back(c.bytes.size());
    return out;
  };
  EXPECT_EQ(sizes(250), (std::vector<std::size_t>{250, 250, 250, 180}));
  EXPECT_EQ(sizes(150), (std::vector<std::size_t>{150, 150, 150, 150, 150, 150, 30}));
  EXPECT_EQ(sizes(200), (std::vector<std::size_t>{200, 200, 200, 200, 130}));
  EXPECT_EQ(chunk_payload(Bytes(67, 'y'), 150).total(), 1u);
}

TEST(Chunking, EmptyBodyIsOneEmptyChunk) {
  const auto set = chunk_payload(Bytes{}, 250, 5);
  ASSERT_EQ(set.total(), 1u);
  EXPECT_TRUE(set.chunks[0].bytes.empty());
  EXPECT_EQ(set.request_id, 5);
  EXPECT_TRUE(reassemble(set).empty());
}

TEST(Chunking, TooLarge) {
  EXPECT_NO_THROW(chunk_payload(Bytes(256 * 10, 1), 10));
  try {
    chunk_payload(Bytes(256 * 10 + 1, 1), 10);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::TooLarge);
  }
}

TEST(Chunking, GapIsIncomplete) {
  std::map<std::uint8_t, Bytes> chunks{{0, {1}}, {2, {3}}};
  try {
    reassemble(chunks, 2);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), FrameErrc::Incomplete);
  }
}

TEST(ChunkProperty, ReassembleInvertsChunk) {
  prop::Gen gen(42);
  for (int i = 0; i < 2500; ++i) {
    const Bytes body = gen.bytes(static_cast<std::size_t>(gen.range(0, 3000)));
    for (std::size_t cap : {1u, 150u, 200u, 250u}) {
      if (cap == 1 && body.size() > 256) continue;  // beyond 256 chunks
      const auto set = chunk_payload(body, cap);
      const std::size_t expect = std::max<std::size_t>(1, (body.size() + cap - 1) / cap);
      ASSERT_EQ(set.total(), expect);
      for (std::size_t k = 0; k < set.total(); ++k) {
        ASSERT_EQ(set.chunks[k].id, k);
        if (k + 1 < set.total()) ASSERT_EQ(set.chunks[k].bytes.size(), cap);
        else ASSERT_LE(set.chunks[k].bytes.size(), cap);
      }
      ASSERT_EQ(reassemble(set), body);
    }
  }
}

TEST(Utf8, Validation) {
  auto ok = [](std::string s) { return is_valid_utf8(to_bytes(s)); };
  EXPECT_TRUE(ok("plain"));
  EXPECT_TRUE(ok("caf\xc3\xa9"));
  EXPECT_TRUE(ok("\xe2\x82\xac"));
  EXPECT_TRUE(ok("\xf0\x9f\x98\x80"));
  EXPECT_FALSE(ok("\xc3"));
  EXPECT_FALSE(ok("\xe2\x82"));
  EXPECT_FALSE(ok("\xc0\xaf"));          // overlong
  EXPECT_FALSE(ok("\xed\xa0\x80"));      // surrogate
  EXPECT_FALSE(ok("\xf4\x90\x80\x80"));  // above U+10FFFF
}
