#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <vector>

#include "crystal/codec.hpp"
#include "crystal/rng.hpp"

using namespace crystal;

TEST_CASE("frame layout is little-endian header plus raw payload") {
  const message m{1, 2, {0xAA}};
  const transfer_buffer buf = encode_transfer(std::vector<message>{m});
  const std::vector<std::uint8_t> expect = {
      0x01, 0x00, 0x00, 0x00,  // src
      0x02, 0x00, 0x00, 0x00,  // dest
      0x01, 0x00, 0x00, 0x00,  // payload length
      0x00, 0x00, 0x00, 0x00,  // reserved
      0xAA,
  };
  CHECK(buf.data == expect);
  CHECK(buf.message_count == 1);
  CHECK(buf.size_bytes() == 17);
}

TEST_CASE("encode and decode are inverse") {
  std::vector<message> msgs = {
      {0, 7, {}},
      {3, 1, {1, 2, 3, 4, 5}},
      {2, 2, std::vector<std::uint8_t>(300, 0xCD)},
      {5, 0, {0xFF}},
  };
  const transfer_buffer buf = encode_transfer(msgs);
  CHECK(buf.message_count == 4);
  CHECK(decode_transfer(buf.data) == msgs);
}

TEST_CASE("empty list round-trips through an empty buffer") {
  const transfer_buffer buf = encode_transfer(std::vector<message>{});
  CHECK(buf.data.empty());
  CHECK(buf.message_count == 0);
  CHECK(decode_transfer(buf.data).empty());
}

TEST_CASE("zero-length payloads survive the round trip") {
  std::vector<message> msgs = {{4, 5, {}}, {5, 4, {}}};
  const transfer_buffer buf = encode_transfer(msgs);
  CHECK(buf.size_bytes() == 2 * frame_header_bytes);
  CHECK(decode_transfer(buf.data) == msgs);
}

TEST_CASE("random message lists round-trip") {
  splitmix64 rng(20260816);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<message> msgs;
    const std::size_t count = rng.next() % 9;
    for (std::size_t i = 0; i < count; ++i) {
      message m;
      m.src = static_cast<rank_t>(rng.next() % 1024);
      m.dest = static_cast<rank_t>(rng.next() % 1024);
      m.payload = message_payload(rng.next(), m.src, m.dest, i, rng.next() % 300);
      msgs.push_back(std::move(m));
    }
    const transfer_buffer buf = encode_transfer(msgs);
    REQUIRE(decode_transfer(buf.data) == msgs);
  }
}

TEST_CASE("encoding past the byte cap reports required and available") {
  std::vector<message> msgs = {{0, 1, {1, 2, 3, 4}}, {0, 2, {5, 6}}};
  CHECK_NOTHROW(encode_transfer(msgs, 38));
  try {
    encode_transfer(msgs, 37);
    FAIL("expected capacity_error");
  } catch (const capacity_error& e) {
    CHECK(e.required_bytes() == 38);
    CHECK(e.available_bytes() == 37);
  }
}

TEST_CASE("truncated header is a decode error at the frame start") {
  const transfer_buffer buf = encode_transfer(std::vector<message>{{1, 2, {0xAA}}});
  std::vector<std::uint8_t> data(buf.data.begin(), buf.data.begin() + 15);
  try {
    decode_transfer(data);
    FAIL("expected decode_error");
  } catch (const decode_error& e) {
    CHECK(e.offset() == 0);
  }

  // Second frame cut short: the error points at its start, not the buffer's.
  std::vector<std::uint8_t> two = buf.data;
  two.insert(two.end(), buf.data.begin(), buf.data.begin() + 3);
  try {
    decode_transfer(two);
    FAIL("expected decode_error");
  } catch (const decode_error& e) {
    CHECK(e.offset() == 17);
  }
}

TEST_CASE("nonzero reserved word is rejected") {
  transfer_buffer buf = encode_transfer(std::vector<message>{{1, 2, {0xAA}}});
  buf.data[12] = 0x01;
  try {
    decode_transfer(buf.data);
    FAIL("expected decode_error");
  } catch (const decode_error& e) {
    CHECK(e.offset() == 0);
    CHECK(std::string(e.what()).find("reserved") != std::string::npos);
  }
}

TEST_CASE("declared payload length beyond the buffer is rejected") {
  transfer_buffer buf = encode_transfer(std::vector<message>{{1, 2, {0xAA}}});
  buf.data[8] = 0x02;  // claims 2 payload bytes, only 1 present
  try {
    decode_transfer(buf.data);
    FAIL("expected decode_error");
  } catch (const decode_error& e) {
    CHECK(e.offset() == 0);
  }

  buf.data[8] = 0xFF;
  buf.data[9] = 0xFF;
  buf.data[10] = 0xFF;
  buf.data[11] = 0x7F;
  CHECK_THROWS_AS(decode_transfer(buf.data), decode_error);
}
