#include "opboost/wire.hpp"

#include <cstring>

#include "opboost/errors.hpp"

namespace opboost {

namespace {

constexpr char kMagic[4] = {'O', 'P', 'B', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}

struct Reader {
  const std::vector<std::uint8_t>& buf;
  std::size_t pos = 0;

  std::uint32_t u32() {
    if (pos + 4 > buf.size()) throw ProtocolError("wire: truncated payload");
    std::uint32_t v = static_cast<std::uint32_t>(buf[pos]) |
                      (static_cast<std::uint32_t>(buf[pos + 1]) << 8) |
                      (static_cast<std::uint32_t>(buf[pos + 2]) << 16) |
                      (static_cast<std::uint32_t>(buf[pos + 3]) << 24);
    pos += 4;
    return v;
  }

  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

  void done() const {
    if (pos != buf.size()) throw ProtocolError("wire: trailing bytes in payload");
  }
};

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(frame.wire_size());
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(static_cast<std::uint8_t>(frame.type));
  put_u32(out, static_cast<std::uint32_t>(frame.payload.size()));
  out.insert(out.end(), frame.payload.begin(), frame.payload.end());
  return out;
}

Frame decode_frame(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kFrameHeaderBytes) throw ProtocolError("wire: short frame");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ProtocolError("wire: bad magic");
  std::uint8_t type = bytes[4];
  if (type < 1 || type > 3) throw ProtocolError("wire: unknown message type");
  std::uint32_t len = static_cast<std::uint32_t>(bytes[5]) |
                      (static_cast<std::uint32_t>(bytes[6]) << 8) |
                      (static_cast<std::uint32_t>(bytes[7]) << 16) |
                      (static_cast<std::uint32_t>(bytes[8]) << 24);
  if (bytes.size() != kFrameHeaderBytes + len) throw ProtocolError("wire: frame length mismatch");
  Frame frame;
  frame.type = static_cast<MsgType>(type);
  frame.payload.assign(bytes.begin() + kFrameHeaderBytes, bytes.end());
  return frame;
}

Frame to_frame(const FeatureMessage& msg) {
  Frame frame;
  frame.type = MsgType::Feature;
  frame.payload.reserve(8 + 4 * msg.ranks.size());
  put_u32(frame.payload, msg.feature_id);
  put_u32(frame.payload, static_cast<std::uint32_t>(msg.ranks.size()));
  for (std::uint32_t r : msg.ranks) put_u32(frame.payload, r);
  return frame;
}

Frame to_frame(const SplitRequest& req) {
  Frame frame;
  frame.type = MsgType::SplitRequest;
  frame.payload.reserve(4 + 8 * req.items.size());
  put_u32(frame.payload, static_cast<std::uint32_t>(req.items.size()));
  for (const auto& it : req.items) {
    put_u32(frame.payload, it.feature_id);
    put_u32(frame.payload, it.ordinal);
  }
  return frame;
}

Frame to_frame(const SplitReply& reply) {
  Frame frame;
  frame.type = MsgType::SplitReply;
  frame.payload.reserve(4 + 12 * reply.items.size());
  put_u32(frame.payload, static_cast<std::uint32_t>(reply.items.size()));
  for (const auto& it : reply.items) {
    put_u32(frame.payload, it.feature_id);
    put_u32(frame.payload, it.ordinal);
    put_i32(frame.payload, it.value);
  }
  return frame;
}

FeatureMessage decode_feature(const Frame& frame) {
  if (frame.type != MsgType::Feature) throw ProtocolError("wire: expected feature message");
  Reader rd{frame.payload};
  FeatureMessage msg;
  msg.feature_id = rd.u32();
  std::uint32_t n = rd.u32();
  msg.ranks.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) msg.ranks.push_back(rd.u32());
  rd.done();
  return msg;
}

SplitRequest decode_split_request(const Frame& frame) {
  if (frame.type != MsgType::SplitRequest) throw ProtocolError("wire: expected split request");
  Reader rd{frame.payload};
  SplitRequest req;
  std::uint32_t n = rd.u32();
  req.items.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    SplitRequestItem it;
    it.feature_id = rd.u32();
    it.ordinal = rd.u32();
    req.items.push_back(it);
  }
  rd.done();
  return req;
}

SplitReply decode_split_reply(const Frame& frame) {
  if (frame.type != MsgType::SplitReply) throw ProtocolError("wire: expected split reply");
  Reader rd{frame.payload};
  SplitReply reply;
  std::uint32_t n = rd.u32();
  reply.items.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    SplitReplyItem it;
    it.feature_id = rd.u32();
    it.ordinal = rd.u32();
    it.value = rd.i32();
    reply.items.push_back(it);
  }
  rd.done();
  return reply;
}

}  // namespace opboost
