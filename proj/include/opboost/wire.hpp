#pragma once

#include <cstdint>
#include <vector>

namespace opboost {

// Framing, little-endian throughout:
//   magic "OPB1" (4 bytes) | msg_type u8 | payload_len u32 | payload
// Payloads:
//   Feature:      feature_id u32 | n u32 | ranks as n x u32
//   SplitRequest: count u32 | count x (feature_id u32, ordinal u32)
//   SplitReply:   count u32 | count x (feature_id u32, ordinal u32, value i32)
// Fixed-width fields keep the byte accounting auditable.

enum class MsgType : std::uint8_t { Feature = 1, SplitRequest = 2, SplitReply = 3 };

inline constexpr std::size_t kFrameHeaderBytes = 9;  // magic + type + payload_len

struct FeatureMessage {
  std::uint32_t feature_id = 0;
  std::vector<std::uint32_t> ranks;
};

struct SplitRequestItem {
  std::uint32_t feature_id = 0;
  std::uint32_t ordinal = 0;
  bool operator==(const SplitRequestItem&) const = default;
};

struct SplitReplyItem {
  std::uint32_t feature_id = 0;
  std::uint32_t ordinal = 0;
  std::int32_t value = 0;
  bool operator==(const SplitReplyItem&) const = default;
};

struct SplitRequest {
  std::vector<SplitRequestItem> items;
};

struct SplitReply {
  std::vector<SplitReplyItem> items;
};

struct Frame {
  MsgType type = MsgType::Feature;
  std::vector<std::uint8_t> payload;

  std::size_t wire_size() const { return kFrameHeaderBytes + payload.size(); }
};

std::vector<std::uint8_t> encode_frame(const Frame& frame);

// parses one complete frame from the front of `bytes`; throws on bad magic,
// unknown type, or truncation
Frame decode_frame(const std::vector<std::uint8_t>& bytes);

Frame to_frame(const FeatureMessage& msg);
Frame to_frame(const SplitRequest& req);
Frame to_frame(const SplitReply& reply);

FeatureMessage decode_feature(const Frame& frame);
SplitRequest decode_split_request(const Frame& frame);
SplitReply decode_split_reply(const Frame& frame);

}  // namespace opboost
