#include <algorithm>
#include <fstream>

#include "jamrange/errors.hpp"
#include "jamrange/frames.hpp"

namespace jamrange {

namespace {

constexpr std::size_t kHeaderSize = 1 + 2 + 18;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  void mac(const MacAddress& m) { out_.insert(out_.end(), m.octets().begin(), m.octets().end()); }
  void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw DecodeError(std::string("truncated ") + what, in_.size());
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  MacAddress mac(const char* what) {
    need(6, what);
    MacAddress::Octets o{};
    std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), 6, o.begin());
    pos_ += 6;
    return MacAddress(o);
  }
  std::string bytes(std::size_t n) {
    if (remaining() < n) {
      throw DecodeError("truncated essid: length " + std::to_string(n) + " exceeds remaining " +
                            std::to_string(remaining()) + " bytes",
                        in_.size());
    }
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

struct Slots {
  MacAddress dst, src, bssid;
};

Slots slots_of(const ManagementFrame& f) {
  Slots s;
  if (auto* b = f.as<Beacon>()) s.bssid = b->bssid;
  if (auto* p = f.as<ProbeRequest>()) s.src = p->src;
  if (auto* p = f.as<ProbeResponse>()) {
    s.dst = p->dst;
    s.bssid = p->bssid;
  }
  if (auto* a = f.as<Authentication>()) {
    s.dst = a->dst;
    s.src = a->src;
  }
  if (auto* a = f.as<AssociationRequest>()) {
    s.src = a->src;
    s.bssid = a->bssid;
  }
  if (auto* a = f.as<AssociationResponse>()) {
    s.dst = a->dst;
    s.bssid = a->bssid;
  }
  if (auto* d = f.as<Deauthentication>()) s = {d->dst, d->src, d->bssid};
  if (auto* d = f.as<Disassociation>()) s = {d->dst, d->src, d->bssid};
  return s;
}

void write_network(Writer& w, const std::string& essid, const Channel& channel,
                   EncryptionType enc) {
  w.u8(encode_channel_byte(channel));
  w.u8(static_cast<std::uint8_t>(enc));
  w.u8(static_cast<std::uint8_t>(essid.size()));
  w.bytes(essid);
}

struct Network {
  Channel channel;
  EncryptionType enc;
  std::string essid;
};

Network read_network(Reader& r) {
  Network n;
  const std::size_t channel_at = r.offset();
  const std::uint8_t channel_byte = r.u8("channel");
  try {
    n.channel = decode_channel_byte(channel_byte);
  } catch (const DecodeError&) {
    throw DecodeError("invalid channel byte", channel_at);
  }
  const std::size_t enc_at = r.offset();
  const std::uint8_t enc = r.u8("encryption");
  if (enc > static_cast<std::uint8_t>(EncryptionType::Wpa3)) {
    throw DecodeError("unknown encryption code " + std::to_string(enc), enc_at);
  }
  n.enc = static_cast<EncryptionType>(enc);
  const std::size_t len_at = r.offset();
  const std::uint8_t len = r.u8("essid length");
  if (len > kMaxEssidLength) throw DecodeError("essid overrun: length " + std::to_string(len) + " > 32", len_at);
  n.essid = r.bytes(len);
  return n;
}

ReasonCode read_reason(Reader& r) {
  const std::size_t at = r.offset();
  const std::uint16_t v = r.u16("reason code");
  try {
    return ReasonCode(v);
  } catch (const DomainError&) {
    throw DecodeError("reason code out of range: " + std::to_string(v), at);
  }
}

}  // namespace

std::uint8_t encode_channel_byte(const Channel& channel) {
  auto list = band_channels(channel.band);
  auto it = std::find(list.begin(), list.end(), channel.number);
  if (it == list.end()) throw DomainError("invalid channel " + std::to_string(channel.number));
  const auto index = static_cast<std::uint8_t>(it - list.begin());
  return static_cast<std::uint8_t>((channel.band == Band::Band5 ? 0x80 : 0x00) | index);
}

Channel decode_channel_byte(std::uint8_t byte) {
  const Band band = (byte & 0x80) ? Band::Band5 : Band::Band24;
  const std::size_t index = byte & 0x7F;
  auto list = band_channels(band);
  if (index >= list.size()) throw DecodeError("channel index out of range", 0);
  return Channel{band, list[index]};
}

std::size_t encoded_size(const ManagementFrame& frame) {
  if (auto* b = frame.as<Beacon>()) return kHeaderSize + 3 + b->essid.size();
  if (auto* p = frame.as<ProbeResponse>()) return kHeaderSize + 3 + p->essid.size();
  if (frame.as<Deauthentication>() || frame.as<Disassociation>()) return kHeaderSize + 2;
  if (frame.as<Authentication>() || frame.as<AssociationResponse>()) return kHeaderSize + 1;
  return kHeaderSize;
}

std::vector<std::uint8_t> encode_frame(const ManagementFrame& frame) {
  validate_frame(frame);
  Writer w;
  w.u8(subtype_code(frame));
  w.u16(frame.seq);
  const Slots s = slots_of(frame);
  w.mac(s.dst);
  w.mac(s.src);
  w.mac(s.bssid);
  if (auto* b = frame.as<Beacon>()) write_network(w, b->essid, b->channel, b->enc);
  if (auto* p = frame.as<ProbeResponse>()) write_network(w, p->essid, p->channel, p->enc);
  if (auto* d = frame.as<Deauthentication>()) w.u16(d->reason.value());
  if (auto* d = frame.as<Disassociation>()) w.u16(d->reason.value());
  if (auto* a = frame.as<Authentication>()) w.u8(a->success ? 1 : 0);
  if (auto* a = frame.as<AssociationResponse>()) w.u8(a->success ? 1 : 0);
  return w.take();
}

ManagementFrame decode_frame(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint8_t code = r.u8("subtype");
  static constexpr std::array<std::uint8_t, 8> kKnown = {0x08, 0x04, 0x05, 0x0B, 0x00, 0x01, 0x0A, 0x0C};
  if (std::find(kKnown.begin(), kKnown.end(), code) == kKnown.end()) {
    throw DecodeError("unknown subtype code " + std::to_string(code), 0);
  }
  ManagementFrame out;
  out.seq = r.u16("sequence number");
  const MacAddress dst = r.mac("addr1");
  const MacAddress src = r.mac("addr2");
  const MacAddress bssid = r.mac("addr3");

  switch (code) {
    case 0x08: {
      auto n = read_network(r);
      out.body = Beacon{bssid, std::move(n.essid), n.channel, n.enc};
      break;
    }
    case 0x04: out.body = ProbeRequest{src}; break;
    case 0x05: {
      auto n = read_network(r);
      out.body = ProbeResponse{bssid, std::move(n.essid), n.channel, n.enc, dst};
      break;
    }
    case 0x0B: out.body = Authentication{src, dst, r.u8("success flag") != 0}; break;
    case 0x00: out.body = AssociationRequest{src, bssid}; break;
    case 0x01: out.body = AssociationResponse{bssid, dst, r.u8("success flag") != 0}; break;
    case 0x0A: out.body = Disassociation{src, dst, bssid, read_reason(r)}; break;
    case 0x0C: out.body = Deauthentication{src, dst, bssid, read_reason(r)}; break;
    default: throw DecodeError("unknown subtype code " + std::to_string(code), 0);
  }
  if (r.remaining() != 0) throw DecodeError("trailing bytes after frame record", r.offset());
  return out;
}

void write_frame_dump(const std::filesystem::path& path, std::span<const ManagementFrame> frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kFrameDumpMagic.data(), static_cast<std::streamsize>(kFrameDumpMagic.size()));
  for (const auto& f : frames) {
    const auto record = encode_frame(f);
    const auto n = static_cast<std::uint32_t>(record.size());
    const char len[4] = {static_cast<char>(n >> 24), static_cast<char>((n >> 16) & 0xFF),
                         static_cast<char>((n >> 8) & 0xFF), static_cast<char>(n & 0xFF)};
    out.write(len, 4);
    out.write(reinterpret_cast<const char*>(record.data()), static_cast<std::streamsize>(record.size()));
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ManagementFrame> read_frame_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < kFrameDumpMagic.size() ||
      !std::equal(kFrameDumpMagic.begin(), kFrameDumpMagic.end(), data.begin())) {
    throw DecodeError("missing WJFRAME1 magic", 0);
  }
  std::vector<ManagementFrame> frames;
  std::size_t pos = kFrameDumpMagic.size();
  while (pos < data.size()) {
    if (data.size() - pos < 4) throw DecodeError("truncated record length", pos);
    const std::uint32_t n = (std::uint32_t{data[pos]} << 24) | (std::uint32_t{data[pos + 1]} << 16) |
                            (std::uint32_t{data[pos + 2]} << 8) | std::uint32_t{data[pos + 3]};
    pos += 4;
    if (data.size() - pos < n) throw DecodeError("truncated frame record", data.size());
    try {
      frames.push_back(decode_frame(std::span(data).subspan(pos, n)));
    } catch (const DecodeError& e) {
      throw DecodeError(std::string("record ") + std::to_string(frames.size()) + ": " + e.what(),
                        pos + e.offset());
    }
    pos += n;
  }
  return frames;
}

}  // namespace jamrange
