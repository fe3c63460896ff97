#include "jamrange/frames.hpp"

#include <algorithm>
#include <cctype>

#include "jamrange/errors.hpp"

namespace jamrange {

namespace {

constexpr std::array<int, 14> kChannels24 = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
constexpr std::array<int, 21> kChannels5 = {36,  40,  44,  48,  52,  56,  60,  64,  100, 104, 108,
                                            112, 116, 132, 136, 140, 149, 153, 157, 161, 165};

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

MacAddress MacAddress::parse(std::string_view text) {
  if (text.size() != 17) {
    throw ParseError("MAC address must be 17 characters, got " + std::to_string(text.size()),
                     std::min<std::size_t>(text.size(), 17));
  }
  Octets octets{};
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t pos = i * 3;
    const int hi = hex_value(text[pos]);
    if (hi < 0) throw ParseError("non-hex digit at position " + std::to_string(pos), pos);
    const int lo = hex_value(text[pos + 1]);
    if (lo < 0) throw ParseError("non-hex digit at position " + std::to_string(pos + 1), pos + 1);
    octets[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    if (i < 5 && text[pos + 2] != ':') {
      throw ParseError("expected ':' at position " + std::to_string(pos + 2), pos + 2);
    }
  }
  return MacAddress(octets);
}

std::string MacAddress::str() const {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(17);
  for (std::size_t i = 0; i < octets_.size(); ++i) {
    if (i) out.push_back(':');
    out.push_back(kDigits[octets_[i] >> 4]);
    out.push_back(kDigits[octets_[i] & 0x0F]);
  }
  return out;
}

std::string_view band_label(Band band) { return band == Band::Band24 ? "2.4Ghz" : "5Ghz"; }

std::span<const int> band_channels(Band band) {
  if (band == Band::Band24) return kChannels24;
  return kChannels5;
}

bool Channel::valid() const noexcept {
  auto list = band_channels(band);
  return std::find(list.begin(), list.end(), number) != list.end();
}

Channel Channel::from_number(int number) {
  Channel c{number <= 14 ? Band::Band24 : Band::Band5, number};
  if (!c.valid()) throw DomainError("invalid channel number " + std::to_string(number));
  return c;
}

std::vector<Channel> channels_for_bands(std::span<const Band> bands) {
  std::vector<Channel> out;
  for (Band b : {Band::Band24, Band::Band5}) {
    if (std::find(bands.begin(), bands.end(), b) == bands.end()) continue;
    for (int n : band_channels(b)) out.push_back(Channel{b, n});
  }
  return out;
}

int channel_center_mhz(const Channel& channel) {
  if (!channel.valid()) {
    throw DomainError("invalid channel " + std::to_string(channel.number) + " for band " +
                      std::string(band_label(channel.band)));
  }
  if (channel.band == Band::Band24) {
    return channel.number == 14 ? 2484 : 2407 + 5 * channel.number;
  }
  return 5000 + 5 * channel.number;
}

std::string_view encryption_name(EncryptionType enc) {
  switch (enc) {
    case EncryptionType::Open: return "OPEN";
    case EncryptionType::Wep: return "WEP";
    case EncryptionType::Wpa: return "WPA";
    case EncryptionType::Wpa2: return "WPA2";
    case EncryptionType::Wpa3: return "WPA3";
  }
  return "OPEN";
}

EncryptionType parse_encryption(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto enc : {EncryptionType::Open, EncryptionType::Wep, EncryptionType::Wpa,
                   EncryptionType::Wpa2, EncryptionType::Wpa3}) {
    if (encryption_name(enc) == upper) return enc;
  }
  throw DomainError("unknown encryption type '" + std::string(text) + "'");
}

ReasonCode::ReasonCode(int code) {
  if (code < 1 || code > 66) throw DomainError("reason code out of range: " + std::to_string(code));
  code_ = static_cast<std::uint16_t>(code);
}

std::string display_essid(std::string_view essid) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : essid) {
    if (c >= 0x20 && c < 0x7F && c != '\\') {
      out.push_back(static_cast<char>(c));
    } else {
      out += "\\x";
      out.push_back(kDigits[c >> 4]);
      out.push_back(kDigits[c & 0x0F]);
    }
  }
  return out;
}

std::uint8_t subtype_code(const ManagementFrame& frame) {
  return std::visit(overloaded{
                        [](const Beacon&) -> std::uint8_t { return 0x08; },
                        [](const ProbeRequest&) -> std::uint8_t { return 0x04; },
                        [](const ProbeResponse&) -> std::uint8_t { return 0x05; },
                        [](const Authentication&) -> std::uint8_t { return 0x0B; },
                        [](const AssociationRequest&) -> std::uint8_t { return 0x00; },
                        [](const AssociationResponse&) -> std::uint8_t { return 0x01; },
                        [](const Disassociation&) -> std::uint8_t { return 0x0A; },
                        [](const Deauthentication&) -> std::uint8_t { return 0x0C; },
                    },
                    frame.body);
}

std::string_view subtype_name(const ManagementFrame& frame) {
  return std::visit(overloaded{
                        [](const Beacon&) -> std::string_view { return "beacon"; },
                        [](const ProbeRequest&) -> std::string_view { return "probe_req"; },
                        [](const ProbeResponse&) -> std::string_view { return "probe_resp"; },
                        [](const Authentication&) -> std::string_view { return "auth"; },
                        [](const AssociationRequest&) -> std::string_view { return "assoc_req"; },
                        [](const AssociationResponse&) -> std::string_view { return "assoc_resp"; },
                        [](const Disassociation&) -> std::string_view { return "disassoc"; },
                        [](const Deauthentication&) -> std::string_view { return "deauth"; },
                    },
                    frame.body);
}

MacAddress frame_src(const ManagementFrame& frame) {
  return std::visit(overloaded{
                        [](const Beacon& f) { return f.bssid; },
                        [](const ProbeRequest& f) { return f.src; },
                        [](const ProbeResponse& f) { return f.bssid; },
                        [](const Authentication& f) { return f.src; },
                        [](const AssociationRequest& f) { return f.src; },
                        [](const AssociationResponse& f) { return f.bssid; },
                        [](const Disassociation& f) { return f.src; },
                        [](const Deauthentication& f) { return f.src; },
                    },
                    frame.body);
}

MacAddress frame_dst(const ManagementFrame& frame) {
  return std::visit(overloaded{
                        [](const Beacon&) { return MacAddress::broadcast(); },
                        [](const ProbeRequest&) { return MacAddress::broadcast(); },
                        [](const ProbeResponse& f) { return f.dst; },
                        [](const Authentication& f) { return f.dst; },
                        [](const AssociationRequest& f) { return f.bssid; },
                        [](const AssociationResponse& f) { return f.dst; },
                        [](const Disassociation& f) { return f.dst; },
                        [](const Deauthentication& f) { return f.dst; },
                    },
                    frame.body);
}

std::optional<MacAddress> frame_bssid(const ManagementFrame& frame) {
  return std::visit(overloaded{
                        [](const Beacon& f) -> std::optional<MacAddress> { return f.bssid; },
                        [](const ProbeRequest&) -> std::optional<MacAddress> { return std::nullopt; },
                        [](const ProbeResponse& f) -> std::optional<MacAddress> { return f.bssid; },
                        [](const Authentication&) -> std::optional<MacAddress> { return std::nullopt; },
                        [](const AssociationRequest& f) -> std::optional<MacAddress> { return f.bssid; },
                        [](const AssociationResponse& f) -> std::optional<MacAddress> { return f.bssid; },
                        [](const Disassociation& f) -> std::optional<MacAddress> { return f.bssid; },
                        [](const Deauthentication& f) -> std::optional<MacAddress> { return f.bssid; },
                    },
                    frame.body);
}

void validate_frame(const ManagementFrame& frame) {
  auto check = [](const std::string& essid, const Channel& channel) {
    if (essid.size() > kMaxEssidLength) {
      throw DomainError("essid longer than 32 bytes (" + std::to_string(essid.size()) + ")");
    }
    if (!channel.valid()) throw DomainError("invalid channel " + std::to_string(channel.number));
  };
  if (auto* b = frame.as<Beacon>()) check(b->essid, b->channel);
  if (auto* p = frame.as<ProbeResponse>()) check(p->essid, p->channel);
}

ManagementFrame forge(ForgeKind kind, const MacAddress& src, const MacAddress& dst,
                      const MacAddress& bssid, ReasonCode reason) {
  if (kind == ForgeKind::Deauth) return ManagementFrame{Deauthentication{src, dst, bssid, reason}};
  return ManagementFrame{Disassociation{src, dst, bssid, reason}};
}

}  // namespace jamrange
