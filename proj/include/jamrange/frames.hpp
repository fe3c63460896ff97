#pragma once

// Management-frame vocabulary: addresses, channels, frame variants and the
// binary record codec used by the simulated medium and .wjf frame dumps.

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace jamrange {

class MacAddress {
 public:
  using Octets = std::array<std::uint8_t, 6>;

  constexpr MacAddress() = default;
  constexpr explicit MacAddress(const Octets& octets) : octets_(octets) {}

  static constexpr MacAddress broadcast() {
    return MacAddress(Octets{0xFF, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF});
  }
  static constexpr MacAddress zero() { return MacAddress(); }

  // Accepts "aa:BB:cc:..." with colon separators; throws ParseError naming
  // the offending character position.
  static MacAddress parse(std::string_view text);

  const Octets& octets() const noexcept { return octets_; }
  bool is_broadcast() const noexcept { return *this == broadcast(); }
  bool is_zero() const noexcept { return *this == zero(); }

  // Uppercase, colon separated, always 17 characters.
  std::string str() const;

  constexpr auto operator<=>(const MacAddress&) const = default;

 private:
  Octets octets_{};
};

inline MacAddress parse_mac(std::string_view text) { return MacAddress::parse(text); }
inline std::string render_mac(const MacAddress& mac) { return mac.str(); }

enum class Band : std::uint8_t { Band24, Band5 };

std::string_view band_label(Band band);  // "2.4Ghz" / "5Ghz"

struct Channel {
  Band band = Band::Band24;
  int number = 1;

  constexpr auto operator<=>(const Channel&) const = default;

  bool valid() const noexcept;
  // Infers the band from the number (1..14 -> 2.4 GHz, otherwise 5 GHz).
  // Throws DomainError for numbers that are not a channel in either band.
  static Channel from_number(int number);
};

// Valid channel numbers of a band, ascending.
std::span<const int> band_channels(Band band);
// All channels of the given bands in canonical order (2.4 GHz first).
std::vector<Channel> channels_for_bands(std::span<const Band> bands);

// Center frequency; throws DomainError for invalid channels.
int channel_center_mhz(const Channel& channel);

enum class EncryptionType : std::uint8_t { Open = 0, Wep = 1, Wpa = 2, Wpa2 = 3, Wpa3 = 4 };

std::string_view encryption_name(EncryptionType enc);
EncryptionType parse_encryption(std::string_view text);

class ReasonCode {
 public:
  static constexpr std::uint16_t kForgedDefault = 7;

  constexpr ReasonCode() = default;
  // Throws DomainError outside 1..66.
  explicit ReasonCode(int code);

  std::uint16_t value() const noexcept { return code_; }
  constexpr auto operator<=>(const ReasonCode&) const = default;

 private:
  std::uint16_t code_ = kForgedDefault;
};

inline constexpr std::size_t kMaxEssidLength = 32;

// ESSIDs are raw bytes; printable ASCII passes through, anything else is
// shown as \xNN.
std::string display_essid(std::string_view essid);

struct Beacon {
  MacAddress bssid;
  std::string essid;
  Channel channel;
  EncryptionType enc = EncryptionType::Open;
  bool operator==(const Beacon&) const = default;
};

struct ProbeRequest {
  MacAddress src;
  bool operator==(const ProbeRequest&) const = default;
};

struct ProbeResponse {
  MacAddress bssid;
  std::string essid;
  Channel channel;
  EncryptionType enc = EncryptionType::Open;
  MacAddress dst;
  bool operator==(const ProbeResponse&) const = default;
};

struct Authentication {
  MacAddress src;
  MacAddress dst;
  bool success = true;
  bool operator==(const Authentication&) const = default;
};

struct AssociationRequest {
  MacAddress src;
  MacAddress bssid;
  bool operator==(const AssociationRequest&) const = default;
};

struct AssociationResponse {
  MacAddress bssid;
  MacAddress dst;
  bool success = true;
  bool operator==(const AssociationResponse&) const = default;
};

struct Deauthentication {
  MacAddress src;
  MacAddress dst;
  MacAddress bssid;
  ReasonCode reason;
  bool operator==(const Deauthentication&) const = default;
};

struct Disassociation {
  MacAddress src;
  MacAddress dst;
  MacAddress bssid;
  ReasonCode reason;
  bool operator==(const Disassociation&) const = default;
};

using FrameBody = std::variant<Beacon, ProbeRequest, ProbeResponse, Authentication,
                               AssociationRequest, AssociationResponse, Deauthentication,
                               Disassociation>;

struct ManagementFrame {
  FrameBody body;
  std::uint16_t seq = 0;

  bool operator==(const ManagementFrame&) const = default;

  template <typename T>
  const T* as() const noexcept {
    return std::get_if<T>(&body);
  }
};

// 802.11 management subtype number of the frame variant.
std::uint8_t subtype_code(const ManagementFrame& frame);
// Short lowercase name ("beacon", "deauth", ...), used in logs.
std::string_view subtype_name(const ManagementFrame& frame);

// Logical transmitter: the station or AP the frame claims to come from.
MacAddress frame_src(const ManagementFrame& frame);
// Logical receiver used for capture filtering; beacons and probe requests
// are broadcast.
MacAddress frame_dst(const ManagementFrame& frame);
std::optional<MacAddress> frame_bssid(const ManagementFrame& frame);

// Checks essid length and channel validity; throws DomainError.
void validate_frame(const ManagementFrame& frame);

enum class ForgeKind { Deauth, Disassoc };

// Builds a deauthentication/disassociation carrying exactly the given
// addresses. Sequence number is left at 0 for the transmitting interface.
ManagementFrame forge(ForgeKind kind, const MacAddress& src, const MacAddress& dst,
                      const MacAddress& bssid, ReasonCode reason = ReasonCode{});

struct CapturedFrame {
  ManagementFrame frame;
  Channel channel;
  int pwr = 0;
  std::int64_t t = 0;
};

// Binary record layout (big-endian):
//   subtype(1) seq(2) addr1/dst(6) addr2/src(6) addr3/bssid(6) payload...
// Payload: reason(2) for deauth/disassoc; channel(1) enc(1) essid_len(1)
// essid for beacon/probe response; success(1) for auth/assoc response.
// The channel byte holds the band in its high bit and the channel's index
// within that band's channel table in the low seven bits.
std::vector<std::uint8_t> encode_frame(const ManagementFrame& frame);
ManagementFrame decode_frame(std::span<const std::uint8_t> bytes);
std::size_t encoded_size(const ManagementFrame& frame);

std::uint8_t encode_channel_byte(const Channel& channel);
Channel decode_channel_byte(std::uint8_t byte);

// .wjf dump: "WJFRAME1" then [u32 length][record] repeated.
inline constexpr std::string_view kFrameDumpMagic = "WJFRAME1";
void write_frame_dump(const std::filesystem::path& path, std::span<const ManagementFrame> frames);
std::vector<ManagementFrame> read_frame_dump(const std::filesystem::path& path);

}  // namespace jamrange

template <>
struct std::hash<jamrange::MacAddress> {
  std::size_t operator()(const jamrange::MacAddress& mac) const noexcept {
    std::uint64_t v = 0;
    for (auto o : mac.octets()) v = (v << 8) | o;
    return std::hash<std::uint64_t>{}(v);
  }
};
