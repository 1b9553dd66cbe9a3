#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fivegsim/common.hpp"
#include "fivegsim/crypto_suite.hpp"
#include "fivegsim/identity.hpp"
#include "fivegsim/pki.hpp"

namespace fivegsim {

enum class MessageKind : uint8_t {
  RegistrationRequest,
  IdentityRequest,
  IdentityResponse,
  AuthChallenge,
  AuthResponse,
  AuthResult,
  SecurityModeCommand,
  SecurityModeComplete,
  RegistrationAccept,
  RegistrationReject,
  TauRequest,
  TauReject,
  EmergencyRequest,
  DowngradeCommand,
  Broadcast,
};

inline std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::RegistrationRequest: return "RegistrationRequest";
    case MessageKind::IdentityRequest: return "IdentityRequest";
    case MessageKind::IdentityResponse: return "IdentityResponse";
    case MessageKind::AuthChallenge: return "AuthChallenge";
    case MessageKind::AuthResponse: return "AuthResponse";
    case MessageKind::AuthResult: return "AuthResult";
    case MessageKind::SecurityModeCommand: return "SecurityModeCommand";
    case MessageKind::SecurityModeComplete: return "SecurityModeComplete";
    case MessageKind::RegistrationAccept: return "RegistrationAccept";
    case MessageKind::RegistrationReject: return "RegistrationReject";
    case MessageKind::TauRequest: return "TauRequest";
    case MessageKind::TauReject: return "TauReject";
    case MessageKind::EmergencyRequest: return "EmergencyRequest";
    case MessageKind::DowngradeCommand: return "DowngradeCommand";
    case MessageKind::Broadcast: return "Broadcast";
  }
  return "?";
}

// ---- field codec -----------------------------------------------------------
// Bodies serialize as "key=value;key=value". Values never contain ';'. The
// null-scheme SUCI keeps its msin digits literal in the encoding, which is
// what makes "sent in the clear" observable to the sniffer.

namespace codec {

inline std::string encode_suci(const Suci& s) {
  std::string out = s.scheme == SuciScheme::Null ? "null" : "pk";
  out += "," + s.mcc + "," + s.mnc + ",";
  out += hex_encode(s.ephemeral_tag);
  out += ",";
  if (s.scheme == SuciScheme::Null) {
    out += fivegsim::to_string(BytesView(s.ciphertext));
  } else {
    out += hex_encode(s.ciphertext);
  }
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

inline std::optional<Suci> decode_suci(std::string_view v) {
  auto parts = split(v, ',');
  if (parts.size() != 5) return std::nullopt;
  Suci s;
  if (parts[0] == "null") {
    s.scheme = SuciScheme::Null;
    s.ciphertext = to_bytes(parts[4]);
  } else if (parts[0] == "pk") {
    s.scheme = SuciScheme::ProbabilisticPk;
    s.ciphertext = hex_decode(parts[4]);
  } else {
    return std::nullopt;
  }
  s.mcc = parts[1];
  s.mnc = parts[2];
  s.ephemeral_tag = hex_decode(parts[3]);
  return s;
}

inline std::string encode_guti(const Guti& g) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", g.temp_id);
  return g.plmn.render() + "," + buf + "," + std::to_string(g.epoch);
}

inline std::optional<Guti> decode_guti(std::string_view v) {
  auto parts = split(v, ',');
  if (parts.size() != 3) return std::nullopt;
  Guti g;
  g.plmn = Plmn::parse(parts[0]);
  if (!g.plmn.well_formed()) return std::nullopt;
  g.temp_id = static_cast<uint32_t>(std::stoul(parts[1], nullptr, 16));
  g.epoch = static_cast<uint32_t>(std::stoul(parts[2]));
  return g;
}

inline std::string encode_caps(const SecurityCapabilities& c) {
  std::string out;
  for (size_t i = 0; i < c.ciphering.size(); ++i) {
    if (i) out += "+";
    out += to_string(c.ciphering[i]);
  }
  out += "/";
  for (size_t i = 0; i < c.integrity.size(); ++i) {
    if (i) out += "+";
    out += to_string(c.integrity[i]);
  }
  return out;
}

inline std::optional<SecurityCapabilities> decode_caps(std::string_view v) {
  auto sides = split(v, '/');
  if (sides.size() != 2) return std::nullopt;
  SecurityCapabilities caps;
  if (!sides[0].empty()) {
    for (const auto& name : split(sides[0], '+')) {
      auto a = cipher_from_string(name);
      if (!a) return std::nullopt;
      caps.ciphering.push_back(*a);
    }
  }
  if (!sides[1].empty()) {
    for (const auto& name : split(sides[1], '+')) {
      auto a = integrity_from_string(name);
      if (!a) return std::nullopt;
      caps.integrity.push_back(*a);
    }
  }
  return caps;
}

using FieldMap = std::map<std::string, std::string, std::less<>>;

inline std::optional<FieldMap> parse_fields(std::string_view body) {
  FieldMap fields;
  if (body.empty()) return fields;
  for (const auto& part : split(body, ';')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) return std::nullopt;
    fields[part.substr(0, eq)] = part.substr(eq + 1);
  }
  return fields;
}

}  // namespace codec

// ---- bodies ----------------------------------------------------------------

struct BroadcastBody {
  int32_t priority = 0;
};

struct RegistrationRequestBody {
  std::optional<Suci> suci;  // exactly one of suci/guti identifies the UE
  std::optional<Guti> guti;
  SecurityCapabilities caps;
  std::string access = "3gpp";       // "3gpp" or "non3gpp"
  std::string auth_method = "5g-aka";  // UE-selected: "5g-aka" or "eap-aka";
                                       // a label only, downstream identical
};

struct IdentityRequestBody {};

struct IdentityResponseBody {
  Suci suci;
};

struct AuthChallengeBody {
  Bytes nonce;
  uint32_t run = 0;
  Bytes autn;  // home-network proof over (nonce, run)
  std::string method = "5g-aka";  // echoes the UE-selected method label
};

enum class AuthFailureKind : uint8_t { None, MacFailure, SyncFailure };

struct AuthResponseBody {
  Bytes res;
  AuthFailureKind failure = AuthFailureKind::None;
  uint32_t sync_run = 0;  // UE's counter, reported on SyncFailure
};

struct AuthResultBody {  // serving -> home confirmation, core link only
  std::string supi;
  std::string visited_plmn;
  uint32_t run = 0;
  bool success = false;
};

struct SecurityModeCommandBody {
  CipherAlg cipher = CipherAlg::NEA2;
  IntegrityAlg integrity = IntegrityAlg::NIA2;
  std::optional<SecurityCapabilities> replayed_caps;  // echo when enabled
  uint32_t run = 0;
};

struct SecurityModeCompleteBody {};

struct RegistrationAcceptBody {
  Guti guti;
};

struct RegistrationRejectBody {
  std::string cause = "permanent";
};

struct TauRequestBody {
  Guti guti;
};

struct TauRejectBody {
  std::string cause = "permanent";
};

struct EmergencyRequestBody {
  Suci identity;  // null scheme on the unauthenticated path
};

struct DowngradeCommandBody {
  std::string target = "gsm-legacy";
};

// Placeholder carried by a message whose real body travels inside the
// protection envelope; receivers must go through unprotect + decode.
struct OpaqueBody {};

using MessageBody =
    std::variant<BroadcastBody, RegistrationRequestBody, IdentityRequestBody,
                 IdentityResponseBody, AuthChallengeBody, AuthResponseBody,
                 AuthResultBody, SecurityModeCommandBody, SecurityModeCompleteBody,
                 RegistrationAcceptBody, RegistrationRejectBody, TauRequestBody,
                 TauRejectBody, EmergencyRequestBody, DowngradeCommandBody, OpaqueBody>;

inline Bytes encode_body(MessageKind kind, const MessageBody& body) {
  std::string out;
  switch (kind) {
    case MessageKind::Broadcast: {
      const auto& b = std::get<BroadcastBody>(body);
      out = "priority=" + std::to_string(b.priority);
      break;
    }
    case MessageKind::RegistrationRequest: {
      const auto& b = std::get<RegistrationRequestBody>(body);
      if (b.suci) out += "suci=" + codec::encode_suci(*b.suci) + ";";
      if (b.guti) out += "guti=" + codec::encode_guti(*b.guti) + ";";
      out += "caps=" + codec::encode_caps(b.caps) + ";access=" + b.access +
             ";method=" + b.auth_method;
      break;
    }
    case MessageKind::IdentityRequest:
      out = "requested=suci";
      break;
    case MessageKind::IdentityResponse: {
      const auto& b = std::get<IdentityResponseBody>(body);
      out = "suci=" + codec::encode_suci(b.suci);
      break;
    }
    case MessageKind::AuthChallenge: {
      const auto& b = std::get<AuthChallengeBody>(body);
      out = "nonce=" + hex_encode(b.nonce) + ";run=" + std::to_string(b.run) +
            ";autn=" + hex_encode(b.autn) + ";method=" + b.method;
      break;
    }
    case MessageKind::AuthResponse: {
      const auto& b = std::get<AuthResponseBody>(body);
      out = "res=" + hex_encode(b.res);
      out += ";failure=";
      out += b.failure == AuthFailureKind::None
                 ? "none"
                 : (b.failure == AuthFailureKind::MacFailure ? "mac" : "sync");
      out += ";sync_run=" + std::to_string(b.sync_run);
      break;
    }
    case MessageKind::AuthResult: {
      const auto& b = std::get<AuthResultBody>(body);
      out = "supi=" + b.supi + ";visited=" + b.visited_plmn +
            ";run=" + std::to_string(b.run) +
            ";success=" + (b.success ? "1" : "0");
      break;
    }
    case MessageKind::SecurityModeCommand: {
      const auto& b = std::get<SecurityModeCommandBody>(body);
      out = "cipher=" + to_string(b.cipher) + ";integ=" + to_string(b.integrity) +
            ";run=" + std::to_string(b.run);
      if (b.replayed_caps) out += ";replayed_caps=" + codec::encode_caps(*b.replayed_caps);
      break;
    }
    case MessageKind::SecurityModeComplete:
      out = "ok=1";
      break;
    case MessageKind::RegistrationAccept: {
      const auto& b = std::get<RegistrationAcceptBody>(body);
      out = "guti=" + codec::encode_guti(b.guti);
      break;
    }
    case MessageKind::RegistrationReject: {
      const auto& b = std::get<RegistrationRejectBody>(body);
      out = "cause=" + b.cause;
      break;
    }
    case MessageKind::TauRequest: {
      const auto& b = std::get<TauRequestBody>(body);
      out = "guti=" + codec::encode_guti(b.guti);
      break;
    }
    case MessageKind::TauReject: {
      const auto& b = std::get<TauRejectBody>(body);
      out = "cause=" + b.cause;
      break;
    }
    case MessageKind::EmergencyRequest: {
      const auto& b = std::get<EmergencyRequestBody>(body);
      out = "identity=" + codec::encode_suci(b.identity);
      break;
    }
    case MessageKind::DowngradeCommand: {
      const auto& b = std::get<DowngradeCommandBody>(body);
      out = "target=" + b.target;
      break;
    }
  }
  return to_bytes(out);
}

// Tolerant of arbitrary bytes: tampered or truncated encodings (possible
// under null integrity) decode to nullopt, never a crash.
inline std::optional<MessageBody> decode_body(MessageKind kind, BytesView bytes) try {
  auto fields_opt = codec::parse_fields(to_string(bytes));
  if (!fields_opt) return std::nullopt;
  auto& f = *fields_opt;
  auto get = [&](std::string_view key) -> std::optional<std::string> {
    auto it = f.find(key);
    if (it == f.end()) return std::nullopt;
    return it->second;
  };
  switch (kind) {
    case MessageKind::Broadcast: {
      auto p = get("priority");
      if (!p) return std::nullopt;
      return BroadcastBody{static_cast<int32_t>(std::stol(*p))};
    }
    case MessageKind::RegistrationRequest: {
      RegistrationRequestBody b;
      if (auto s = get("suci")) {
        b.suci = codec::decode_suci(*s);
        if (!b.suci) return std::nullopt;
      }
      if (auto g = get("guti")) {
        b.guti = codec::decode_guti(*g);
        if (!b.guti) return std::nullopt;
      }
      auto caps = get("caps");
      auto access = get("access");
      if (!caps || !access) return std::nullopt;
      auto decoded = codec::decode_caps(*caps);
      if (!decoded) return std::nullopt;
      b.caps = *decoded;
      b.access = *access;
      if (auto method = get("method")) b.auth_method = *method;
      return b;
    }
    case MessageKind::IdentityRequest:
      return IdentityRequestBody{};
    case MessageKind::IdentityResponse: {
      auto s = get("suci");
      if (!s) return std::nullopt;
      auto suci = codec::decode_suci(*s);
      if (!suci) return std::nullopt;
      return IdentityResponseBody{*suci};
    }
    case MessageKind::AuthChallenge: {
      auto nonce = get("nonce"), run = get("run"), autn = get("autn");
      if (!nonce || !run || !autn) return std::nullopt;
      AuthChallengeBody b{hex_decode(*nonce), static_cast<uint32_t>(std::stoul(*run)),
                          hex_decode(*autn)};
      if (auto method = get("method")) b.method = *method;
      return b;
    }
    case MessageKind::AuthResponse: {
      auto res = get("res"), failure = get("failure"), sync = get("sync_run");
      if (!res || !failure || !sync) return std::nullopt;
      AuthResponseBody b;
      b.res = hex_decode(*res);
      b.failure = *failure == "none"
                      ? AuthFailureKind::None
                      : (*failure == "mac" ? AuthFailureKind::MacFailure
                                           : AuthFailureKind::SyncFailure);
      b.sync_run = static_cast<uint32_t>(std::stoul(*sync));
      return b;
    }
    case MessageKind::AuthResult: {
      auto supi = get("supi"), visited = get("visited"), run = get("run"),
           success = get("success");
      if (!supi || !visited || !run || !success) return std::nullopt;
      return AuthResultBody{*supi, *visited, static_cast<uint32_t>(std::stoul(*run)),
                            *success == "1"};
    }
    case MessageKind::SecurityModeCommand: {
      auto cipher = get("cipher"), integ = get("integ"), run = get("run");
      if (!cipher || !integ || !run) return std::nullopt;
      auto c = cipher_from_string(*cipher);
      auto i = integrity_from_string(*integ);
      if (!c || !i) return std::nullopt;
      SecurityModeCommandBody b;
      b.cipher = *c;
      b.integrity = *i;
      b.run = static_cast<uint32_t>(std::stoul(*run));
      if (auto caps = get("replayed_caps")) {
        b.replayed_caps = codec::decode_caps(*caps);
        if (!b.replayed_caps) return std::nullopt;
      }
      return b;
    }
    case MessageKind::SecurityModeComplete:
      return SecurityModeCompleteBody{};
    case MessageKind::RegistrationAccept: {
      auto g = get("guti");
      if (!g) return std::nullopt;
      auto guti = codec::decode_guti(*g);
      if (!guti) return std::nullopt;
      return RegistrationAcceptBody{*guti};
    }
    case MessageKind::RegistrationReject: {
      auto c = get("cause");
      if (!c) return std::nullopt;
      return RegistrationRejectBody{*c};
    }
    case MessageKind::TauRequest: {
      auto g = get("guti");
      if (!g) return std::nullopt;
      auto guti = codec::decode_guti(*g);
      if (!guti) return std::nullopt;
      return TauRequestBody{*guti};
    }
    case MessageKind::TauReject: {
      auto c = get("cause");
      if (!c) return std::nullopt;
      return TauRejectBody{*c};
    }
    case MessageKind::EmergencyRequest: {
      auto s = get("identity");
      if (!s) return std::nullopt;
      auto suci = codec::decode_suci(*s);
      if (!suci) return std::nullopt;
      return EmergencyRequestBody{*suci};
    }
    case MessageKind::DowngradeCommand: {
      auto t = get("target");
      if (!t) return std::nullopt;
      return DowngradeCommandBody{*t};
    }
  }
  return std::nullopt;
} catch (const std::exception&) {
  return std::nullopt;
}

// ---- message ---------------------------------------------------------------

// Messages sent before a NAS security context exists are CLEAR (no envelope).
// The signature slot is used only in CA mode by legitimate senders.
struct ProtocolMessage {
  MessageKind kind = MessageKind::Broadcast;
  Plmn sender_claimed_plmn;
  MessageBody body = OpaqueBody{};
  std::optional<ProtectionEnvelope> envelope;
  std::optional<MessageSignature> signature;

  bool clear() const { return !envelope.has_value(); }

  // Input to the CA-mode signature: kind, claimed sender and body bytes.
  static Bytes signing_input(MessageKind kind, const Plmn& plmn, BytesView body_bytes) {
    Bytes b = to_bytes("msg:" + std::string(to_string(kind)) + ":" + plmn.render() + ":");
    append_bytes(b, body_bytes);
    return b;
  }
};

inline ProtocolMessage make_clear(MessageKind kind, const Plmn& plmn, MessageBody body) {
  ProtocolMessage m;
  m.kind = kind;
  m.sender_claimed_plmn = plmn;
  m.body = std::move(body);
  return m;
}

inline ProtocolMessage make_clear_signed(MessageKind kind, const Plmn& plmn,
                                         MessageBody body,
                                         const OperatorCredential& cred) {
  ProtocolMessage m = make_clear(kind, plmn, std::move(body));
  Bytes body_bytes = encode_body(kind, m.body);
  m.signature =
      sign_message(cred, ProtocolMessage::signing_input(kind, plmn, body_bytes));
  return m;
}

// Seals the typed body into the envelope; the carried body becomes opaque so
// receivers are forced through unprotect + decode.
inline ProtocolMessage make_protected(MessageKind kind, const Plmn& plmn,
                                      const MessageBody& body, SecurityContext& ctx,
                                      const Prf& prf = default_prf()) {
  ProtocolMessage m;
  m.kind = kind;
  m.sender_claimed_plmn = plmn;
  m.envelope = protect(encode_body(kind, body), ctx, prf);
  m.body = OpaqueBody{};
  return m;
}

// What a radio observer can read: full body when CLEAR, envelope metadata
// (and under NEA0 the payload bytes, which are the plaintext) otherwise.
inline std::string observable_view(const ProtocolMessage& m) {
  std::string out = std::string(to_string(m.kind)) +
                    " plmn=" + m.sender_claimed_plmn.render();
  if (m.clear()) {
    out += " clear body={" + to_string(BytesView(encode_body(m.kind, m.body))) + "}";
    if (m.signature) out += " signed=" + m.signature->certificate.subject;
  } else {
    out += " protected " + m.envelope->render_metadata();
    if (m.envelope->cipher_alg == CipherAlg::NEA0) {
      out += " payload={" + to_string(BytesView(m.envelope->payload)) + "}";
    }
  }
  return out;
}

}  // namespace fivegsim
