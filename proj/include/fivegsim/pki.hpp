#pragma once

#include <map>
#include <optional>
#include <string>

#include "fivegsim/common.hpp"
#include "fivegsim/modgroup.hpp"
#include "fivegsim/prf.hpp"

namespace fivegsim {

// Certificate binding an operator PLMN to a verification key, issued by a
// global root. The chain is one level deep; revocation is out of scope.
struct Certificate {
  std::string subject;          // rendered PLMN of the operator
  uint64_t subject_key = 0;     // operator verification key
  std::string issuer;           // root name
  modgroup::Signature issuer_sig;

  Bytes tbs_bytes() const {
    Bytes b = to_bytes("cert:" + issuer + ":" + subject + ":");
    append_u64(b, subject_key);
    return b;
  }
};

struct SigningAuthority {
  std::string name;
  uint64_t private_key = 0;
  uint64_t public_key = 0;

  static SigningAuthority generate(std::string name, Rng& rng) {
    SigningAuthority a;
    a.name = std::move(name);
    a.private_key = modgroup::random_secret(rng);
    a.public_key = modgroup::public_of(a.private_key);
    return a;
  }

  Certificate issue(const std::string& subject, uint64_t subject_key) const {
    Certificate cert;
    cert.subject = subject;
    cert.subject_key = subject_key;
    cert.issuer = name;
    cert.issuer_sig = modgroup::sign(private_key, cert.tbs_bytes());
    return cert;
  }
};

// Credentials a legitimate operator uses to sign pre-authentication messages
// in CA mode. The attacker never holds one of these.
struct OperatorCredential {
  uint64_t private_key = 0;
  Certificate certificate;

  static OperatorCredential issue_for(const std::string& plmn,
                                      const SigningAuthority& root, Rng& rng) {
    OperatorCredential cred;
    cred.private_key = modgroup::random_secret(rng);
    cred.certificate = root.issue(plmn, modgroup::public_of(cred.private_key));
    return cred;
  }
};

// Signature attached to a message, self-contained: carries the certificate so
// the verifier only needs the root.
struct MessageSignature {
  Certificate certificate;
  modgroup::Signature sig;
};

struct TrustStore {
  std::map<std::string, uint64_t> roots;  // issuer name -> root key

  void add_root(const SigningAuthority& root) { roots[root.name] = root.public_key; }
  bool empty() const { return roots.empty(); }
};

inline MessageSignature sign_message(const OperatorCredential& cred, BytesView msg) {
  return MessageSignature{cred.certificate, modgroup::sign(cred.private_key, msg)};
}

enum class SignatureVerdict : uint8_t { Verified, Unverifiable, Invalid };

inline std::string_view to_string(SignatureVerdict v) {
  switch (v) {
    case SignatureVerdict::Verified: return "verified";
    case SignatureVerdict::Unverifiable: return "unverifiable";
    case SignatureVerdict::Invalid: return "invalid";
  }
  return "invalid";
}

// Chain check: certificate under a trusted root, then the message signature
// under the certificate key, and the certificate subject must match the
// claimed sender. `claimed_sender` is the rendered PLMN from the message.
inline SignatureVerdict verify_message_signature(
    const std::optional<MessageSignature>& signature, BytesView msg,
    const std::string& claimed_sender, const TrustStore& trust) {
  if (trust.empty()) return SignatureVerdict::Unverifiable;
  if (!signature) return SignatureVerdict::Invalid;
  auto root = trust.roots.find(signature->certificate.issuer);
  if (root == trust.roots.end()) return SignatureVerdict::Invalid;
  if (signature->certificate.subject != claimed_sender)
    return SignatureVerdict::Invalid;
  if (!modgroup::verify(root->second, signature->certificate.tbs_bytes(),
                        signature->certificate.issuer_sig))
    return SignatureVerdict::Invalid;
  if (!modgroup::verify(signature->certificate.subject_key, msg, signature->sig))
    return SignatureVerdict::Invalid;
  return SignatureVerdict::Verified;
}

}  // namespace fivegsim
