#include "fivegsim/pki.hpp"

#include <gtest/gtest.h>

#include "fivegsim/messages.hpp"

namespace fivegsim {
namespace {

struct PkiFixture {
  Rng rng{21};
  SigningAuthority root = SigningAuthority::generate("fiveg-root-ca", rng);
  OperatorCredential home = OperatorCredential::issue_for("001-01", root, rng);
  TrustStore trust;

  PkiFixture() { trust.add_root(root); }
};

TEST(Pki, LegitimateCertificateVerifies) {
  PkiFixture f;
  Bytes msg = to_bytes("broadcast priority=10");
  MessageSignature sig = sign_message(f.home, msg);
  EXPECT_EQ(verify_message_signature(sig, msg, "001-01", f.trust),
            SignatureVerdict::Verified);
}

TEST(Pki, UnsignedIsInvalidUnderCaMode) {
  PkiFixture f;
  EXPECT_EQ(verify_message_signature(std::nullopt, to_bytes("x"), "001-01", f.trust),
            SignatureVerdict::Invalid);
}

TEST(Pki, EmptyTrustStoreMeansUnverifiable) {
  PkiFixture f;
  TrustStore empty;
  MessageSignature sig = sign_message(f.home, to_bytes("x"));
  EXPECT_EQ(verify_message_signature(sig, to_bytes("x"), "001-01", empty),
            SignatureVerdict::Unverifiable);
}

TEST(Pki, UntrustedRootRejected) {
  PkiFixture f;
  Rng rng(33);
  SigningAuthority rogue_root = SigningAuthority::generate("rogue-ca", rng);
  OperatorCredential rogue = OperatorCredential::issue_for("001-01", rogue_root, rng);
  Bytes msg = to_bytes("reject");
  MessageSignature sig = sign_message(rogue, msg);
  EXPECT_EQ(verify_message_signature(sig, msg, "001-01", f.trust),
            SignatureVerdict::Invalid);
}

TEST(Pki, SubjectMustMatchClaimedSender) {
  PkiFixture f;
  Bytes msg = to_bytes("downgrade");
  MessageSignature sig = sign_message(f.home, msg);
  // A real certificate for 001-01 cannot authenticate a message claiming 999-99.
  EXPECT_EQ(verify_message_signature(sig, msg, "999-99", f.trust),
            SignatureVerdict::Invalid);
}

TEST(Pki, SignatureCopiedOntoDifferentMessageRejected) {
  PkiFixture f;
  MessageSignature sig = sign_message(f.home, to_bytes("original"));
  EXPECT_EQ(verify_message_signature(sig, to_bytes("forged"), "001-01", f.trust),
            SignatureVerdict::Invalid);
}

TEST(Pki, TamperedCertificateRejected) {
  PkiFixture f;
  Bytes msg = to_bytes("m");
  MessageSignature sig = sign_message(f.home, msg);
  sig.certificate.subject_key ^= 1;
  EXPECT_EQ(verify_message_signature(sig, msg, "001-01", f.trust),
            SignatureVerdict::Invalid);
}

// The message-level wrapper: kind and claimed PLMN are part of the signed
// input, so a signature cannot be moved across kinds or claimed senders.
TEST(Pki, MessageSignatureBindsKindAndPlmn) {
  PkiFixture f;
  Plmn plmn{"001", "01"};
  ProtocolMessage reject = make_clear_signed(MessageKind::RegistrationReject, plmn,
                                             RegistrationRejectBody{"permanent"},
                                             f.home);
  // Verifies as-is.
  Bytes body_bytes = encode_body(reject.kind, reject.body);
  EXPECT_EQ(verify_message_signature(
                reject.signature,
                ProtocolMessage::signing_input(reject.kind, plmn, body_bytes),
                plmn.render(), f.trust),
            SignatureVerdict::Verified);
  // Moving the signature to another kind with the same body bytes fails.
  EXPECT_EQ(verify_message_signature(
                reject.signature,
                ProtocolMessage::signing_input(MessageKind::TauReject, plmn, body_bytes),
                plmn.render(), f.trust),
            SignatureVerdict::Invalid);
}

}  // namespace
}  // namespace fivegsim
