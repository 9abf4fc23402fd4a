#include <gtest/gtest.h>

#include <algorithm>

#include "omic/agent/message_bus.hpp"
#include "omic/crypto/did.hpp"
#include "omic/error.hpp"

using namespace omic;
using namespace omic::agent;

namespace {

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

// Connects invitee to inviter over the bus; returns (inviter conn, invitee conn).
std::pair<std::string, std::string> connect(MessageBus& bus, Agent& inviter, Agent& invitee,
                                            const std::string& invitee_label) {
  auto inv = inviter.create_invitation(inviter.label());
  auto [conn, env] = invitee.accept_invitation(inv, invitee_label);
  bus.post(env);
  bus.run();
  std::string inviter_conn;
  for (auto* c : inviter.list_connections()) {
    if (c->invitation_id == inv["id"]) inviter_conn = c->id;
  }
  return {inviter_conn, conn};
}

}  // namespace

TEST(Did, FreshAndDerivable) {
  crypto::Drbg rng(1);
  auto a = create_did(rng, Visibility::kPairwise);
  auto b = create_did(rng, Visibility::kPairwise);
  EXPECT_NE(a.id, b.id);
  EXPECT_EQ(a.id, crypto::did_from_verkey(a.key.verification_key()));
  EXPECT_EQ(a.id.rfind("did:omic:", 0), 0u);
}

TEST(Envelope, AuthcryptAnoncryptRoundTrip) {
  crypto::Drbg rng(2);
  auto alice = crypto::generate_keypair(rng.bytes(32));
  auto bob = crypto::generate_keypair(rng.bytes(32));
  const auto payload = crypto::to_bytes("{\"hello\":1}");

  auto e = pack_authcrypt(alice, bob.verification_key(), payload, rng);
  auto u = unpack(bob, Envelope::from_json(e.to_json()));
  EXPECT_EQ(u.payload, payload);
  ASSERT_TRUE(u.sender);
  EXPECT_EQ(*u.sender, alice.verification_key());

  auto a = pack_anoncrypt(bob.verification_key(), payload, rng);
  auto ua = unpack(bob, a);
  EXPECT_EQ(ua.payload, payload);
  EXPECT_FALSE(ua.sender);

  // Plaintext never visible on the wire.
  EXPECT_EQ(e.to_json().dump().find("hello"), std::string::npos);
}

TEST(Envelope, TamperAndMisdelivery) {
  crypto::Drbg rng(3);
  auto alice = crypto::generate_keypair(rng.bytes(32));
  auto bob = crypto::generate_keypair(rng.bytes(32));
  auto carol = crypto::generate_keypair(rng.bytes(32));
  auto e = pack_authcrypt(alice, bob.verification_key(), crypto::to_bytes("payload"), rng);

  for (std::size_t i = 0; i < e.ciphertext.size(); i += 7) {
    auto t = e;
    t.ciphertext[i] ^= 0x01;
    EXPECT_EQ(code_of([&] { unpack(bob, t); }), "auth-failed") << i;
  }
  auto high_bit = e;
  high_bit.ciphertext[31] ^= 0x80;  // same X25519 point, different bytes
  EXPECT_EQ(code_of([&] { unpack(bob, high_bit); }), "auth-failed");
  auto n = e;
  n.nonce[0] ^= 1;
  EXPECT_EQ(code_of([&] { unpack(bob, n); }), "auth-failed");
  auto m = e;
  m.mode = EnvelopeMode::kAnoncrypt;
  EXPECT_EQ(code_of([&] { unpack(bob, m); }), "auth-failed");
  EXPECT_EQ(code_of([&] { unpack(carol, e); }), "wrong-recipient");
  auto readdressed = e;
  readdressed.to = carol.verification_key().base58();
  EXPECT_EQ(code_of([&] { unpack(carol, readdressed); }), "auth-failed");
  auto truncated = e;
  truncated.ciphertext.resize(20);
  EXPECT_EQ(code_of([&] { unpack(bob, truncated); }), "malformed");
  EXPECT_EQ(code_of([] { Envelope::from_json({{"to", "x"}}); }), "malformed");
}

TEST(Connections, ThreeMessageExchange) {
  MessageBus bus;
  Agent myco("MYco", crypto::Drbg(10)), researcher("Researcher", crypto::Drbg(11)), owner("Owner", crypto::Drbg(12));
  bus.attach(myco);
  bus.attach(researcher);
  bus.attach(owner);
  auto [m1, o1] = connect(bus, myco, owner, "Owner");
  auto [r1, o2] = connect(bus, researcher, owner, "anonymous");
  ASSERT_FALSE(m1.empty());
  ASSERT_FALSE(r1.empty());
  EXPECT_EQ(owner.connection(o1).state, "complete");
  EXPECT_EQ(owner.connection(o2).state, "complete");
  EXPECT_EQ(owner.connection(o1).label, "MYco");
  EXPECT_EQ(researcher.connection(r1).label, "anonymous");

  // Four distinct pairwise DIDs, and each side sees the other's.
  std::set<std::string> dids{owner.connection(o1).my_did, owner.connection(o2).my_did, myco.connection(m1).my_did,
                             researcher.connection(r1).my_did};
  EXPECT_EQ(dids.size(), 4u);
  EXPECT_EQ(myco.connection(m1).their_did, owner.connection(o1).my_did);
  EXPECT_EQ(owner.connection(o2).their_did, researcher.connection(r1).my_did);
  EXPECT_NE(owner.connection(o1).my_key.verification_key(), owner.connection(o2).my_key.verification_key());
  EXPECT_TRUE(bus.failures().empty());
}

TEST(Connections, OneTimeInvitationReplayRejected) {
  MessageBus bus;
  Agent a("A", crypto::Drbg(20)), b("B", crypto::Drbg(21)), c("C", crypto::Drbg(22));
  bus.attach(a);
  bus.attach(b);
  bus.attach(c);
  auto inv = a.create_invitation("A");
  auto [cb, env] = b.accept_invitation(inv, "B");
  EXPECT_EQ(code_of([&] { b.accept_invitation(inv, "B"); }), "invitation-used");
  bus.post(env);
  bus.run();
  EXPECT_EQ(b.connection(cb).state, "complete");

  // A second party presenting the same one-time invitation is refused.
  auto [cc, env2] = c.accept_invitation(inv, "C");
  bus.post(env2);
  bus.run();
  EXPECT_EQ(c.connection(cc).state, "aborted");
  EXPECT_EQ(a.list_connections().size(), 1u);

  // Replaying the original request envelope changes nothing.
  bus.post(env);
  bus.run();
  EXPECT_EQ(a.list_connections().size(), 1u);
}

TEST(Connections, MismatchedConfirmationAborts) {
  MessageBus bus;
  Agent a("A", crypto::Drbg(30)), b("B", crypto::Drbg(31));
  bus.attach(a);
  bus.attach(b);
  auto inv = a.create_invitation("A");
  // Substitute the invitation key: the response is then signed by a key the
  // invitee did not expect.
  crypto::Drbg rng(99);
  auto fake = crypto::generate_keypair(rng.bytes(32));
  auto [cb, env] = b.accept_invitation(inv, "B");
  bus.post(env);
  auto& conn = const_cast<Connection&>(b.connection(cb));
  conn.invitation_key = fake.verification_key();
  bus.run();
  EXPECT_EQ(b.connection(cb).state, "aborted");
}

TEST(Dispatch, UnknownProtocolDuplicateAndHandlers) {
  MessageBus bus;
  Agent a("A", crypto::Drbg(40)), b("B", crypto::Drbg(41));
  bus.attach(a);
  bus.attach(b);
  auto [ca, cb] = connect(bus, a, b, "B");

  int calls = 0;
  b.on("echo/1.0", [&](Agent& self, const Connection& c, const Message& m, Effects& fx) {
    if (m.type == kProblemReport) return;
    ++calls;
    if (m.type == "fail") throw Error("out-of-order", "not now");
    self.send(c.id, make_reply(m, "pong", m.body, self.rng()), fx);
  });
  std::vector<std::string> a_types;
  bus.on_event([&](Agent& who, const json& ev) {
    if (&who == &a && ev["type"] == "problem-report") a_types.push_back(ev["body"]["code"]);
  });

  auto ping = make_message("echo/1.0", "ping", new_thread_id(a.rng()), {{"x", 1}}, a.rng());
  auto env = a.pack_for(ca, ping);
  bus.post(env);
  bus.post(env);  // at-least-once transport: duplicate delivery
  bus.run();
  EXPECT_EQ(calls, 1);

  bus.post(a.pack_for(ca, make_message("nope/1.0", "x", "t", json::object(), a.rng())));
  bus.post(a.pack_for(ca, make_message("echo/1.0", "fail", "t2", json::object(), a.rng())));
  bus.run();
  ASSERT_EQ(a_types.size(), 2u);
  EXPECT_EQ(a_types[0], "unsupported-protocol");
  EXPECT_EQ(a_types[1], "out-of-order");

  // A forged sender on an established connection is refused at unpack.
  crypto::Drbg rng(7);
  auto mallory = crypto::generate_keypair(rng.bytes(32));
  auto forged = pack_authcrypt(mallory, b.connection(cb).my_key.verification_key(),
                               crypto::as_bytes(make_message("echo/1.0", "ping", "t3", json::object(), rng).canonical()),
                               rng);
  EXPECT_EQ(code_of([&] { b.dispatch(forged); }), "auth-failed");
}

TEST(Wallet, SaveLoadAndWrongPassphrase) {
  MessageBus bus;
  Agent a("A", crypto::Drbg(50)), b("B", crypto::Drbg(51));
  bus.attach(a);
  bus.attach(b);
  connect(bus, a, b, "B");
  b.wallet().credentials["c1"] = {{"values", {{"sample_id", "SMP-SENTINEL-42"}}}};
  crypto::Drbg rng(5);
  auto sealed = wallet_save(b.wallet(), "correct horse", rng);
  EXPECT_EQ(crypto::to_string(crypto::ByteView(sealed).first(11)), "OMICWALLET1");
  const auto text = crypto::to_string(sealed);
  EXPECT_EQ(text.find("SMP-SENTINEL-42"), std::string::npos);
  EXPECT_EQ(text.find(b.list_connections()[0]->my_did), std::string::npos);

  auto back = wallet_load(sealed, "correct horse");
  EXPECT_EQ(back, b.wallet());
  EXPECT_EQ(code_of([&] { wallet_load(sealed, "wrong"); }), "auth-failed");
  auto corrupt = sealed;
  corrupt.back() ^= 1;
  EXPECT_EQ(code_of([&] { wallet_load(corrupt, "correct horse"); }), "auth-failed");
  auto bad_magic = sealed;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of([&] { wallet_load(bad_magic, "correct horse"); }), "bad-wallet");
  EXPECT_EQ(code_of([&] { wallet_load(crypto::Bytes(10, 0), "x"); }), "bad-wallet");
}
