#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <thread>

#include "omic/crypto/did.hpp"
#include "omic/error.hpp"
#include "omic/ledger/block_log.hpp"
#include "omic/ledger/builders.hpp"
#include "omic/ledger/simnet.hpp"
#include "omic/ledger/network_node.hpp"
#include "omic/ledger/socket_transport.hpp"

using namespace omic;
using namespace omic::ledger;

namespace {

struct Fixture {
  crypto::Drbg rng{crypto::Drbg(100)};
  crypto::KeyPair issuer = crypto::generate_keypair(crypto::Drbg(1).bytes(32));
  crypto::KeyPair other = crypto::generate_keypair(crypto::Drbg(2).bytes(32));
  std::string issuer_did = crypto::did_from_verkey(issuer.verification_key());

  std::vector<AttributeSpec> attrs() const {
    return {{"sample_id", "string", 0, 0}, {"ldl", "int", 1, 100}};
  }
};

LedgerState apply_all(LedgerState s, const std::vector<Transaction>& txs) {
  std::int64_t h = s.height() + 1;
  for (const auto& tx : txs) {
    auto r = s.validate(tx);
    EXPECT_FALSE(r) << r->code << ": " << r->detail;
    s.apply(tx, h);
  }
  return s;
}

}  // namespace

TEST(Transaction, JsonRoundTripAndDigest) {
  Fixture f;
  auto tx = make_nym(f.issuer, "issuer", f.rng);
  auto back = Transaction::from_json(tx.to_json());
  EXPECT_EQ(back.digest(), tx.digest());
  EXPECT_EQ(back.signing_bytes(), tx.signing_bytes());
  auto j = tx.to_json();
  j["kind"] = "ADVERT";
  EXPECT_EQ(validate_transaction(j, LedgerState{})->code, "unknown-kind");
  EXPECT_EQ(validate_transaction(json::parse("{\"x\":1}"), LedgerState{})->code, "malformed");
}

TEST(State, ValidationRules) {
  Fixture f;
  LedgerState s;
  auto nym = make_nym(f.issuer, "issuer", f.rng);
  EXPECT_FALSE(s.validate(nym));
  s = apply_all(s, {nym});
  EXPECT_EQ(s.validate(make_nym(f.issuer, "issuer", f.rng))->code, "duplicate");
  EXPECT_EQ(s.validate(nym)->code, "replayed-nonce");

  auto schema = make_schema(f.issuer, "biomarkers", "1.0", f.attrs(), f.rng);
  EXPECT_FALSE(s.validate(schema));

  // Same schema signed by a key that is not the registered NYM key.
  auto forged = schema;
  forged.author_signature = f.other.sign(crypto::as_bytes(forged.signing_bytes()));
  EXPECT_EQ(s.validate(forged)->code, "bad-signature");

  // An attribute value smuggled into a schema payload.
  auto j = schema.payload;
  j["ldl_value"] = "3.1";
  auto smuggled = make_transaction(TxKind::kSchema, f.issuer_did, j, f.rng.bytes(16), f.issuer);
  EXPECT_EQ(s.validate(smuggled)->code, "disallowed-field");

  s = apply_all(s, {schema});
  EXPECT_EQ(s.validate(make_schema(f.issuer, "biomarkers", "1.0", f.attrs(), f.rng))->code, "duplicate");

  EXPECT_EQ(s.validate(make_revoc_entry(f.issuer, "nope", {crypto::hash("h")}, f.rng))->code, "unknown-registry");

  // NYM for another DID with a conflicting key cannot be expressed: the DID
  // derives from the key. A NYM authored for someone else is refused.
  auto foreign = make_nym(f.other, "researcher", f.rng);
  foreign.author_did = f.issuer_did;
  foreign.author_signature = f.issuer.sign(crypto::as_bytes(foreign.signing_bytes()));
  EXPECT_EQ(s.validate(foreign)->code, "not-owner");
}

TEST(State, QueriesAndRevocationMonotone) {
  Fixture f;
  LedgerState s;
  auto nym = make_nym(f.issuer, "issuer", f.rng);
  auto schema = make_schema(f.issuer, "bio", "1", f.attrs(), f.rng);
  s = apply_all(s, {nym, schema});
  const auto* rec = s.schema(f.issuer_did + ":bio:1");
  ASSERT_TRUE(rec);
  auto cd = make_cred_def(f.issuer, "default", *rec, f.rng);
  s = apply_all(s, {cd});
  const auto cd_id = cd.payload["id"].get<std::string>();
  const auto reg_id = registry_id_for(cd_id);
  s = apply_all(s, {make_revoc_reg_def(f.issuer, cd_id, reg_id, f.rng)});
  s.set_tip(3, crypto::Digest32{});

  auto q = s.query(NymKey{f.issuer_did});
  ASSERT_TRUE(q.found);
  EXPECT_EQ(q.entry["verkey"], f.issuer.verification_key().base58());
  EXPECT_FALSE(s.query(NymKey{"did:omic:none"}).found);

  const auto h = crypto::hash("handle");
  EXPECT_FALSE(s.is_revoked(reg_id, h, 3));
  EXPECT_THROW(s.query(RevokedKey{"unknown", h}), Error);
  s.apply(make_revoc_entry(f.issuer, reg_id, {h}, f.rng), 4);
  s.set_tip(4, crypto::Digest32{});
  EXPECT_FALSE(s.is_revoked(reg_id, h, 3));
  EXPECT_TRUE(s.is_revoked(reg_id, h, 4));
  EXPECT_TRUE(s.is_revoked(reg_id, h, 10));
  EXPECT_TRUE(s.query(RevokedKey{reg_id, h}).entry["revoked"].get<bool>());
  EXPECT_FALSE(s.query(RevokedKey{reg_id, h}, 3).entry["revoked"].get<bool>());
}

TEST(Bft, HealthyNetworkCommitsInFirstView) {
  SimNet net({.seed = 5});
  Fixture f;
  const auto view_before = net.reference().view();
  auto receipt = net.submit_and_wait(make_nym(f.issuer, "issuer", f.rng));
  EXPECT_EQ(receipt.height, 1);
  EXPECT_EQ(net.reference().commit_views()[1], view_before);
  net.run_for(100);
  for (std::size_t i = 0; i < net.size(); ++i) EXPECT_GE(net.node(i).chain().size(), 2u);
  EXPECT_TRUE(net.chains_consistent());
  EXPECT_TRUE(net.reference().state().nym(f.issuer_did));
}

TEST(Bft, OneCrashedFollowerStillCommits) {
  SimNet net({.seed = 6});
  net.crash(3);
  Fixture f;
  auto receipt = net.submit_and_wait(make_nym(f.issuer, "issuer", f.rng));
  EXPECT_EQ(receipt.height, 1);
  EXPECT_EQ(net.reference().commit_views()[1], 0);
}

TEST(Bft, CrashedLeaderCommitsAfterOneViewChange) {
  SimNet net({.seed = 7});
  net.crash(0);  // leader of view 0
  Fixture f;
  auto receipt = net.submit_and_wait(make_nym(f.issuer, "issuer", f.rng), 20000);
  EXPECT_EQ(net.reference().commit_views()[receipt.height], 1);
  EXPECT_TRUE(net.chains_consistent());
}

TEST(Bft, InvalidAndDuplicateSubmissions) {
  SimNet net({.seed = 8});
  Fixture f;
  auto tx = make_nym(f.issuer, "issuer", f.rng);
  auto bad = tx;
  bad.author_signature = f.other.sign(crypto::as_bytes(bad.signing_bytes()));
  auto rej = net.submit(bad);
  ASSERT_TRUE(rej);
  EXPECT_EQ(rej->code, "bad-signature");
  EXPECT_FALSE(net.submit(tx));
  auto dup = net.submit(tx);
  ASSERT_TRUE(dup);
  EXPECT_EQ(dup->code, "duplicate-submission");
  net.run_for(2000);
  int count = 0;
  for (const auto& b : net.reference().chain()) {
    for (const auto& t : b.txs) {
      EXPECT_NE(t.digest(), bad.digest());
      count += t.digest() == tx.digest();
    }
  }
  EXPECT_EQ(count, 1);
}

TEST(Bft, RandomSchedulesStaySafe) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimNet net({.seed = seed});
    crypto::Drbg rng(seed);
    if (seed % 2) net.crash(rng.uniform(4));
    std::vector<crypto::Digest32> digests;
    for (int i = 0; i < 3; ++i) {
      auto key = crypto::generate_keypair(rng.bytes(32));
      auto tx = make_nym(key, "researcher", rng);
      digests.push_back(tx.digest());
      ASSERT_FALSE(net.submit(tx));
      net.run_for(static_cast<std::int64_t>(rng.uniform(50)));
    }
    ASSERT_TRUE(net.run_until([&] {
      for (auto& d : digests) if (!net.find_committed(d)) return false;
      return true;
    }, 50000)) << seed;
    ASSERT_TRUE(net.chains_consistent()) << seed;
  }
}

TEST(BlockLog, VerifyTamperTruncateReplay) {
  SimNet net({.seed = 9});
  Fixture f;
  net.submit_and_wait(make_nym(f.issuer, "issuer", f.rng));
  auto schema = make_schema(f.issuer, "bio", "1", f.attrs(), f.rng);
  net.submit_and_wait(schema);
  net.submit_and_wait(make_nym(f.other, "researcher", f.rng));
  const auto chain = net.reference().chain();
  ASSERT_GE(chain.size(), 4u);

  auto ok = verify_chain(chain);
  EXPECT_TRUE(ok.ok) << ok.failure;

  std::vector<std::string> lines;
  for (const auto& b : chain) lines.push_back(block_log_line(b));
  EXPECT_TRUE(verify_chain_lines(lines).ok);

  auto truncated = lines;
  truncated.pop_back();
  EXPECT_TRUE(verify_chain_lines(truncated).ok);

  // Flip one byte of block 2's transaction payload.
  auto tampered = lines;
  auto j = json::parse(tampered[2]);
  auto name = j["txs"][0]["payload"]["name"].get<std::string>();
  name[0] ^= 1;
  j["txs"][0]["payload"]["name"] = name;
  tampered[2] = canonical(j);
  auto bad = verify_chain_lines(tampered);
  EXPECT_FALSE(bad.ok);
  EXPECT_FALSE(bad.failure.empty());

  EXPECT_EQ(replay(chain).digest(), net.reference().state().digest());
  EXPECT_EQ(replay(chain).to_json().dump(), replay(chain).to_json().dump());

  auto dir = std::filesystem::temp_directory_path() / "omic_blocklog_test";
  std::filesystem::create_directories(dir);
  write_block_log(dir / "blocks.jsonl", chain);
  EXPECT_TRUE(verify_chain_lines(read_lines(dir / "blocks.jsonl")).ok);
  write_genesis_file(dir / "genesis.jsonl", net.genesis_config());
  auto g = read_genesis_file(dir / "genesis.jsonl");
  EXPECT_EQ(make_genesis_block(g).hash(), net.genesis().hash());
  std::filesystem::remove_all(dir);
}

TEST(BlockLog, WrongPrevHashRejected) {
  SimNet net({.seed = 10});
  Fixture f;
  net.submit_and_wait(make_nym(f.issuer, "issuer", f.rng));
  auto chain = net.reference().chain();
  chain[1].prev_hash.bytes[0] ^= 1;
  EXPECT_THROW(apply_block(apply_block(LedgerState{}, chain[0], chain[0].validators), chain[1], chain[0].validators),
               Error);
  EXPECT_FALSE(verify_chain(chain).ok);
}

TEST(BlockLog, GenesisFieldsAreCommitted) {
  SimNet net({.seed = 12});
  Fixture f;
  net.submit_and_wait(make_nym(f.issuer, "issuer", f.rng));
  const auto chain = net.reference().chain();
  auto address = chain;
  address[0].validators[0].address = "10.0.0.1:1";
  EXPECT_NE(address[0].hash(), chain[0].hash());
  EXPECT_FALSE(verify_chain(address).ok);
  auto signed_genesis = chain;
  signed_genesis[0].proposer_signature.bytes[5] = 0xb0;
  EXPECT_FALSE(verify_chain(signed_genesis).ok);
  auto extra = chain;
  extra[1].validators = chain[0].validators;
  EXPECT_FALSE(verify_chain(extra).ok);
}

TEST(SocketTransport, FramesRoundTrip) {
  crypto::Bytes buf = encode_frame({{"a", 1}});
  auto second = encode_frame({{"b", 2}});
  buf.insert(buf.end(), second.begin(), second.end());
  auto partial = crypto::Bytes(buf.begin(), buf.begin() + 3);
  EXPECT_FALSE(decode_frame(partial));
  EXPECT_EQ((*decode_frame(buf))["a"], 1);
  EXPECT_EQ((*decode_frame(buf))["b"], 2);
  EXPECT_TRUE(buf.empty());

  FrameListener listener("127.0.0.1", 0);
  std::thread server([&] {
    auto conn = listener.accept();
    while (auto msg = conn.receive()) {
      (*msg)["echo"] = true;
      conn.send(*msg);
    }
  });
  {
    auto client = FrameSocket::connect("127.0.0.1", listener.port());
    client.send({{"phase", "PREPARE"}});
    auto reply = client.receive();
    ASSERT_TRUE(reply);
    EXPECT_EQ((*reply)["phase"], "PREPARE");
    EXPECT_TRUE((*reply)["echo"].get<bool>());
  }
  server.join();
}

TEST(NetworkNode, FourNodesOverSockets) {
  Fixture f;
  const auto keys = SimNet::validator_keys(9, 4);
  GenesisConfig g;
  for (std::size_t i = 0; i < 4; ++i) g.validators.push_back({"node-" + std::to_string(i), keys[i].verification_key(), ""});
  g.nyms.push_back(make_nym(f.issuer, "issuer", f.rng));
  const auto dir = std::filesystem::temp_directory_path() / "omic-netnode";
  std::filesystem::create_directories(dir);
  std::vector<std::unique_ptr<NetworkNode>> nodes;
  for (std::size_t i = 0; i < 4; ++i) {
    NodeOptions o;
    o.genesis = g;
    o.self_id = g.validators[i].id;
    o.key = keys[i];
    o.block_log = dir / (o.self_id + ".jsonl");
    nodes.push_back(std::make_unique<NetworkNode>(o));
  }
  for (auto& n : nodes) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (g.validators[j].id != n->status()["id"]) n->set_peer(g.validators[j].id, "127.0.0.1:" + std::to_string(nodes[j]->port()));
    }
  }
  for (auto& n : nodes) n->start();

  const auto tx = make_schema(f.issuer, "panel", "1.0", f.attrs(), f.rng);
  const auto reply = node_request("127.0.0.1:" + std::to_string(nodes[2]->port()), {{"kind", "submit"}, {"tx", tx.to_json()}});
  EXPECT_TRUE(reply["ok"].get<bool>()) << reply.dump();
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(20);
  auto all_committed = [&] {
    for (auto& n : nodes) {
      if (n->status()["height"].get<std::int64_t>() < 1) return false;
    }
    return true;
  };
  while (!all_committed() && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_TRUE(all_committed());
  for (auto& n : nodes) n->stop();
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(nodes[i]->chain()[1].hash(), nodes[0]->chain()[1].hash());
  const auto v = verify_chain_lines(read_lines(dir / "node-1.jsonl"));
  EXPECT_TRUE(v.ok) << v.failure;
  EXPECT_GE(v.verified_height, 1);
  EXPECT_THROW(node_request("127.0.0.1:1", {{"kind", "status"}}), Error);
}
