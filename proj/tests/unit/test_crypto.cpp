#include <gtest/gtest.h>
#include <sodium.h>

#include <algorithm>
#include <set>

#include "omic/crypto/commitment.hpp"
#include "omic/crypto/did.hpp"
#include "omic/crypto/drbg.hpp"
#include "omic/crypto/hash_chain.hpp"
#include "omic/crypto/merkle.hpp"
#include "omic/crypto/secret_sharing.hpp"
#include "omic/crypto/signature.hpp"
#include "omic/error.hpp"

using namespace omic::crypto;

namespace {

// Reference SHA-256 straight from libsodium, bypassing the wrappers.
Digest32 ref_sha(const Bytes& b) {
  Digest32 d;
  crypto_hash_sha256(d.bytes.data(), b.data(), b.size());
  return d;
}

Bytes cat(std::string_view tag, std::initializer_list<ByteView> parts) {
  Bytes out = to_bytes(tag);
  for (auto p : parts) append(out, p);
  return out;
}

// Recursive reference tree with the same duplicate-last rule.
Digest32 ref_root(std::vector<Digest32> level) {
  for (auto& l : level) l = ref_sha(cat("leaf", {l.view()}));
  while (level.size() > 1) {
    if (level.size() % 2) level.push_back(level.back());
    std::vector<Digest32> up;
    for (std::size_t i = 0; i < level.size(); i += 2) up.push_back(ref_sha(cat("node", {level[i].view(), level[i + 1].view()})));
    level = up;
  }
  return level[0];
}

std::string code_of(auto&& fn) {
  try {
    fn();
  } catch (const omic::Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST(Hash, EmptyStringVector) {
  EXPECT_EQ(hash(std::string_view{}).hex(), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Hash, DistinctInputs) { EXPECT_NE(hash("a"), hash("b")); }

TEST(Hash, IterateMatchesLoop) {
  EXPECT_EQ(hash_iterate(Digest32{}, 3).hex(), "12771355e46cd47c71ed1721fd5319b383cca3a1f9fce3aa1c8cd3bd37af20d7");
  EXPECT_EQ(hash_iterate(hash("x"), 0), hash("x"));
}

TEST(Bytes, HexAndBase58) {
  EXPECT_EQ(to_base58(Bytes{0, 1, 255}), "19p");
  EXPECT_EQ(from_base58("19p"), (Bytes{0, 1, 255}));
  EXPECT_EQ(code_of([] { from_hex("abc"); }), "bad-hex");
  EXPECT_EQ(code_of([] { from_hex("zz"); }), "bad-hex");
  Bytes b{1, 2, 3, 250};
  EXPECT_EQ(from_base64(to_base64(b)), b);
  EXPECT_EQ(code_of([] { from_base64("@@@"); }), "bad-base64");
}

TEST(Drbg, DeterministicAndForked) {
  Drbg a(42), b(42), c(43);
  EXPECT_EQ(a.bytes(48), b.bytes(48));
  EXPECT_NE(Drbg(42).bytes(32), c.bytes(32));
  EXPECT_EQ(Drbg(1).fork("x").bytes(8), Drbg(1).fork("x").bytes(8));
  EXPECT_NE(Drbg(1).fork("x").bytes(8), Drbg(1).fork("y").bytes(8));
  Drbg u(5);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(u.uniform(7), 7u);
}

TEST(Signature, GoldenVector) {
  auto kp = generate_keypair(Bytes(32, 7));
  EXPECT_EQ(kp.verification_key().hex(), "ea4a6c63e29c520abef5507b132ec5f9954776aebebe7b92421eea691446d22c");
  EXPECT_EQ(kp.sign(as_bytes("hello")).hex(),
            "359a315920d9541c3cc2a1dd1839f3e40bf23358a1d93a6ebd8303c0310ceb50"
            "25e679222ab016b4d822c5001e787e00c0ceaa6ac3c6e80248a944bd47104f0c");
  EXPECT_EQ(did_from_verkey(kp.verification_key()), "did:omic:YRnUPQKjsKV4MGFkmxCzGu");
}

TEST(Signature, DeterministicKeys) {
  EXPECT_EQ(generate_keypair(Bytes(32, 1)).verification_key(), generate_keypair(Bytes(32, 1)).verification_key());
  EXPECT_NE(generate_keypair(Bytes(32, 1)).verification_key(), generate_keypair(Bytes(32, 2)).verification_key());
  EXPECT_EQ(code_of([] { generate_keypair(Bytes(31, 0)); }), "bad-seed-length");
}

TEST(Signature, RoundTripAndBitFlips) {
  Drbg rng(2024);
  auto other = generate_keypair(rng.bytes(32));
  for (int i = 0; i < 1000; ++i) {
    auto kp = generate_keypair(rng.bytes(32));
    auto msg = rng.bytes(1 + rng.uniform(64));
    auto sig = kp.sign(msg);
    ASSERT_TRUE(verify(kp.verification_key(), msg, sig));
    ASSERT_EQ(sig, kp.sign(msg));
    ASSERT_FALSE(verify(other.verification_key(), msg, sig));

    auto bad_msg = msg;
    const auto bit = rng.uniform(bad_msg.size() * 8);
    bad_msg[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ASSERT_FALSE(verify(kp.verification_key(), bad_msg, sig));

    auto bad_sig = sig;
    const auto sbit = rng.uniform(512);
    bad_sig.bytes[sbit / 8] ^= static_cast<std::uint8_t>(1u << (sbit % 8));
    ASSERT_FALSE(verify(kp.verification_key(), msg, bad_sig));
  }
}

TEST(Signature, MalformedKeyNeverThrows) {
  VerificationKey junk;
  junk.bytes.fill(0xff);
  Signature s;
  EXPECT_FALSE(verify(junk, as_bytes("m"), s));
  EXPECT_EQ(code_of([] { Signature::from_hex("00"); }), "bad-signature-encoding");
}

TEST(Commitment, GoldenAndHiding) {
  Salt s;
  for (int i = 0; i < 16; ++i) s[i] = static_cast<std::uint8_t>(i);
  auto c = commit_attribute("ldl", "3.1", s);
  EXPECT_EQ(c.digest.hex(), "2cb48d1b89e943d9606e5a80eaa0f182746800fbb90c1b61d7d91ea457c9456b");
  EXPECT_TRUE(open_matches(c, "3.1", s));
  auto s2 = s;
  s2[0] ^= 1;
  EXPECT_NE(commit_attribute("ldl", "3.1", s2).digest, c.digest);
  EXPECT_FALSE(open_matches(c, "3.1", s2));
  EXPECT_EQ(code_of([&] { commit_attribute("", "1", s); }), "empty-attr-name");
}

TEST(Commitment, BindingOverRandomFixtures) {
  Drbg rng(9);
  for (int i = 0; i < 200; ++i) {
    Salt s;
    auto b = rng.bytes(16);
    std::copy(b.begin(), b.end(), s.begin());
    const auto value = to_hex(rng.bytes(4));
    auto c = commit_attribute("attr", value, s);
    ASSERT_FALSE(open_matches(c, value + "0", s));
    ASSERT_FALSE(open_matches(c, value.substr(1), s));
    Salt s2;
    auto b2 = rng.bytes(16);
    std::copy(b2.begin(), b2.end(), s2.begin());
    ASSERT_NE(commit_attribute("attr", value, s2).digest, c.digest);
  }
}

TEST(Merkle, GoldenRoots) {
  std::vector<Digest32> two{hash("a"), hash("b")};
  EXPECT_EQ(merkle_root(two).hex(), "a178df93b63c3e3695bb7de2a5e762f6e20bd7e39ce95ae831a91c90f02d2f95");
  std::vector<Digest32> three{hash("a"), hash("b"), hash("c")};
  EXPECT_EQ(merkle_root(three).hex(), "8dd8f4d329c53ac8f2910f403bf57763a84029f58917ba42405835daa47e5334");
  std::vector<Digest32> one{hash("a")};
  EXPECT_EQ(merkle_root(one), ref_sha(cat("leaf", {hash("a").view()})));
  EXPECT_EQ(code_of([] { merkle_root({}); }), "empty-tree");
  EXPECT_EQ(code_of([&] { merkle_prove(two, 2); }), "index-out-of-range");
}

TEST(Merkle, CompletenessAndCrossIndex) {
  Drbg rng(77);
  for (std::size_t n = 1; n <= 64; ++n) {
    std::vector<Digest32> leaves;
    for (std::size_t i = 0; i < n; ++i) leaves.push_back(rng.digest());
    const auto root = merkle_root(leaves);
    ASSERT_EQ(root, ref_root(leaves)) << n;
    std::size_t depth = 0;
    while ((std::size_t{1} << depth) < n) ++depth;
    for (std::size_t i = 0; i < n; ++i) {
      auto path = merkle_prove(leaves, i);
      ASSERT_EQ(path.siblings.size(), depth);
      ASSERT_TRUE(merkle_verify(root, leaves[i], path));
      for (std::size_t j = 0; j < n; ++j) {
        if (leaves[j] != leaves[i]) ASSERT_FALSE(merkle_verify(root, leaves[j], path));
      }
      if (n > 1) {
        auto shifted = path;
        shifted.leaf_index = (i + 1) % n;
        if (leaves[shifted.leaf_index] != leaves[i]) ASSERT_FALSE(merkle_verify(root, leaves[i], shifted)) << n << " " << i;
        auto tampered = path;
        tampered.siblings[rng.uniform(depth)].digest.bytes[0] ^= 1;
        ASSERT_FALSE(merkle_verify(root, leaves[i], tampered));
      }
    }
  }
}

TEST(Merkle, PermutationChangesRoot) {
  std::vector<Digest32> l{hash("1"), hash("2"), hash("3"), hash("4")};
  auto r = merkle_root(l);
  std::swap(l[0], l[3]);
  EXPECT_NE(merkle_root(l), r);
}

TEST(HashChain, Boundaries) {
  const auto seed = hash("seed");
  auto full = chain_issue(seed, "x", 3, 3);
  EXPECT_EQ(full.holder_token, seed);
  EXPECT_EQ(full.anchor.anchor, hash_iterate(seed, 3));
  auto zero = chain_issue(seed, "x", 0, 3);
  EXPECT_EQ(zero.holder_token, zero.anchor.anchor);
  auto two = chain_issue(seed, "x", 2, 3);
  EXPECT_EQ(hash_iterate(two.holder_token, 2), two.anchor.anchor);
  EXPECT_EQ(code_of([&] { chain_issue(seed, "x", 4, 3); }), "out-of-range");
  EXPECT_EQ(code_of([&] { chain_issue(seed, "x", -1, 3); }), "out-of-range");
  EXPECT_EQ(code_of([&] { chain_issue(seed, "x", 0, kMaxChainLength + 1); }), "out-of-range");
  EXPECT_EQ(code_of([&] { threshold_prove(two.holder_token, 2, 3); }), "cannot-satisfy");
  EXPECT_EQ(threshold_prove(two.holder_token, 2, 0), two.anchor.anchor);
  EXPECT_FALSE(threshold_verify(two.anchor, 4, two.holder_token));
  EXPECT_FALSE(threshold_verify(two.anchor, 1, hash("random")));
}

TEST(HashChain, ExhaustiveGridMatchesPredicate) {
  const auto seed = hash("grid");
  for (std::int64_t vmax = 0; vmax <= 16; ++vmax) {
    for (std::int64_t v = 0; v <= vmax; ++v) {
      auto issued = chain_issue(seed, "a", v, vmax);
      for (std::int64_t t = 0; t <= vmax; ++t) {
        const bool oracle = v >= t;
        bool got;
        if (v >= t) {
          got = threshold_verify(issued.anchor, t, threshold_prove(issued.holder_token, v, t));
        } else {
          // The strongest thing a holder can present is its own token; it
          // must not pass a threshold above the true value.
          got = threshold_verify(issued.anchor, t, issued.holder_token);
        }
        ASSERT_EQ(got, oracle) << vmax << " " << v << " " << t;
      }
    }
  }
}

TEST(Gf256, KnownProductsAndInverses) {
  EXPECT_EQ(gf256::mul(0x53, 0xca), 0x01);
  EXPECT_EQ(gf256::mul(0x57, 0x83), 0xc1);
  for (int a = 1; a < 256; ++a) ASSERT_EQ(gf256::mul(static_cast<std::uint8_t>(a), gf256::inv(static_cast<std::uint8_t>(a))), 1);
}

TEST(SecretSharing, EverySubsetReconstructs) {
  Drbg rng(31);
  const auto secret = rng.bytes(32);
  for (int n = 1; n <= 6; ++n) {
    for (int k = 1; k <= n; ++k) {
      auto shares = share_split(secret, k, n, rng);
      ASSERT_EQ(shares.size(), static_cast<std::size_t>(n));
      for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<SecretShare> subset;
        for (int i = 0; i < n; ++i) {
          if (mask & (1u << i)) subset.push_back(shares[i]);
        }
        if (static_cast<int>(subset.size()) >= k) {
          ASSERT_EQ(share_combine(subset), secret);
        } else {
          ASSERT_EQ(code_of([&] { share_combine(subset); }), "insufficient-shares");
        }
      }
    }
  }
}

TEST(SecretSharing, Errors) {
  Drbg rng(3);
  const auto secret = to_bytes("wallet key");
  auto shares = share_split(secret, 2, 3, rng);
  std::vector<SecretShare> dup{shares[0], shares[0]};
  EXPECT_EQ(code_of([&] { share_combine(dup); }), "duplicate-share");
  auto bad = shares;
  bad[1].payload[0] ^= 1;
  std::vector<SecretShare> pair{bad[0], bad[1]};
  EXPECT_EQ(code_of([&] { share_combine(pair); }), "checksum-mismatch");
  EXPECT_EQ(code_of([&] { share_split(secret, 3, 2, rng); }), "bad-parameters");
  EXPECT_EQ(code_of([&] { share_split(secret, 1, 17, rng); }), "bad-parameters");
  EXPECT_EQ(code_of([&] { share_split(Bytes(65, 1), 1, 1, rng); }), "bad-parameters");
  auto other = share_split(to_bytes("other key!"), 2, 3, rng);
  std::vector<SecretShare> mixed{shares[0], other[1]};
  EXPECT_FALSE(code_of([&] { share_combine(mixed); }).empty());
}
