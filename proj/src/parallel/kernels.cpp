#include "omic/parallel/kernels.hpp"

#include <omp.h>

#include "omic/crypto/merkle.hpp"

namespace omic::parallel {

std::vector<std::uint8_t> verify_predicates_serial(std::span<const PredicateCase> cases) {
  std::vector<std::uint8_t> out(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    out[i] = crypto::threshold_verify(cases[i].anchor, cases[i].threshold, cases[i].proof);
  }
  return out;
}

std::vector<std::uint8_t> verify_predicates_omp(std::span<const PredicateCase> cases) {
  std::vector<std::uint8_t> out(cases.size());
  const auto n = static_cast<std::int64_t>(cases.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = crypto::threshold_verify(cases[i].anchor, cases[i].threshold, cases[i].proof);
  }
  return out;
}

std::vector<crypto::Digest32> hash_leaves_serial(std::span<const crypto::Digest32> leaves) {
  std::vector<crypto::Digest32> out(leaves.size());
  for (std::size_t i = 0; i < leaves.size(); ++i) out[i] = crypto::merkle_leaf_hash(leaves[i]);
  return out;
}

std::vector<crypto::Digest32> hash_leaves_omp(std::span<const crypto::Digest32> leaves) {
  std::vector<crypto::Digest32> out(leaves.size());
  const auto n = static_cast<std::int64_t>(leaves.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[i] = crypto::merkle_leaf_hash(leaves[i]);
  return out;
}

namespace {

void scan_one(const Document& doc, std::span<const std::string> needles, std::vector<Match>& out) {
  for (const auto& needle : needles) {
    if (!needle.empty() && doc.text.find(needle) != std::string::npos) {
      out.push_back({doc.location, needle});
    }
  }
}

}  // namespace

std::vector<Match> scan_substrings_serial(std::span<const Document> docs,
                                          std::span<const std::string> needles) {
  std::vector<Match> out;
  for (const auto& doc : docs) scan_one(doc, needles, out);
  return out;
}

std::vector<Match> scan_substrings_omp(std::span<const Document> docs,
                                       std::span<const std::string> needles) {
  std::vector<std::vector<Match>> per_doc(docs.size());
  const auto n = static_cast<std::int64_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) scan_one(docs[i], needles, per_doc[i]);
  std::vector<Match> out;
  for (auto& v : per_doc) out.insert(out.end(), v.begin(), v.end());
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace omic::parallel
