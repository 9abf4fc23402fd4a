#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "omic/crypto/drbg.hpp"
#include "omic/crypto/hash_chain.hpp"
#include "omic/parallel/kernels.hpp"

using namespace omic;

namespace {

std::vector<parallel::PredicateCase> make_predicates(std::size_t n) {
  crypto::Drbg rng(7);
  std::vector<parallel::PredicateCase> cases;
  cases.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t vmax = 200;
    const auto v = static_cast<std::int64_t>(rng.uniform(vmax + 1));
    auto issued = crypto::chain_issue(rng.digest(), "a", v, vmax);
    const auto t = static_cast<std::int64_t>(rng.uniform(static_cast<std::uint64_t>(v) + 1));
    cases.push_back({issued.anchor, t, crypto::threshold_prove(issued.holder_token, v, t)});
  }
  return cases;
}

std::vector<crypto::Digest32> make_leaves(std::size_t n) {
  crypto::Drbg rng(8);
  std::vector<crypto::Digest32> leaves(n);
  for (auto& l : leaves) l = rng.digest();
  return leaves;
}

struct Corpus {
  std::vector<parallel::Document> docs;
  std::vector<std::string> needles;
};

Corpus make_corpus(std::size_t n) {
  crypto::Drbg rng(9);
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    std::string text;
    for (int k = 0; k < 64; ++k) text += crypto::to_hex(rng.bytes(16)) + " ";
    c.docs.push_back({"block " + std::to_string(i), std::move(text)});
  }
  for (int k = 0; k < 32; ++k) c.needles.push_back("SMP-" + crypto::to_hex(rng.bytes(8)));
  return c;
}

void BM_PredicatesSerial(benchmark::State& st) {
  auto cases = make_predicates(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(parallel::verify_predicates_serial(cases));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_PredicatesOmp(benchmark::State& st) {
  auto cases = make_predicates(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(parallel::verify_predicates_omp(cases));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_LeavesSerial(benchmark::State& st) {
  auto leaves = make_leaves(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(parallel::hash_leaves_serial(leaves));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_LeavesOmp(benchmark::State& st) {
  auto leaves = make_leaves(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(parallel::hash_leaves_omp(leaves));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_ScanSerial(benchmark::State& st) {
  auto c = make_corpus(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(parallel::scan_substrings_serial(c.docs, c.needles));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_ScanOmp(benchmark::State& st) {
  auto c = make_corpus(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(parallel::scan_substrings_omp(c.docs, c.needles));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_PredicatesSerial)->Arg(256)->Arg(2048)->UseRealTime();
BENCHMARK(BM_PredicatesOmp)->Arg(256)->Arg(2048)->UseRealTime();
BENCHMARK(BM_LeavesSerial)->Arg(4096)->Arg(65536)->UseRealTime();
BENCHMARK(BM_LeavesOmp)->Arg(4096)->Arg(65536)->UseRealTime();
BENCHMARK(BM_ScanSerial)->Arg(64)->Arg(1024)->UseRealTime();
BENCHMARK(BM_ScanOmp)->Arg(64)->Arg(1024)->UseRealTime();

BENCHMARK_MAIN();
