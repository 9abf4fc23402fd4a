#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "omic/parallel/kernels.hpp"

namespace omic::sim {

using json = nlohmann::json;

struct PhiFinding {
  std::string location;  // "block <height>" or "advert <id>"
  std::string sentinel;
  json to_json() const { return {{"location", location}, {"sentinel", sentinel}}; }
};

// Substring scan of every block-log line and board line for every sentinel.
std::vector<PhiFinding> phi_scan(const std::vector<std::string>& block_lines, const std::vector<std::string>& board_lines,
                                 const std::vector<std::string>& sentinels);
// Reads blocks.jsonl, board.jsonl and sentinels.json from an artifact dir.
std::vector<PhiFinding> phi_scan_artifacts(const std::filesystem::path& dir);

// Identifier classes in a researcher's view of data owners.
//   public:     cred-def ids, schema ids, issuer DIDs
//   credential: per-credential public parts (revocation handle, Merkle root,
//               issuer signature, chain anchors, predicate proofs, revealed
//               salts and paths); they link two presentations of the same
//               credential and are reported as a known limitation, one
//               entry per shared revocation handle
//   fresh:      pairwise DIDs and keys, binding keys, message and thread
//               ids, request nonces, signatures; any overlap fails the audit
struct Identifier {
  std::string kind;
  std::string value;
  std::string klass;
  std::string credential;  // revocation handle, for the credential class
};

std::vector<Identifier> extract_identifiers(const std::vector<json>& view_entries);

struct UnlinkabilityReport {
  bool pass = true;
  std::map<std::string, std::size_t> identifiers_per_researcher;
  std::vector<json> public_overlap;
  std::vector<json> known_limitation;
  std::vector<json> violations;
  json to_json() const;
};

// views: researcher -> entries of views/<researcher>.jsonl. Only entries on
// connections labelled "anonymous" count as coming from data owners.
UnlinkabilityReport unlinkability_audit(const std::map<std::string, std::vector<json>>& views);
UnlinkabilityReport unlinkability_audit_artifacts(const std::filesystem::path& dir);

}  // namespace omic::sim
