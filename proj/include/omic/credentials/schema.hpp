#pragma once

#include "omic/agent/agent.hpp"

namespace omic::credentials {

using json = nlohmann::json;

// Submits a SCHEMA transaction from the issuer's public DID and returns the
// committed record. Throws omic::Error("empty-attributes") locally and
// propagates ledger rejections.
ledger::SchemaRecord define_schema(agent::Agent& issuer, const std::string& name, const std::string& version,
                                   const std::vector<ledger::AttributeSpec>& attributes);

struct PublishedCredDef {
  std::string cred_def_id;
  std::string registry_id;
};

// CRED_DEF followed by its empty REVOC_REG_DEF. Throws
// omic::Error("unknown-schema") when the schema is not committed.
PublishedCredDef publish_cred_def(agent::Agent& issuer, const std::string& schema_id,
                                  const std::string& tag = "default");

// Value canonicalization. String attributes keep their UTF-8 text. Int
// attributes take a decimal (string or JSON number), are encoded as
// round(value * 10^precision) with half-up rounding on the exact decimal, and
// render back as that integer with `precision` fraction digits, so "3.1" at
// precision 1 is 31 / "3.1". Throws omic::Error("bad-value") or
// ("out-of-range") outside [0, v_max].
struct CanonicalValue {
  std::string text;
  std::optional<std::int64_t> encoded;  // int attributes only
};
CanonicalValue canonicalize(const ledger::AttributeSpec& spec, const json& value);
std::string render_encoded(std::int64_t encoded, int precision);

const ledger::AttributeSpec& find_attribute(const ledger::SchemaRecord& schema, const std::string& name);

}  // namespace omic::credentials
