#include "omic/credentials/schema.hpp"

#include "omic/error.hpp"
#include "omic/ledger/builders.hpp"

namespace omic::credentials {

ledger::SchemaRecord define_schema(agent::Agent& issuer, const std::string& name, const std::string& version,
                                   const std::vector<ledger::AttributeSpec>& attributes) {
  if (attributes.empty()) throw Error("empty-attributes", "a schema needs at least one attribute");
  const auto& did = issuer.public_did();
  issuer.ledger().submit(ledger::make_schema(did.key, name, version, attributes, issuer.rng()));
  const auto* rec = issuer.ledger().state().schema(did.id + ":" + name + ":" + version);
  if (!rec) throw Error("not-committed", "schema missing after commit");
  return *rec;
}

PublishedCredDef publish_cred_def(agent::Agent& issuer, const std::string& schema_id, const std::string& tag) {
  const auto* schema = issuer.ledger().state().schema(schema_id);
  if (!schema) throw Error("unknown-schema", "schema " + schema_id + " is not on the ledger");
  const auto& did = issuer.public_did();
  const auto copy = *schema;
  auto cd = ledger::make_cred_def(did.key, tag, copy, issuer.rng());
  const auto cd_id = cd.payload["id"].get<std::string>();
  const auto reg_id = cd.payload["revoc_reg_id"].get<std::string>();
  issuer.ledger().submit(cd);
  issuer.ledger().submit(ledger::make_revoc_reg_def(did.key, cd_id, reg_id, issuer.rng()));
  return {cd_id, reg_id};
}

std::string render_encoded(std::int64_t encoded, int precision) {
  auto digits = std::to_string(encoded);
  if (precision == 0) return digits;
  if (digits.size() <= static_cast<std::size_t>(precision)) {
    digits.insert(0, static_cast<std::size_t>(precision) + 1 - digits.size(), '0');
  }
  digits.insert(digits.size() - static_cast<std::size_t>(precision), ".");
  return digits;
}

namespace {

std::int64_t encode_decimal(const std::string& text, int precision) {
  std::size_t i = 0;
  if (text.empty()) throw Error("bad-value", "empty number");
  if (text[0] == '-') throw Error("out-of-range", "negative values are not representable");
  if (text[0] == '+') ++i;
  std::string whole, frac;
  bool dot = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !dot) {
      dot = true;
    } else if (c >= '0' && c <= '9') {
      (dot ? frac : whole).push_back(c);
    } else {
      throw Error("bad-value", "not a decimal: " + text);
    }
  }
  if (whole.empty() && frac.empty()) throw Error("bad-value", "not a decimal: " + text);
  if (whole.size() > 12) throw Error("out-of-range", "value too large");
  const bool round_up = frac.size() > static_cast<std::size_t>(precision) && frac[precision] >= '5';
  frac.resize(static_cast<std::size_t>(precision), '0');
  std::int64_t v = 0;
  for (char c : whole + frac) v = v * 10 + (c - '0');
  return v + (round_up ? 1 : 0);
}

}  // namespace

CanonicalValue canonicalize(const ledger::AttributeSpec& spec, const json& value) {
  if (spec.type == "string") {
    if (!value.is_string()) throw Error("bad-value", spec.name + " must be a string");
    return {value.get<std::string>(), std::nullopt};
  }
  std::string text;
  if (value.is_string()) {
    text = value.get<std::string>();
  } else if (value.is_number()) {
    text = value.dump();
    if (text.find_first_of("eE") != std::string::npos) throw Error("bad-value", "exponent notation not accepted");
  } else {
    throw Error("bad-value", spec.name + " must be a number");
  }
  const auto encoded = encode_decimal(text, spec.precision);
  if (encoded > spec.v_max) {
    throw Error("out-of-range", spec.name + " encodes to " + std::to_string(encoded) + " above v_max " +
                                    std::to_string(spec.v_max));
  }
  return {render_encoded(encoded, spec.precision), encoded};
}

const ledger::AttributeSpec& find_attribute(const ledger::SchemaRecord& schema, const std::string& name) {
  for (const auto& a : schema.attributes) {
    if (a.name == name) return a;
  }
  throw Error("unknown-attribute", "schema has no attribute " + name);
}

}  // namespace omic::credentials
