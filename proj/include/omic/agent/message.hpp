#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "omic/crypto/drbg.hpp"

namespace omic::agent {

using json = nlohmann::json;

inline constexpr std::string_view kConnectionsProtocol = "connections/1.0";
inline constexpr std::string_view kProblemReport = "problem-report";

struct Message {
  std::string id;
  std::string protocol;
  std::string type;
  std::string thread_id;
  json body = json::object();

  json to_json() const;
  std::string canonical() const;
  // Throws omic::Error("malformed").
  static Message from_json(const json& j);
  static Message parse(std::string_view text);
};

Message make_message(std::string protocol, std::string type, std::string thread_id, json body, crypto::Drbg& rng);
// Same protocol and thread as `to`.
Message make_reply(const Message& to, std::string type, json body, crypto::Drbg& rng);
Message make_problem_report(const Message& to, const std::string& code, const std::string& explanation,
                            crypto::Drbg& rng);
std::string new_thread_id(crypto::Drbg& rng);

}  // namespace omic::agent
