#include "omic/agent/message.hpp"

#include "omic/error.hpp"

namespace omic::agent {

json Message::to_json() const {
  return {{"id", id}, {"protocol", protocol}, {"type", type}, {"thread_id", thread_id}, {"body", body}};
}

std::string Message::canonical() const { return to_json().dump(); }

Message Message::from_json(const json& j) {
  try {
    Message m;
    m.id = j.at("id").get<std::string>();
    m.protocol = j.at("protocol").get<std::string>();
    m.type = j.at("type").get<std::string>();
    m.thread_id = j.at("thread_id").get<std::string>();
    m.body = j.at("body");
    if (!m.body.is_object() || m.id.empty() || m.protocol.empty() || m.type.empty()) {
      throw Error("malformed", "message fields missing");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("message: ") + e.what());
  }
}

Message Message::parse(std::string_view text) {
  try {
    return from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("message: ") + e.what());
  }
}

std::string new_thread_id(crypto::Drbg& rng) { return crypto::to_hex(rng.bytes(16)); }

Message make_message(std::string protocol, std::string type, std::string thread_id, json body, crypto::Drbg& rng) {
  return {crypto::to_hex(rng.bytes(16)), std::move(protocol), std::move(type), std::move(thread_id), std::move(body)};
}

Message make_reply(const Message& to, std::string type, json body, crypto::Drbg& rng) {
  return make_message(to.protocol, std::move(type), to.thread_id, std::move(body), rng);
}

Message make_problem_report(const Message& to, const std::string& code, const std::string& explanation,
                            crypto::Drbg& rng) {
  return make_reply(to, std::string(kProblemReport),
                    {{"code", code}, {"explanation", explanation}, {"in_reply_to", to.id}}, rng);
}

}  // namespace omic::agent
