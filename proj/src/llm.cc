#include "flux/llm.h"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

namespace flux {

using nlohmann::json;

const std::string& RulesText() {
  static const std::string text =
      "FLUX is a two-player game on a row of positive integer cells. The row "
      "starts as [2, 1, 3, 1, 2]; cells are indexed from 0, left to right.\n"
      "On each turn the player to move picks one cell and either AMPLIFIES it "
      "(its value is multiplied by 2) or DRAINS it (its value is halved, "
      "rounding down). A cell whose value becomes 0 is deleted, and every "
      "cell to its right moves one index to the left.\n"
      "The SHRINKER (Player 0) moves first and wins as soon as the row has "
      "exactly one cell left.\n"
      "The AMPLIFIER (Player 1) wins as soon as the sum of all cells is "
      "greater than 20, whichever player made that move.\n"
      "The game lasts at most 15 moves in total, counting both players. If "
      "nobody has won when move 15 is done, the Shrinker wins if fewer than 3 "
      "cells remain and the Amplifier wins otherwise.";
  return text;
}

std::string Observation::Text() const {
  std::string text;
  for (const std::string* part :
       {&rules_text, &role_banner, &board_table, &instruction}) {
    if (part->empty()) continue;
    if (!text.empty()) text += "\n\n";
    text += *part;
  }
  return text;
}

Observation RenderObservation(const GameState& state, Role role,
                              bool include_rules) {
  Observation obs;
  if (include_rules) obs.rules_text = RulesText();
  obs.role_banner =
      role == Role::kShrinker
          ? "You are the SHRINKER (Player 0). You win when one cell remains."
          : "You are the AMPLIFIER (Player 1). You win when the sum exceeds "
            "20.";
  std::ostringstream board;
  board << "index | value\n";
  for (int i = 0; i < state.size(); ++i) {
    board << i << " | " << state.cells[i] << '\n';
  }
  board << "sum = " << state.sum() << '\n'
        << "move = " << state.moves_played + 1 << " of " << kMaxPlies;
  obs.board_table = board.str();
  obs.instruction = "Reply with exactly: AMPLIFY <index> or DRAIN <index>";
  return obs;
}

std::string_view ParseStatusName(ParseStatus status) {
  switch (status) {
    case ParseStatus::kOk: return "ok";
    case ParseStatus::kFormat: return "format";
    case ParseStatus::kOutOfRange: return "out_of_range";
  }
  return "?";
}

namespace {

// Runs of letters, or runs of digits with an optional leading minus sign.
std::vector<std::string_view> Tokenize(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  auto is_digit = [&](std::size_t k) {
    return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]));
  };
  auto is_alpha = [&](std::size_t k) {
    return k < text.size() && std::isalpha(static_cast<unsigned char>(text[k]));
  };
  while (i < text.size()) {
    const std::size_t start = i;
    if (is_alpha(i)) {
      while (is_alpha(i)) ++i;
    } else if (is_digit(i) || (text[i] == '-' && is_digit(i + 1))) {
      ++i;
      while (is_digit(i)) ++i;
    } else {
      ++i;
      continue;
    }
    tokens.push_back(text.substr(start, i - start));
  }
  return tokens;
}

bool EqualsIgnoreCase(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(a[i])) != b[i]) return false;
  }
  return true;
}

bool IsInteger(std::string_view token) {
  return !token.empty() &&
         (std::isdigit(static_cast<unsigned char>(token.back())) != 0);
}

}  // namespace

ParsedReply ParseReply(std::string_view text, const GameState& state) {
  const auto tokens = Tokenize(text);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    Op op;
    if (EqualsIgnoreCase(tokens[i], "AMPLIFY")) {
      op = Op::kAmplify;
    } else if (EqualsIgnoreCase(tokens[i], "DRAIN")) {
      op = Op::kDrain;
    } else {
      continue;
    }
    const std::string_view number = tokens[i + 1];
    if (!IsInteger(number)) continue;
    long long index = 0;
    auto [ptr, ec] =
        std::from_chars(number.data(), number.data() + number.size(), index);
    if (ec != std::errc() || index < 0 || index >= state.size()) {
      return {ParseStatus::kOutOfRange, {}};
    }
    return {ParseStatus::kOk, {static_cast<int>(index), op}};
  }
  return {ParseStatus::kFormat, {}};
}

std::string ScriptedBackend::Complete(const Conversation&) {
  if (next_ >= script_.size()) return "";
  const auto& entry = script_[next_++];
  if (!entry) throw TransportError("scripted timeout");
  return *entry;
}

std::vector<std::optional<std::string>> LoadScript(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read reply script " + path.string());
  std::vector<std::optional<std::string>> script;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == kScriptTimeoutMarker) {
      script.emplace_back(std::nullopt);
    } else {
      script.emplace_back(line);
    }
  }
  return script;
}

HttpChatConfig HttpChatConfigFromEnv(std::string_view model_override) {
  auto env = [](const char* name) -> std::string {
    const char* value = std::getenv(name);
    return value == nullptr ? std::string() : std::string(value);
  };
  HttpChatConfig config;
  config.endpoint = env("FLUX_LLM_ENDPOINT");
  config.api_key = env("FLUX_LLM_API_KEY");
  config.model = model_override.empty() ? env("FLUX_LLM_MODEL")
                                        : std::string(model_override);
  if (config.endpoint.empty()) throw ConfigError("FLUX_LLM_ENDPOINT is not set");
  if (config.api_key.empty()) throw ConfigError("FLUX_LLM_API_KEY is not set");
  if (config.model.empty()) throw ConfigError("FLUX_LLM_MODEL is not set");
  return config;
}

HttpChatBackend::HttpChatBackend(HttpChatConfig config)
    : config_(std::move(config)) {
  if (config_.api_key.empty()) throw ConfigError("missing API key");
  if (config_.model.empty()) throw ConfigError("missing model name");
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must start with http:// or https://: " +
                      config_.endpoint);
  }
  const std::string scheme = config_.endpoint.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported scheme: " + scheme);
  }
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/"
                                          : config_.endpoint.substr(path_start);
}

std::string HttpChatBackend::RequestBody(
    const Conversation& conversation) const {
  json messages = json::array();
  for (const ChatMessage& m : conversation) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json body = {{"model", config_.model},
               {"messages", std::move(messages)},
               {"temperature", config_.temperature}};
  return body.dump();
}

std::string HttpChatBackend::SendOnce(const std::string& body) {
  httplib::Client client(scheme_host_port_);
  const auto timeout = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(timeout, 0);
  client.set_read_timeout(timeout, 0);
  client.set_write_timeout(timeout, 0);
  httplib::Headers headers = {
      {"Authorization", "Bearer " + config_.api_key}};
  if (config_.verbose) std::cerr << "[llm] request " << body << '\n';
  auto response = client.Post(path_, headers, body, "application/json");
  if (!response) {
    throw TransportError("request failed: " + httplib::to_string(response.error()));
  }
  if (config_.verbose) std::cerr << "[llm] response " << response->body << '\n';
  if (response->status != 200) {
    throw TransportError("HTTP status " + std::to_string(response->status));
  }
  try {
    const json parsed = json::parse(response->body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed response body: ") + e.what());
  }
}

std::string HttpChatBackend::Complete(const Conversation& conversation) {
  const std::string body = RequestBody(conversation);
  try {
    return SendOnce(body);
  } catch (const TransportError&) {
    return SendOnce(body);
  }
}

void ExchangeLog::Record(std::uint64_t game_seed, int ply,
                         const Conversation& request, const std::string& reply,
                         const std::string& error) {
  json messages = json::array();
  for (const ChatMessage& m : request) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json line = {{"game_seed", game_seed},
               {"ply", ply},
               {"request", std::move(messages)},
               {"reply", reply},
               {"error", error}};
  std::lock_guard<std::mutex> lock(mu_);
  out_ << line.dump() << '\n';
}

Decision LlmAgentStep(LlmBackend& backend, Conversation& conversation,
                      const GameState& state, Role role,
                      SeededRandomSource& rng, LlmStats& stats,
                      ExchangeLog* log, std::uint64_t game_seed) {
  const bool first_turn = conversation.empty();
  conversation.push_back(
      {"user", RenderObservation(state, role, first_turn).Text()});
  ++stats.plies;

  MoveAnnotation note;
  Action action;
  std::string error;
  try {
    note.raw_reply = backend.Complete(conversation);
    const ParsedReply parsed = ParseReply(note.raw_reply, state);
    note.parse_result = ParseStatusName(parsed.status);
    if (parsed.ok()) {
      action = parsed.action;
    } else {
      note.substituted = true;
    }
  } catch (const TransportError& e) {
    error = e.what();
    note.parse_result = "transport";
    note.transport_failure = true;
    note.substituted = true;
    ++stats.transport_failures;
  }
  if (log != nullptr) {
    log->Record(game_seed, static_cast<int>(stats.plies), conversation,
                note.raw_reply, error);
  }
  if (note.substituted) {
    ++stats.invalid;
    action = RandomAction(state, rng);
  }
  conversation.push_back({"assistant", ToString(action)});
  return {action, std::move(note)};
}

}  // namespace flux
