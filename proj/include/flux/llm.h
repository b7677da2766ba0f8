#ifndef FLUX_LLM_H_
#define FLUX_LLM_H_

// Text-agent protocol: the latent state is rendered as a prompt, a backend
// produces a reply, the reply is parsed against the current row, and any
// unusable reply forfeits the turn to a uniformly random legal move.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "flux/agents.h"
#include "flux/env.h"
#include "flux/random.h"

namespace flux {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};
using Conversation = std::vector<ChatMessage>;

struct Observation {
  std::string rules_text;  // empty after the first turn of a game
  std::string board_table;
  std::string role_banner;
  std::string instruction;

  std::string Text() const;
};

const std::string& RulesText();

Observation RenderObservation(const GameState& state, Role role,
                              bool include_rules);

enum class ParseStatus { kOk, kFormat, kOutOfRange };
std::string_view ParseStatusName(ParseStatus status);

struct ParsedReply {
  ParseStatus status = ParseStatus::kFormat;
  Action action;  // meaningful only when status == kOk

  bool ok() const { return status == ParseStatus::kOk; }
};

// Case-insensitive; the first AMPLIFY/DRAIN word directly followed by an
// integer wins. Never throws.
ParsedReply ParseReply(std::string_view text, const GameState& state);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  // Throws TransportError on timeouts and protocol failures.
  virtual std::string Complete(const Conversation& conversation) = 0;
  virtual std::string name() const = 0;
};

// Replays a fixed list of replies, then answers "" forever. A nullopt entry
// simulates a timed-out call.
class ScriptedBackend : public LlmBackend {
 public:
  explicit ScriptedBackend(std::vector<std::optional<std::string>> script)
      : script_(std::move(script)) {}

  std::string Complete(const Conversation& conversation) override;
  std::string name() const override { return "scripted"; }

 private:
  std::vector<std::optional<std::string>> script_;
  std::size_t next_ = 0;
};

inline constexpr std::string_view kScriptTimeoutMarker = "<<TIMEOUT>>";

// One reply per line; a line equal to kScriptTimeoutMarker becomes nullopt.
std::vector<std::optional<std::string>> LoadScript(
    const std::filesystem::path& path);

struct HttpChatConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{60};
  double temperature = 0.0;
  bool verbose = false;  // echo request and response bodies to stderr
};

// Reads FLUX_LLM_ENDPOINT, FLUX_LLM_API_KEY and FLUX_LLM_MODEL. A non-empty
// `model_override` replaces the model variable. Throws ConfigError when
// anything required is missing.
HttpChatConfig HttpChatConfigFromEnv(std::string_view model_override = {});

// Chat-completion style JSON over HTTP(S). Failed calls are retried once.
class HttpChatBackend : public LlmBackend {
 public:
  explicit HttpChatBackend(HttpChatConfig config);  // throws ConfigError
  std::string Complete(const Conversation& conversation) override;
  std::string name() const override { return "http:" + config_.model; }

  // The request body the backend would send.
  std::string RequestBody(const Conversation& conversation) const;

 private:
  std::string SendOnce(const std::string& body);

  HttpChatConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

// Line-delimited JSON log of every backend exchange, shared across games.
class ExchangeLog {
 public:
  explicit ExchangeLog(std::ostream& out) : out_(out) {}
  void Record(std::uint64_t game_seed, int ply, const Conversation& request,
              const std::string& reply, const std::string& error);

 private:
  std::mutex mu_;
  std::ostream& out_;
};

struct LlmStats {
  std::int64_t plies = 0;
  std::int64_t invalid = 0;
  std::int64_t transport_failures = 0;
};

// Appends the observation, asks the backend, and falls back to a random legal
// move on any unusable reply. The applied move is appended as the assistant
// turn either way.
Decision LlmAgentStep(LlmBackend& backend, Conversation& conversation,
                      const GameState& state, Role role,
                      SeededRandomSource& rng, LlmStats& stats,
                      ExchangeLog* log = nullptr, std::uint64_t game_seed = 0);

// One game's worth of conversation around a backend.
class LlmAgent : public Agent {
 public:
  LlmAgent(std::unique_ptr<LlmBackend> backend,
           std::shared_ptr<ExchangeLog> log = nullptr,
           std::uint64_t game_seed = 0)
      : backend_(std::move(backend)), log_(std::move(log)),
        game_seed_(game_seed) {}

  Decision Choose(const GameState& state, Role role,
                  SeededRandomSource& rng) override {
    return LlmAgentStep(*backend_, conversation_, state, role, rng, stats_,
                        log_.get(), game_seed_);
  }
  std::string name() const override { return "llm:" + backend_->name(); }

  const Conversation& conversation() const { return conversation_; }
  const LlmStats& stats() const { return stats_; }

 private:
  std::unique_ptr<LlmBackend> backend_;
  std::shared_ptr<ExchangeLog> log_;
  std::uint64_t game_seed_;
  Conversation conversation_;
  LlmStats stats_;
};

}  // namespace flux

#endif  // FLUX_LLM_H_
