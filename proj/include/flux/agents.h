#ifndef FLUX_AGENTS_H_
#define FLUX_AGENTS_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "flux/env.h"
#include "flux/qtable.h"
#include "flux/random.h"

namespace flux {

// Bad agent identifiers, missing credentials, mismatched tables.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// What a text-driven agent actually said for a ply. Absent for agents that
// choose actions directly.
struct MoveAnnotation {
  std::string raw_reply;
  std::string parse_result;  // "ok", "format", "out_of_range" or "transport"
  bool substituted = false;
  bool transport_failure = false;

  bool valid() const { return !substituted; }
  friend bool operator==(const MoveAnnotation&, const MoveAnnotation&) = default;
};

struct Decision {
  Action action;
  std::optional<MoveAnnotation> annotation;
  bool fallback = false;  // Q-table had no entry; the move was random
};

// A policy instance for one game. Instances may keep game-local state (an LLM
// conversation, say); anything shared between games must be read-only.
class Agent {
 public:
  virtual ~Agent() = default;
  // Must return a member of LegalActions(state).
  virtual Decision Choose(const GameState& state, Role role,
                          SeededRandomSource& rng) = 0;
  virtual std::string name() const = 0;
};

// Builds a fresh agent for the game with the given seed.
using AgentFactory = std::function<std::unique_ptr<Agent>(std::uint64_t)>;

Action RandomAction(const GameState& state, SeededRandomSource& rng);

// One-ply greedy scores. Length terms weigh 10, sum terms weigh 1, so keeping
// or removing a cell always dominates any sum change a single ply can make.
int HeuristicShrinkerScore(const GameState& state, const Action& action);
int HeuristicAmplifierScore(const GameState& state, const Action& action);
// Highest score, ties to the lowest encoded action.
Action HeuristicShrinkerAction(const GameState& state);
Action HeuristicAmplifierAction(const GameState& state);
Action HeuristicAction(const GameState& state, Role role);

// Argmax of the stored values over legal actions (absent codes read as 0,
// ties to the lowest code). nullopt when the state is not in the table.
std::optional<Action> GreedyQAction(const QTable& table,
                                    const GameState& state);

class RandomAgent : public Agent {
 public:
  Decision Choose(const GameState& state, Role,
                  SeededRandomSource& rng) override {
    return {RandomAction(state, rng), std::nullopt};
  }
  std::string name() const override { return "random"; }
};

class HeuristicAgent : public Agent {
 public:
  Decision Choose(const GameState& state, Role role,
                  SeededRandomSource&) override {
    return {HeuristicAction(state, role), std::nullopt};
  }
  std::string name() const override { return "heuristic"; }
};

// Greedy on a frozen table; unseen states get a uniform random move and bump
// the shared fallback counter.
class GreedyQAgent : public Agent {
 public:
  GreedyQAgent(std::shared_ptr<const QTable> table,
               std::shared_ptr<std::atomic<std::int64_t>> fallbacks)
      : table_(std::move(table)), fallbacks_(std::move(fallbacks)) {}

  Decision Choose(const GameState& state, Role role,
                  SeededRandomSource& rng) override;
  std::string name() const override { return "rl"; }

 private:
  std::shared_ptr<const QTable> table_;
  std::shared_ptr<std::atomic<std::int64_t>> fallbacks_;
};

}  // namespace flux

#endif  // FLUX_AGENTS_H_
