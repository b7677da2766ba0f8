#ifndef FLUX_SOLVER_H_
#define FLUX_SOLVER_H_

// Exhaustive backward induction over the FLUX state space. Every ply bumps
// the move counter and the game ends after 15, so the state graph is a DAG of
// a few tens of thousands of nodes and a memoized DFS solves it outright.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "flux/agents.h"
#include "flux/env.h"

namespace flux {

using Rational = boost::multiprecision::cpp_rational;

struct SolvedValue {
  Role winner;
  // Plies to the end under optimal play: the winner hurries, the loser stalls.
  int depth;

  friend bool operator==(const SolvedValue&, const SolvedValue&) = default;
};

struct ReachableSet {
  std::vector<GameState> ongoing;  // sorted by StateKey
  std::int64_t shrinker_to_move = 0;
  std::int64_t amplifier_to_move = 0;
  std::int64_t terminal = 0;  // distinct terminal states
};

// Forward closure of `root` under all legal actions.
ReachableSet ReachableStates(const GameState& root = InitialState());

class SolvedGame {
 public:
  // Terminal states are answered from their status with depth 0; ongoing
  // states must lie in the solved closure.
  std::optional<SolvedValue> Lookup(const GameState& state) const;
  // As Lookup, but throws StateError for states outside the closure.
  SolvedValue At(const GameState& state) const;

  const GameState& root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  std::int64_t reachable_count(Role role) const;

  // Ongoing states with their values, sorted by StateKey.
  std::vector<std::pair<GameState, SolvedValue>> SortedEntries() const;

  friend bool operator==(const SolvedGame& a, const SolvedGame& b);

  struct Node {
    GameState state;
    SolvedValue value;
  };

 private:
  friend SolvedGame Solve(const GameState& root);
  GameState root_;
  std::unordered_map<std::uint64_t, Node> nodes_;
};

SolvedGame Solve(const GameState& root = InitialState());

// Winning moves first, fastest win preferred; otherwise the longest stall.
// Ties go to the lowest encoded action. Throws StateError for terminal or
// unsolved states.
Action OptimalAction(const SolvedGame& solved, const GameState& state);

// Shrinker win probability when both sides pick uniformly among legal moves.
class RandomPlayTable {
 public:
  explicit RandomPlayTable(const GameState& root = InitialState());
  // Any state; memoized results for the root closure, computed on demand for
  // others.
  double ShrinkerWinProbability(const GameState& state) const;
  std::size_t size() const { return memo_.size(); }

 private:
  mutable std::unordered_map<std::uint64_t, double> memo_;
};

// Same quantity in exact arithmetic, for auditing the double version.
Rational ExactShrinkerWinProbability(const GameState& state = InitialState());

// Text export: "#kind=solved", "#root=<key>", "#entries=<n>", then
// "<state_key>\t<winner>,<depth>" per ongoing state sorted by key.
std::string SerializeSolvedGame(const SolvedGame& solved);

class OptimalAgent : public Agent {
 public:
  explicit OptimalAgent(std::shared_ptr<const SolvedGame> solved)
      : solved_(std::move(solved)) {}
  Decision Choose(const GameState& state, Role,
                  SeededRandomSource&) override {
    return {OptimalAction(*solved_, state), std::nullopt};
  }
  std::string name() const override { return "optimal"; }

 private:
  std::shared_ptr<const SolvedGame> solved_;
};

}  // namespace flux

#endif  // FLUX_SOLVER_H_
