#ifndef FLUX_ENV_H_
#define FLUX_ENV_H_

// The FLUX state machine. A row of positive integer cells; each ply picks a
// cell and either doubles it (Amplify) or floor-halves it (Drain). Cells that
// reach zero are removed. The Shrinker wins on a single remaining cell, the
// Amplifier wins as soon as the sum exceeds 20, and after the 15th ply the
// Shrinker wins iff fewer than three cells remain.
//
// Everything here is a pure function over immutable values.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flux {

inline constexpr int kMaxPlies = 15;
inline constexpr int kSumLimit = 20;
inline constexpr int kTiebreakCells = 3;

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

enum class Role { kShrinker = 0, kAmplifier = 1 };

Role Opponent(Role role);
std::string_view RoleName(Role role);  // "shrinker" / "amplifier"
Role ParseRole(std::string_view name);

enum class Op { kAmplify, kDrain };

struct Action {
  int index = 0;
  Op op = Op::kAmplify;

  friend bool operator==(const Action&, const Action&) = default;
};

// "AMPLIFY 3" / "DRAIN 0"; the same grammar the text agents are asked for.
std::string ToString(const Action& action);

enum class Outcome {
  kOngoing,
  kShrinkerSingleCell,
  kShrinkerTiebreak,  // fewer than three cells after the last ply
  kAmplifierSumExceeded,
  kAmplifierTiebreak,  // three or more cells after the last ply
};

class TerminalStatus {
 public:
  constexpr TerminalStatus() = default;
  constexpr explicit TerminalStatus(Outcome outcome) : outcome_(outcome) {}

  Outcome outcome() const { return outcome_; }
  bool ongoing() const { return outcome_ == Outcome::kOngoing; }
  bool terminal() const { return !ongoing(); }
  // Throws StateError while ongoing.
  Role winner() const;
  // "ongoing", "single_cell", "tiebreak_fewer_than_3", "sum_exceeded_20",
  // "tiebreak_at_least_3".
  std::string_view reason() const;

  friend bool operator==(const TerminalStatus&, const TerminalStatus&) = default;

 private:
  Outcome outcome_ = Outcome::kOngoing;
};

std::string_view OutcomeName(Outcome outcome);
Outcome ParseOutcome(std::string_view name);

struct GameState {
  std::vector<int> cells;
  int moves_played = 0;

  int sum() const;
  int size() const { return static_cast<int>(cells.size()); }

  friend bool operator==(const GameState&, const GameState&) = default;
};

// Cells [2, 1, 3, 1, 2], nothing played yet.
GameState InitialState();

// Classifies a state by the terminal rules, in order: sum above the limit,
// single cell, tiebreak after the last ply. A state produced by Apply() always
// has the status Apply() returned alongside it.
TerminalStatus EvaluateStatus(const GameState& state);

// Shrinker moves on even ply counts. Throws StateError on a terminal state.
Role RoleToMove(const GameState& state);

// All 2 * size() actions, ascending by encoded value. Losing moves included.
std::vector<Action> LegalActions(const GameState& state);

// Throws IndexError for an out-of-range cell and StateError when the state is
// already terminal.
std::pair<GameState, TerminalStatus> Apply(const GameState& state,
                                           const Action& action);

// Canonical key, e.g. "2,1,3,1,2|0".
std::string StateKey(const GameState& state);
// Inverse of StateKey; throws std::invalid_argument on malformed text.
GameState ParseStateKey(std::string_view key);

// Amplify@i -> 2i, Drain@i -> 2i+1.
constexpr int EncodeAction(const Action& action) {
  return 2 * action.index + (action.op == Op::kDrain ? 1 : 0);
}
// Throws RangeError unless 0 <= code < 2 * row_len.
Action DecodeAction(int code, int row_len);

// Dense 64-bit packing of (cells, moves_played) for hash tables. Injective for
// rows of at most 5 cells with values below 64.
std::uint64_t PackState(const GameState& state);

}  // namespace flux

#endif  // FLUX_ENV_H_
