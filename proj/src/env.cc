#include "flux/env.h"

#include <charconv>
#include <numeric>

namespace flux {

Role Opponent(Role role) {
  return role == Role::kShrinker ? Role::kAmplifier : Role::kShrinker;
}

std::string_view RoleName(Role role) {
  return role == Role::kShrinker ? "shrinker" : "amplifier";
}

Role ParseRole(std::string_view name) {
  if (name == "shrinker") return Role::kShrinker;
  if (name == "amplifier") return Role::kAmplifier;
  throw std::invalid_argument("unknown role: " + std::string(name));
}

std::string ToString(const Action& action) {
  return std::string(action.op == Op::kAmplify ? "AMPLIFY " : "DRAIN ") +
         std::to_string(action.index);
}

Role TerminalStatus::winner() const {
  switch (outcome_) {
    case Outcome::kShrinkerSingleCell:
    case Outcome::kShrinkerTiebreak:
      return Role::kShrinker;
    case Outcome::kAmplifierSumExceeded:
    case Outcome::kAmplifierTiebreak:
      return Role::kAmplifier;
    case Outcome::kOngoing:
      break;
  }
  throw StateError("game is still ongoing");
}

std::string_view TerminalStatus::reason() const { return OutcomeName(outcome_); }

std::string_view OutcomeName(Outcome outcome) {
  switch (outcome) {
    case Outcome::kOngoing: return "ongoing";
    case Outcome::kShrinkerSingleCell: return "single_cell";
    case Outcome::kShrinkerTiebreak: return "tiebreak_fewer_than_3";
    case Outcome::kAmplifierSumExceeded: return "sum_exceeded_20";
    case Outcome::kAmplifierTiebreak: return "tiebreak_at_least_3";
  }
  return "?";
}

Outcome ParseOutcome(std::string_view name) {
  for (Outcome o : {Outcome::kOngoing, Outcome::kShrinkerSingleCell,
                    Outcome::kShrinkerTiebreak, Outcome::kAmplifierSumExceeded,
                    Outcome::kAmplifierTiebreak}) {
    if (OutcomeName(o) == name) return o;
  }
  throw std::invalid_argument("unknown outcome: " + std::string(name));
}

int GameState::sum() const {
  return std::accumulate(cells.begin(), cells.end(), 0);
}

GameState InitialState() { return GameState{{2, 1, 3, 1, 2}, 0}; }

TerminalStatus EvaluateStatus(const GameState& state) {
  if (state.sum() > kSumLimit) {
    return TerminalStatus(Outcome::kAmplifierSumExceeded);
  }
  if (state.size() == 1) return TerminalStatus(Outcome::kShrinkerSingleCell);
  if (state.moves_played >= kMaxPlies) {
    return TerminalStatus(state.size() < kTiebreakCells
                              ? Outcome::kShrinkerTiebreak
                              : Outcome::kAmplifierTiebreak);
  }
  return TerminalStatus();
}

Role RoleToMove(const GameState& state) {
  if (EvaluateStatus(state).terminal()) {
    throw StateError("no role to move in terminal state " + StateKey(state));
  }
  return state.moves_played % 2 == 0 ? Role::kShrinker : Role::kAmplifier;
}

std::vector<Action> LegalActions(const GameState& state) {
  if (EvaluateStatus(state).terminal()) {
    throw StateError("no legal actions in terminal state " + StateKey(state));
  }
  std::vector<Action> actions;
  actions.reserve(2 * state.cells.size());
  for (int i = 0; i < state.size(); ++i) {
    actions.push_back({i, Op::kAmplify});
    actions.push_back({i, Op::kDrain});
  }
  return actions;
}

std::pair<GameState, TerminalStatus> Apply(const GameState& state,
                                           const Action& action) {
  if (EvaluateStatus(state).terminal()) {
    throw StateError("apply on terminal state " + StateKey(state));
  }
  if (action.index < 0 || action.index >= state.size()) {
    throw IndexError("cell index " + std::to_string(action.index) +
                     " out of range for row of " +
                     std::to_string(state.size()));
  }
  GameState next = state;
  int& cell = next.cells[action.index];
  if (action.op == Op::kAmplify) {
    cell *= 2;
  } else {
    cell /= 2;
    if (cell == 0) next.cells.erase(next.cells.begin() + action.index);
  }
  ++next.moves_played;
  TerminalStatus status = EvaluateStatus(next);
  return {std::move(next), status};
}

std::string StateKey(const GameState& state) {
  std::string key;
  for (std::size_t i = 0; i < state.cells.size(); ++i) {
    if (i > 0) key += ',';
    key += std::to_string(state.cells[i]);
  }
  key += '|';
  key += std::to_string(state.moves_played);
  return key;
}

namespace {

int ParseNonNegative(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      value < 0) {
    throw std::invalid_argument("malformed state key: " + std::string(whole));
  }
  return value;
}

}  // namespace

GameState ParseStateKey(std::string_view key) {
  const auto bar = key.find('|');
  if (bar == std::string_view::npos) {
    throw std::invalid_argument("malformed state key: " + std::string(key));
  }
  GameState state;
  std::string_view cells = key.substr(0, bar);
  while (true) {
    const auto comma = cells.find(',');
    state.cells.push_back(ParseNonNegative(cells.substr(0, comma), key));
    if (state.cells.back() == 0) {
      throw std::invalid_argument("zero cell in state key: " + std::string(key));
    }
    if (comma == std::string_view::npos) break;
    cells.remove_prefix(comma + 1);
  }
  state.moves_played = ParseNonNegative(key.substr(bar + 1), key);
  return state;
}

Action DecodeAction(int code, int row_len) {
  if (code < 0 || code >= 2 * row_len) {
    throw RangeError("action code " + std::to_string(code) +
                     " out of range for row of " + std::to_string(row_len));
  }
  return {code / 2, code % 2 == 1 ? Op::kDrain : Op::kAmplify};
}

std::uint64_t PackState(const GameState& state) {
  std::uint64_t packed = static_cast<std::uint64_t>(state.moves_played);
  packed = (packed << 3) | static_cast<std::uint64_t>(state.cells.size());
  for (int cell : state.cells) {
    packed = (packed << 6) | static_cast<std::uint64_t>(cell & 63);
  }
  return packed;
}

}  // namespace flux
