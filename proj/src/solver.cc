#include "flux/solver.h"

#include <algorithm>
#include <sstream>

namespace flux {

ReachableSet ReachableStates(const GameState& root) {
  ReachableSet result;
  std::unordered_map<std::uint64_t, bool> seen;  // packed -> is terminal
  std::vector<GameState> frontier{root};
  seen.emplace(PackState(root), EvaluateStatus(root).terminal());
  while (!frontier.empty()) {
    GameState state = std::move(frontier.back());
    frontier.pop_back();
    if (EvaluateStatus(state).terminal()) {
      ++result.terminal;
      continue;
    }
    (RoleToMove(state) == Role::kShrinker ? result.shrinker_to_move
                                          : result.amplifier_to_move)++;
    for (const Action& action : LegalActions(state)) {
      auto [next, status] = Apply(state, action);
      if (seen.emplace(PackState(next), status.terminal()).second) {
        frontier.push_back(std::move(next));
      }
    }
    result.ongoing.push_back(std::move(state));
  }
  std::sort(result.ongoing.begin(), result.ongoing.end(),
            [](const GameState& a, const GameState& b) {
              return StateKey(a) < StateKey(b);
            });
  return result;
}

std::optional<SolvedValue> SolvedGame::Lookup(const GameState& state) const {
  const TerminalStatus status = EvaluateStatus(state);
  if (status.terminal()) return SolvedValue{status.winner(), 0};
  auto it = nodes_.find(PackState(state));
  if (it == nodes_.end() || !(it->second.state == state)) return std::nullopt;
  return it->second.value;
}

SolvedValue SolvedGame::At(const GameState& state) const {
  if (auto value = Lookup(state)) return *value;
  throw StateError("state " + StateKey(state) + " is outside the solved set");
}

std::int64_t SolvedGame::reachable_count(Role role) const {
  std::int64_t n = 0;
  for (const auto& [packed, node] : nodes_) {
    if (RoleToMove(node.state) == role) ++n;
  }
  return n;
}

std::vector<std::pair<GameState, SolvedValue>> SolvedGame::SortedEntries()
    const {
  std::vector<std::pair<std::string, const Node*>> keyed;
  keyed.reserve(nodes_.size());
  for (const auto& [packed, node] : nodes_) {
    keyed.emplace_back(StateKey(node.state), &node);
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<GameState, SolvedValue>> out;
  out.reserve(keyed.size());
  for (const auto& [key, node] : keyed) out.emplace_back(node->state, node->value);
  return out;
}

bool operator==(const SolvedGame& a, const SolvedGame& b) {
  if (!(a.root_ == b.root_) || a.nodes_.size() != b.nodes_.size()) return false;
  for (const auto& [packed, node] : a.nodes_) {
    auto it = b.nodes_.find(packed);
    if (it == b.nodes_.end() || !(it->second.state == node.state) ||
        !(it->second.value == node.value)) {
      return false;
    }
  }
  return true;
}

namespace {

class Solver {
 public:
  explicit Solver(std::unordered_map<std::uint64_t, SolvedGame::Node>* nodes)
      : nodes_(nodes) {}

  SolvedValue Value(const GameState& state) {
    const TerminalStatus status = EvaluateStatus(state);
    if (status.terminal()) return {status.winner(), 0};
    const std::uint64_t packed = PackState(state);
    if (auto it = nodes_->find(packed); it != nodes_->end()) {
      return it->second.value;
    }

    const Role mover = RoleToMove(state);
    int fastest_win = -1;
    int longest_loss = -1;
    for (const Action& action : LegalActions(state)) {
      const SolvedValue child = Value(Apply(state, action).first);
      if (child.winner == mover) {
        if (fastest_win < 0 || child.depth < fastest_win) fastest_win = child.depth;
      } else {
        longest_loss = std::max(longest_loss, child.depth);
      }
    }
    const SolvedValue value =
        fastest_win >= 0 ? SolvedValue{mover, fastest_win + 1}
                         : SolvedValue{Opponent(mover), longest_loss + 1};
    nodes_->emplace(packed, SolvedGame::Node{state, value});
    return value;
  }

 private:
  std::unordered_map<std::uint64_t, SolvedGame::Node>* nodes_;
};

}  // namespace

SolvedGame Solve(const GameState& root) {
  SolvedGame solved;
  solved.root_ = root;
  Solver(&solved.nodes_).Value(root);
  return solved;
}

Action OptimalAction(const SolvedGame& solved, const GameState& state) {
  if (EvaluateStatus(state).terminal()) {
    throw StateError("no optimal action in terminal state " + StateKey(state));
  }
  const Role mover = RoleToMove(state);
  solved.At(state);  // throws outside the solved closure

  std::optional<Action> best;
  bool best_wins = false;
  int best_depth = 0;
  for (const Action& action : LegalActions(state)) {
    const SolvedValue child = solved.At(Apply(state, action).first);
    const bool wins = child.winner == mover;
    bool better;
    if (!best) {
      better = true;
    } else if (wins != best_wins) {
      better = wins;
    } else {
      better = wins ? child.depth < best_depth : child.depth > best_depth;
    }
    if (better) {
      best = action;
      best_wins = wins;
      best_depth = child.depth;
    }
  }
  return *best;
}

RandomPlayTable::RandomPlayTable(const GameState& root) {
  ShrinkerWinProbability(root);
}

double RandomPlayTable::ShrinkerWinProbability(const GameState& state) const {
  const TerminalStatus status = EvaluateStatus(state);
  if (status.terminal()) return status.winner() == Role::kShrinker ? 1.0 : 0.0;
  const std::uint64_t packed = PackState(state);
  if (auto it = memo_.find(packed); it != memo_.end()) return it->second;
  const std::vector<Action> actions = LegalActions(state);
  double total = 0.0;
  for (const Action& action : actions) {
    total += ShrinkerWinProbability(Apply(state, action).first);
  }
  const double p = total / static_cast<double>(actions.size());
  memo_.emplace(packed, p);
  return p;
}

namespace {

Rational ExactProbability(const GameState& state,
                          std::unordered_map<std::uint64_t, Rational>& memo) {
  const TerminalStatus status = EvaluateStatus(state);
  if (status.terminal()) {
    return Rational(status.winner() == Role::kShrinker ? 1 : 0);
  }
  const std::uint64_t packed = PackState(state);
  if (auto it = memo.find(packed); it != memo.end()) return it->second;
  const std::vector<Action> actions = LegalActions(state);
  Rational total = 0;
  for (const Action& action : actions) {
    total += ExactProbability(Apply(state, action).first, memo);
  }
  total /= static_cast<int>(actions.size());
  memo.emplace(packed, total);
  return total;
}

}  // namespace

Rational ExactShrinkerWinProbability(const GameState& state) {
  std::unordered_map<std::uint64_t, Rational> memo;
  return ExactProbability(state, memo);
}

std::string SerializeSolvedGame(const SolvedGame& solved) {
  const auto entries = solved.SortedEntries();
  std::ostringstream out;
  out << "#kind=solved\n"
      << "#root=" << StateKey(solved.root()) << '\n'
      << "#entries=" << entries.size() << '\n';
  for (const auto& [state, value] : entries) {
    out << StateKey(state) << '\t' << RoleName(value.winner) << ','
        << value.depth << '\n';
  }
  return out.str();
}

}  // namespace flux
