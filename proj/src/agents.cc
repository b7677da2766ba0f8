#include "flux/agents.h"

#include <algorithm>
#include <limits>
#include <vector>

namespace flux {

Action RandomAction(const GameState& state, SeededRandomSource& rng) {
  const std::vector<Action> actions = LegalActions(state);
  return actions[rng.Below(actions.size())];
}

namespace {

struct Delta {
  int removed;  // cells lost
  int growth;   // sum change
};

Delta Effect(const GameState& state, const Action& action) {
  const auto [next, status] = Apply(state, action);
  return {state.size() - next.size(), next.sum() - state.sum()};
}

template <typename Score>
Action BestScoring(const GameState& state, Score score) {
  Action best{};
  int best_score = std::numeric_limits<int>::min();
  for (const Action& action : LegalActions(state)) {
    const int s = score(state, action);
    if (s > best_score) {  // strict: earlier (lower-coded) actions keep ties
      best_score = s;
      best = action;
    }
  }
  return best;
}

}  // namespace

int HeuristicShrinkerScore(const GameState& state, const Action& action) {
  const Delta d = Effect(state, action);
  return 10 * d.removed - std::max(0, d.growth);
}

int HeuristicAmplifierScore(const GameState& state, const Action& action) {
  const Delta d = Effect(state, action);
  return d.growth - 10 * d.removed;
}

Action HeuristicShrinkerAction(const GameState& state) {
  return BestScoring(state, HeuristicShrinkerScore);
}

Action HeuristicAmplifierAction(const GameState& state) {
  return BestScoring(state, HeuristicAmplifierScore);
}

Action HeuristicAction(const GameState& state, Role role) {
  return role == Role::kShrinker ? HeuristicShrinkerAction(state)
                                 : HeuristicAmplifierAction(state);
}

std::optional<Action> GreedyQAction(const QTable& table,
                                    const GameState& state) {
  const QTable::ActionValues* values = table.Find(StateKey(state));
  if (values == nullptr) return std::nullopt;
  std::optional<Action> best;
  double best_value = 0.0;
  for (const Action& action : LegalActions(state)) {
    auto it = values->find(EncodeAction(action));
    const double v = it == values->end() ? 0.0 : it->second;
    if (!best || v > best_value) {
      best = action;
      best_value = v;
    }
  }
  return best;
}

Decision GreedyQAgent::Choose(const GameState& state, Role,
                              SeededRandomSource& rng) {
  if (auto action = GreedyQAction(*table_, state)) return {*action, std::nullopt};
  if (fallbacks_) fallbacks_->fetch_add(1, std::memory_order_relaxed);
  return {RandomAction(state, rng), std::nullopt, true};
}

}  // namespace flux
