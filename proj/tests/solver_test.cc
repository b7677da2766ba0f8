#include "flux/solver.h"

#include <cmath>
#include <map>
#include <set>

#include "doctest.h"

namespace flux {
namespace {

GameState S(std::vector<int> cells, int moves) { return {std::move(cells), moves}; }

// Independent oracle: breadth-first layers by ply, then a bottom-up sweep from
// the last layer. Shares only the rules engine with the library.
struct LayeredOracle {
  std::vector<std::map<std::string, GameState>> layers;  // ongoing, by ply
  std::set<std::string> terminals;
  std::map<std::string, SolvedValue> value;
  std::map<std::string, double> p_shrinker;

  LayeredOracle() {
    layers.resize(kMaxPlies);
    layers[0][StateKey(InitialState())] = InitialState();
    for (int m = 0; m < kMaxPlies; ++m) {
      for (const auto& [key, s] : layers[m]) {
        for (const Action& a : LegalActions(s)) {
          const auto [next, status] = Apply(s, a);
          if (status.terminal()) {
            terminals.insert(StateKey(next));
          } else {
            layers[m + 1][StateKey(next)] = next;
          }
        }
      }
    }
    for (int m = kMaxPlies - 1; m >= 0; --m) {
      for (const auto& [key, s] : layers[m]) {
        const Role mover = RoleToMove(s);
        std::optional<int> best_win, worst_loss;
        double p = 0;
        const auto actions = LegalActions(s);
        for (const Action& a : actions) {
          const auto [next, status] = Apply(s, a);
          SolvedValue v{};
          double pn = 0;
          if (status.terminal()) {
            v = {status.winner(), 0};
            pn = status.winner() == Role::kShrinker ? 1.0 : 0.0;
          } else {
            v = value.at(StateKey(next));
            pn = p_shrinker.at(StateKey(next));
          }
          p += pn;
          if (v.winner == mover) {
            if (!best_win || v.depth + 1 < *best_win) best_win = v.depth + 1;
          } else {
            if (!worst_loss || v.depth + 1 > *worst_loss) worst_loss = v.depth + 1;
          }
        }
        value[key] = best_win ? SolvedValue{mover, *best_win}
                              : SolvedValue{Opponent(mover), *worst_loss};
        p_shrinker[key] = p / actions.size();
      }
    }
  }
};

const LayeredOracle& Oracle() {
  static const LayeredOracle oracle;
  return oracle;
}

const std::shared_ptr<const SolvedGame>& Solved() {
  static const auto solved = std::make_shared<const SolvedGame>(Solve());
  return solved;
}

TEST_CASE("reachable state counts match the oracle") {
  const ReachableSet r = ReachableStates();
  std::size_t ongoing = 0;
  std::int64_t shrinker = 0;
  for (const auto& layer : Oracle().layers) {
    ongoing += layer.size();
    for (const auto& [k, s] : layer) {
      if (RoleToMove(s) == Role::kShrinker) ++shrinker;
    }
  }
  CHECK(r.ongoing.size() == ongoing);
  CHECK(r.shrinker_to_move == shrinker);
  CHECK(r.amplifier_to_move == static_cast<std::int64_t>(ongoing) - shrinker);
  CHECK(r.terminal == static_cast<std::int64_t>(Oracle().terminals.size()));
  CHECK(r.ongoing.size() == 8410);
  CHECK(r.shrinker_to_move == 4426);
  CHECK(r.amplifier_to_move == 3984);
  CHECK(Solved()->size() == 8410);
  CHECK(Solved()->reachable_count(Role::kShrinker) == 4426);
}

TEST_CASE("solver agrees with the layered oracle everywhere") {
  const SolvedGame& solved = *Solved();
  for (const auto& [key, v] : Oracle().value) {
    CHECK(solved.At(ParseStateKey(key)) == v);
  }
  CHECK(solved.At(InitialState()) == SolvedValue{Role::kAmplifier, 15});
}

TEST_CASE("solver examples") {
  // Amplifying the 12 pushes the sum to 27 at once.
  const SolvedGame local = Solve(S({12, 1, 2}, 5));
  CHECK(local.At(S({12, 1, 2}, 5)) == SolvedValue{Role::kAmplifier, 1});
  CHECK(OptimalAction(local, S({12, 1, 2}, 5)) == Action{0, Op::kAmplify});
  // The Shrinker finishes [1, 4] by draining the 1.
  const SolvedGame two = Solve(S({1, 4}, 4));
  CHECK(two.At(S({1, 4}, 4)) == SolvedValue{Role::kShrinker, 1});
  CHECK(OptimalAction(two, S({1, 4}, 4)) == Action{0, Op::kDrain});
  // Terminal states answer from their status.
  CHECK(Solved()->Lookup(S({4}, 6)) == SolvedValue{Role::kShrinker, 0});
  CHECK(Solved()->Lookup(S({2, 2, 2}, 15)) == SolvedValue{Role::kAmplifier, 0});
  CHECK(Solved()->Lookup(S({19}, 3)) == SolvedValue{Role::kShrinker, 0});
  CHECK_FALSE(Solved()->Lookup(S({7, 7}, 1)).has_value());
  CHECK_THROWS_AS(Solved()->At(S({7, 7}, 1)), StateError);
  CHECK_THROWS_AS(OptimalAction(*Solved(), S({4}, 6)), StateError);
}

TEST_CASE("values are bounded and self-consistent") {
  const SolvedGame& solved = *Solved();
  for (const auto& [s, v] : solved.SortedEntries()) {
    CHECK(v.depth >= 1);
    CHECK(v.depth <= kMaxPlies - s.moves_played);
    // One-step Bellman consistency against the stored children.
    const Role mover = RoleToMove(s);
    bool any_win = false;
    int best = 1000, worst = -1;
    for (const Action& a : LegalActions(s)) {
      const SolvedValue child = solved.At(Apply(s, a).first);
      if (child.winner == mover) {
        any_win = true;
        best = std::min(best, child.depth + 1);
      } else {
        worst = std::max(worst, child.depth + 1);
      }
    }
    CHECK(v.winner == (any_win ? mover : Opponent(mover)));
    CHECK(v.depth == (any_win ? best : worst));
  }
}

TEST_CASE("optimal play realizes the solved value") {
  const SolvedGame& solved = *Solved();
  const auto entries = solved.SortedEntries();
  SeededRandomSource pick(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& [start, value] = entries[pick.Below(entries.size())];
    GameState s = start;
    TerminalStatus status;
    int plies = 0;
    while (status.ongoing()) {
      std::tie(s, status) = Apply(s, OptimalAction(solved, s));
      ++plies;
    }
    CHECK(status.winner() == value.winner);
    CHECK(plies == value.depth);
  }
}

TEST_CASE("the solved winner beats any opponent") {
  const SolvedGame& solved = *Solved();
  const auto entries = solved.SortedEntries();
  SeededRandomSource rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto& [start, value] = entries[rng.Below(entries.size())];
    GameState s = start;
    TerminalStatus status;
    int plies = 0;
    while (status.ongoing()) {
      const Action a = RoleToMove(s) == value.winner ? OptimalAction(solved, s)
                                                     : RandomAction(s, rng);
      std::tie(s, status) = Apply(s, a);
      ++plies;
    }
    CHECK(status.winner() == value.winner);
    CHECK(plies <= value.depth);
  }
}

TEST_CASE("solving is deterministic") {
  const SolvedGame again = Solve();
  CHECK(again == *Solved());
  const std::string text = SerializeSolvedGame(again);
  CHECK(text == SerializeSolvedGame(*Solved()));
  CHECK(text.rfind("#kind=solved\n#root=2,1,3,1,2|0\n#entries=8410\n", 0) == 0);
}

TEST_CASE("random-play probability") {
  const RandomPlayTable table;
  const double p = table.ShrinkerWinProbability(InitialState());
  CHECK(p == doctest::Approx(Oracle().p_shrinker.at(StateKey(InitialState())))
                 .epsilon(1e-12));
  CHECK(p == doctest::Approx(0.29231361218346746).epsilon(1e-12));

  const Rational exact = ExactShrinkerWinProbability();
  CHECK(exact == Rational("156377851717220664978677083/"
                          "534966026895360000000000000"));
  CHECK(std::abs(exact.convert_to<double>() - p) < 1e-12);

  // Terminal and off-closure states.
  CHECK(table.ShrinkerWinProbability(S({4}, 3)) == 1.0);
  CHECK(table.ShrinkerWinProbability(S({2, 2, 2}, 15)) == 0.0);
  CHECK(table.ShrinkerWinProbability(S({1, 4}, 14)) == 1.0);
  CHECK(table.ShrinkerWinProbability(S({1, 4, 2}, 14)) ==
        doctest::Approx(1.0 / 6.0));

  for (const auto& [key, q] : Oracle().p_shrinker) {
    const double mine = table.ShrinkerWinProbability(ParseStateKey(key));
    CHECK(std::abs(mine - q) < 1e-12);
  }
}

TEST_CASE("monte carlo random play lands within 3 sigma of the table") {
  const double p = RandomPlayTable().ShrinkerWinProbability(InitialState());
  SeededRandomSource rng(2024);
  const int n = 20000;
  int wins = 0;
  for (int g = 0; g < n; ++g) {
    GameState s = InitialState();
    TerminalStatus status;
    while (status.ongoing()) std::tie(s, status) = Apply(s, RandomAction(s, rng));
    if (status.winner() == Role::kShrinker) ++wins;
  }
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(wins) / n - p) < 3 * sigma);
}

}  // namespace
}  // namespace flux
