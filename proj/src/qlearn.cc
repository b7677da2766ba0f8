#include "flux/qlearn.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "flux/agents.h"

namespace flux {

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(alpha > 0 && alpha <= 1, "alpha must be in (0, 1]");
  require(gamma >= 0 && gamma <= 1, "gamma must be in [0, 1]");
  require(eps_min >= 0 && eps_min <= eps_start && eps_start <= 1,
          "need 0 <= eps_min <= eps_start <= 1");
  require(eps_decay > 0 && eps_decay <= 1, "eps_decay must be in (0, 1]");
  require(episodes >= 0, "episodes must be non-negative");
  require(curriculum_block >= 1, "curriculum_block must be positive");
}

std::string TrainConfig::ToText() const {
  std::ostringstream out;
  out << "alpha=" << FormatShortest(alpha) << '\n'
      << "gamma=" << FormatShortest(gamma) << '\n'
      << "eps_start=" << FormatShortest(eps_start) << '\n'
      << "eps_min=" << FormatShortest(eps_min) << '\n'
      << "eps_decay=" << FormatShortest(eps_decay) << '\n'
      << "episodes=" << episodes << '\n'
      << "seed=" << seed << '\n'
      << "reward_win=" << FormatShortest(reward_win) << '\n'
      << "reward_loss=" << FormatShortest(reward_loss) << '\n'
      << "reward_step=" << FormatShortest(reward_step) << '\n'
      << "curriculum_block=" << curriculum_block << '\n';
  return out.str();
}

std::string TrainConfig::Digest() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : ToText()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

CurriculumMode ModeForEpisode(std::int64_t episode, const TrainConfig& cfg) {
  return static_cast<CurriculumMode>((episode / cfg.curriculum_block) % 3 + 1);
}

double EpsilonAt(std::int64_t episode, const TrainConfig& cfg) {
  return std::max(cfg.eps_min,
                  cfg.eps_start * std::pow(cfg.eps_decay,
                                           static_cast<double>(episode)));
}

void QUpdate(QTable& table, const std::string& key, int code, double reward,
             const std::string& next_key, const std::vector<int>& next_codes,
             const TrainConfig& cfg) {
  double bootstrap = 0.0;
  if (!next_codes.empty()) {
    bootstrap = table.Get(next_key, next_codes.front());
    for (int c : next_codes) bootstrap = std::max(bootstrap, table.Get(next_key, c));
  }
  const double old = table.Get(key, code);
  table.Set(key, code,
            old + cfg.alpha * (reward + cfg.gamma * bootstrap - old));
}

namespace {

struct PendingMove {
  std::string key;
  int code = -1;
};

std::vector<int> Codes(const std::vector<Action>& actions) {
  std::vector<int> codes;
  codes.reserve(actions.size());
  for (const Action& a : actions) codes.push_back(EncodeAction(a));
  return codes;
}

bool Learns(CurriculumMode mode, Role role) {
  switch (mode) {
    case CurriculumMode::kShrinkerVsRandom: return role == Role::kShrinker;
    case CurriculumMode::kAmplifierVsRandom: return role == Role::kAmplifier;
    case CurriculumMode::kSelfPlay: return true;
  }
  return false;
}

// One draw decides explore vs exploit; exploring draws again for the move.
Action EpsilonGreedy(const QTable& table, const std::string& key,
                     const std::vector<Action>& actions, double epsilon,
                     SeededRandomSource& rng) {
  if (rng.Uniform() < epsilon) return actions[rng.Below(actions.size())];
  const Action* best = &actions.front();
  double best_value = table.Get(key, EncodeAction(*best));
  for (const Action& a : actions) {
    const double v = table.Get(key, EncodeAction(a));
    if (v > best_value) {
      best = &a;
      best_value = v;
    }
  }
  return *best;
}

}  // namespace

EpisodeResult RunEpisode(CurriculumMode mode, QTable& shrinker,
                         QTable& amplifier, std::int64_t episode,
                         const TrainConfig& cfg, SeededRandomSource& rng) {
  EpisodeResult result{mode, TerminalStatus(), 0, EpsilonAt(episode, cfg)};
  QTable* tables[2] = {&shrinker, &amplifier};
  PendingMove pending[2];

  GameState state = InitialState();
  TerminalStatus status = EvaluateStatus(state);
  while (status.ongoing()) {
    const Role role = RoleToMove(state);
    const int r = static_cast<int>(role);
    const std::vector<Action> actions = LegalActions(state);
    Action action;
    if (Learns(mode, role)) {
      QTable& table = *tables[r];
      std::string key = StateKey(state);
      if (pending[r].code >= 0) {
        QUpdate(table, pending[r].key, pending[r].code, cfg.reward_step, key,
                Codes(actions), cfg);
      }
      action = EpsilonGreedy(table, key, actions, result.epsilon, rng);
      pending[r] = {std::move(key), EncodeAction(action)};
    } else {
      action = actions[rng.Below(actions.size())];
    }
    std::tie(state, status) = Apply(state, action);
    ++result.plies;
  }

  const Role winner = status.winner();
  for (Role role : {Role::kShrinker, Role::kAmplifier}) {
    const int r = static_cast<int>(role);
    if (!Learns(mode, role) || pending[r].code < 0) continue;
    const double reward = role == winner ? cfg.reward_win : cfg.reward_loss;
    QUpdate(*tables[r], pending[r].key, pending[r].code, reward, {}, {}, cfg);
  }
  result.status = status;
  return result;
}

TrainingResult Train(const TrainConfig& cfg, std::int64_t curve_stride) {
  cfg.Validate();
  if (curve_stride < 1) throw std::invalid_argument("curve_stride must be >= 1");
  TrainingResult out;
  SeededRandomSource rng(cfg.seed);
  for (std::int64_t i = 0; i < cfg.episodes; ++i) {
    const CurriculumMode mode = ModeForEpisode(i, cfg);
    const EpisodeResult ep =
        RunEpisode(mode, out.shrinker, out.amplifier, i, cfg, rng);
    if (i % curve_stride == 0 || i + 1 == cfg.episodes) {
      out.curve.push_back({i, static_cast<int>(mode), ep.epsilon,
                           ep.status.winner(), ep.plies, out.shrinker.size(),
                           out.amplifier.size()});
    }
  }
  const std::string digest = cfg.Digest();
  out.shrinker.set_metadata(cfg.episodes, digest);
  out.amplifier.set_metadata(cfg.episodes, digest);
  return out;
}

void WriteCurveCsv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "episode,mode,epsilon,winner,plies,states_shrinker,states_amplifier\n";
  for (const CurvePoint& p : curve) {
    out << p.episode << ',' << p.mode << ',' << FormatShortest(p.epsilon) << ','
        << RoleName(p.winner) << ',' << p.plies << ',' << p.states_shrinker
        << ',' << p.states_amplifier << '\n';
  }
}

}  // namespace flux
