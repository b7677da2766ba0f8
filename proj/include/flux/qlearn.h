#ifndef FLUX_QLEARN_H_
#define FLUX_QLEARN_H_

// Tabular Q-learning for both FLUX roles with a cyclic curriculum:
//   mode 1  Shrinker learner vs uniform random Amplifier
//   mode 2  Amplifier learner vs uniform random Shrinker
//   mode 3  both learners against each other
//
// Each learner sees the game from its own turns only: a transition runs from
// one of its decision states to its next decision state (or the end of the
// game), with the opponent's ply folded in.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flux/env.h"
#include "flux/qtable.h"
#include "flux/random.h"

namespace flux {

struct TrainConfig {
  double alpha = 0.2;
  double gamma = 0.92;
  double eps_start = 1.0;
  double eps_min = 0.05;
  double eps_decay = 0.9997;
  std::int64_t episodes = 30000;
  std::uint64_t seed = 0;
  double reward_win = 1.0;
  double reward_loss = -1.0;
  double reward_step = 0.0;
  // Episodes per curriculum slot: 1 cycles modes every episode, larger values
  // run blocks of the same mode.
  std::int64_t curriculum_block = 1;

  // Throws std::invalid_argument when a field is out of range.
  void Validate() const;
  // "key=value" lines in a fixed order.
  std::string ToText() const;
  // 16 hex digits of FNV-1a over ToText().
  std::string Digest() const;
};

enum class CurriculumMode { kShrinkerVsRandom = 1, kAmplifierVsRandom = 2,
                            kSelfPlay = 3 };

CurriculumMode ModeForEpisode(std::int64_t episode, const TrainConfig& cfg);

// max(eps_min, eps_start * eps_decay^episode)
double EpsilonAt(std::int64_t episode, const TrainConfig& cfg);

// One Q-learning backup. `next_codes` empty means the transition ended the
// game and the bootstrap term is zero.
void QUpdate(QTable& table, const std::string& key, int code, double reward,
             const std::string& next_key, const std::vector<int>& next_codes,
             const TrainConfig& cfg);

struct EpisodeResult {
  CurriculumMode mode;
  TerminalStatus status;
  int plies = 0;
  double epsilon = 0.0;
};

// Plays one game from the initial state, updating the learning roles' tables.
EpisodeResult RunEpisode(CurriculumMode mode, QTable& shrinker,
                         QTable& amplifier, std::int64_t episode,
                         const TrainConfig& cfg, SeededRandomSource& rng);

struct CurvePoint {
  std::int64_t episode;
  int mode;
  double epsilon;
  Role winner;
  int plies;
  std::size_t states_shrinker;
  std::size_t states_amplifier;
};

struct TrainingResult {
  QTable shrinker{Role::kShrinker};
  QTable amplifier{Role::kAmplifier};
  std::vector<CurvePoint> curve;
};

// Fully determined by cfg. `curve_stride` keeps every n-th episode plus the
// last one.
TrainingResult Train(const TrainConfig& cfg, std::int64_t curve_stride = 1);

// Header plus one record per point:
// episode,mode,epsilon,winner,plies,states_shrinker,states_amplifier
void WriteCurveCsv(std::ostream& out, const std::vector<CurvePoint>& curve);

}  // namespace flux

#endif  // FLUX_QLEARN_H_
