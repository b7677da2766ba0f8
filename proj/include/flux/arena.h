#ifndef FLUX_ARENA_H_
#define FLUX_ARENA_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flux/agents.h"
#include "flux/env.h"
#include "flux/llm.h"
#include "flux/solver.h"

namespace flux {

struct PlyRecord {
  int ply = 0;  // 1-based
  Role role = Role::kShrinker;
  std::string agent;
  GameState before;
  Action action;
  GameState after;
  TerminalStatus status;
  std::optional<MoveAnnotation> annotation;
  bool fallback = false;
};

struct GameRecord {
  std::int64_t game_id = 0;
  std::uint64_t seed = 0;
  std::string p0;  // Shrinker
  std::string p1;  // Amplifier
  std::vector<PlyRecord> plies;
  TerminalStatus outcome;
};

// p0 plays the Shrinker, p1 the Amplifier. Both share one random stream
// seeded with `seed`.
GameRecord PlayGame(Agent& p0, Agent& p1, std::uint64_t seed,
                    std::int64_t game_id = 0);

// Re-applies the recorded actions from the initial state. Returns a
// description of the first disagreement, or nullopt when every ply matches.
std::optional<std::string> ReplayMismatch(const GameRecord& record);

struct MatchStats {
  std::int64_t games = 0;
  std::int64_t wins[2] = {0, 0};  // indexed by Role
  std::int64_t total_plies = 0;
  std::int64_t text_plies = 0;  // plies chosen by annotated (text) agents
  std::int64_t invalid_moves = 0;
  std::int64_t transport_failures = 0;
  std::int64_t fallbacks = 0;
  std::map<std::string, std::int64_t> outcomes;  // by reason

  void Add(const GameRecord& record);
  double win_rate(Role role) const;
  double avg_moves() const;
  // Substituted plies over text-agent plies; 0 without text agents.
  double invalid_fraction() const;

  friend bool operator==(const MatchStats&, const MatchStats&) = default;
};

struct MatchupSpec {
  std::string p0_id;
  std::string p1_id;
  AgentFactory p0;
  AgentFactory p1;
  std::int64_t games = 1000;
  std::uint64_t base_seed = 0;
  bool record_transcripts = false;
  int jobs = 1;
};

struct MatchResult {
  MatchStats stats;
  std::vector<GameRecord> records;  // empty unless record_transcripts
};

// Game i uses seed base_seed + i. Games may run on `jobs` threads; results
// are aggregated in game order, so the stats do not depend on jobs.
MatchResult RunMatchup(const MatchupSpec& spec);

// Normal-approximation 95% interval, clamped to [0, 1].
std::pair<double, double> ComputeCi(std::int64_t wins, std::int64_t games);

// Transcripts are JSON lines: a "game" header, one "ply" object per ply, and
// a "result" line per game.
void WriteTranscript(std::ostream& out, const GameRecord& record);
// Throws FormatError (line numbers are 1-based within the stream).
std::vector<GameRecord> ReadTranscripts(std::istream& in);

enum class FailureTag { kSumBlindness, kRowMiscount, kMyopia, kFormat };
std::string_view FailureTagName(FailureTag tag);

// Tags per ply, in ply order:
//   SumBlindness  an unsubstituted Amplify lost on the spot by pushing the sum
//                 past 20 while some legal move did not lose immediately
//   RowMiscount   the reply named a cell index that does not exist
//   Myopia        an unsubstituted move from a solver-won position into a
//                 solver-lost one
//   Format        the reply did not match the grammar
std::vector<std::vector<FailureTag>> ClassifyFailures(const GameRecord& record,
                                                      const SolvedGame& solved);

// Lazily shared resources for resolving agent identifiers.
struct AgentContext {
  std::shared_ptr<const SolvedGame> solved;  // built on first "optimal"
  std::shared_ptr<ExchangeLog> llm_log;
  std::istream* human_in = nullptr;
  std::ostream* human_out = nullptr;
  bool verbose = false;
};

// Identifiers: random, heuristic, optimal, human, rl:<qtable-path>,
// llm:scripted=<reply-file>, llm:http, llm:http=<model>.
// Throws ConfigError for unknown ids, unreadable tables, or a table whose
// role does not match `seat`.
AgentFactory MakeAgentFactory(const std::string& id, Role seat,
                              AgentContext& ctx);

struct Table2Row {
  std::string matchup;
  Role evaluated;
  std::string p0;  // "random", "heuristic" or "rl"
  std::string p1;
  double published_win_pct;
  double published_avg_moves;
};

// The eight published matchups, in published order.
const std::vector<Table2Row>& Table2Rows();

struct Table2Result {
  Table2Row row;
  MatchStats stats;
};

// Every row uses the same per-game seeds (seed + game index). Throws
// ConfigError when a table cannot be loaded.
std::vector<Table2Result> ReproduceTable2(
    const std::filesystem::path& shrinker_table,
    const std::filesystem::path& amplifier_table, std::int64_t games,
    std::uint64_t seed, int jobs = 1);

// matchup,role,wins,games,win_rate,ci_low,ci_high,avg_moves,invalid_pct
void WriteStatsCsvHeader(std::ostream& out);
void WriteStatsCsvRow(std::ostream& out, const std::string& matchup, Role role,
                      const MatchStats& stats);

void WriteTable2Report(std::ostream& out,
                       const std::vector<Table2Result>& results);

}  // namespace flux

#endif  // FLUX_ARENA_H_
