// flux: train, solve, evaluate and inspect FLUX agents.
//
// Exit codes: 0 success, 1 verification mismatch, 2 usage or config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flux/agents.h"
#include "flux/arena.h"
#include "flux/env.h"
#include "flux/human.h"
#include "flux/llm.h"
#include "flux/qlearn.h"
#include "flux/solver.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kUsage = 2;

// Ordered key=value echo of a run's effective configuration.
using RunConfig = std::vector<std::pair<std::string, std::string>>;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path PrepareOutputDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = fs::path(dir) / ".write_probe";
  std::ofstream out(probe);
  if (ec || !out) throw UsageError("output directory is not writable: " + dir);
  out.close();
  fs::remove(probe, ec);
  return dir;
}

std::ofstream OpenOutput(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  return out;
}

void WriteRunConfig(const fs::path& dir, const RunConfig& cfg) {
  std::ofstream out = OpenOutput(dir / "run.cfg");
  for (const auto& [key, value] : cfg) out << key << '=' << value << '\n';
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
  flux::TrainConfig cfg;
  std::string out_dir;
  std::int64_t curve_stride = 1;
};

int CmdTrain(const TrainArgs& args) {
  args.cfg.Validate();
  const fs::path dir = PrepareOutputDir(args.out_dir);
  const flux::TrainingResult result = flux::Train(args.cfg, args.curve_stride);

  flux::SaveQTable(result.shrinker, dir / "q_shrinker");
  flux::SaveQTable(result.amplifier, dir / "q_amplifier");
  {
    std::ofstream curve = OpenOutput(dir / "training_curve.csv");
    flux::WriteCurveCsv(curve, result.curve);
  }

  const double final_eps =
      args.cfg.episodes > 0 ? flux::EpsilonAt(args.cfg.episodes - 1, args.cfg)
                            : args.cfg.eps_start;
  std::ostringstream summary;
  summary << "episodes=" << args.cfg.episodes << '\n'
          << "final_epsilon=" << flux::FormatShortest(final_eps) << '\n'
          << "states_shrinker=" << result.shrinker.size() << '\n'
          << "states_amplifier=" << result.amplifier.size() << '\n'
          << "config_digest=" << args.cfg.Digest() << '\n';
  OpenOutput(dir / "summary.txt") << summary.str();
  std::cout << summary.str();

  RunConfig run = {{"subcommand", "train"},
                   {"curve_stride", std::to_string(args.curve_stride)}};
  std::istringstream cfg_text(args.cfg.ToText());
  for (std::string line; std::getline(cfg_text, line);) {
    const auto eq = line.find('=');
    run.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  WriteRunConfig(dir, run);
  return kOk;
}

// --- solve -------------------------------------------------------------------

struct SolveArgs {
  std::string out_dir;
  bool rational = false;
};

int CmdSolve(const SolveArgs& args) {
  const fs::path dir = PrepareOutputDir(args.out_dir);
  const flux::SolvedGame solved = flux::Solve();
  const flux::ReachableSet reachable = flux::ReachableStates();
  OpenOutput(dir / "solved.txt") << flux::SerializeSolvedGame(solved);

  const flux::SolvedValue root = solved.At(flux::InitialState());
  const flux::RandomPlayTable random_play;
  std::ostringstream summary;
  summary << "reachable_ongoing=" << reachable.ongoing.size() << '\n'
          << "reachable_shrinker_to_move=" << reachable.shrinker_to_move << '\n'
          << "reachable_amplifier_to_move=" << reachable.amplifier_to_move
          << '\n'
          << "reachable_terminal=" << reachable.terminal << '\n'
          << "initial_winner=" << flux::RoleName(root.winner) << '\n'
          << "initial_depth=" << root.depth << '\n'
          << "random_play_shrinker_win="
          << flux::FormatShortest(
                 random_play.ShrinkerWinProbability(flux::InitialState()))
          << '\n';
  if (args.rational) {
    summary << "random_play_shrinker_win_exact="
            << flux::ExactShrinkerWinProbability() << '\n';
  }
  OpenOutput(dir / "summary.txt") << summary.str();
  std::cout << summary.str();
  WriteRunConfig(dir, {{"subcommand", "solve"},
                       {"rational", args.rational ? "true" : "false"}});
  return kOk;
}

// --- tournament ----------------------------------------------------------------

struct TournamentArgs {
  std::string p0 = "random";
  std::string p1 = "random";
  std::int64_t games = 1000;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool transcripts = false;
  bool log_llm = false;
  bool verbose = false;
  int jobs = 1;
};

int CmdTournament(const TournamentArgs& args) {
  if (args.games < 1) throw UsageError("--games must be at least 1");
  const fs::path dir = PrepareOutputDir(args.out_dir);
  std::ofstream llm_log_file;
  flux::AgentContext ctx;
  ctx.verbose = args.verbose;
  ctx.human_in = &std::cin;
  ctx.human_out = &std::cout;
  if (args.log_llm) {
    llm_log_file = OpenOutput(dir / "llm_exchanges.jsonl");
    ctx.llm_log = std::make_shared<flux::ExchangeLog>(llm_log_file);
  }

  flux::MatchupSpec spec;
  spec.p0_id = args.p0;
  spec.p1_id = args.p1;
  spec.p0 = flux::MakeAgentFactory(args.p0, flux::Role::kShrinker, ctx);
  spec.p1 = flux::MakeAgentFactory(args.p1, flux::Role::kAmplifier, ctx);
  spec.games = args.games;
  spec.base_seed = args.seed;
  spec.record_transcripts = args.transcripts;
  const bool interactive = args.p0 == "human" || args.p1 == "human";
  spec.jobs = interactive ? 1 : args.jobs;

  const flux::MatchResult result = flux::RunMatchup(spec);
  const std::string label = args.p0 + " vs " + args.p1;
  std::ostringstream csv;
  flux::WriteStatsCsvHeader(csv);
  flux::WriteStatsCsvRow(csv, label, flux::Role::kShrinker, result.stats);
  flux::WriteStatsCsvRow(csv, label, flux::Role::kAmplifier, result.stats);
  OpenOutput(dir / "stats.csv") << csv.str();
  std::cout << csv.str();
  if (result.stats.fallbacks > 0) {
    std::cout << "unseen-state fallbacks: " << result.stats.fallbacks << '\n';
  }
  if (result.stats.text_plies > 0) {
    std::cout << "text-agent plies: " << result.stats.text_plies
              << ", invalid: " << result.stats.invalid_moves
              << " (transport failures: " << result.stats.transport_failures
              << ")\n";
  }
  if (args.transcripts) {
    std::ofstream out = OpenOutput(dir / "transcripts.jsonl");
    for (const auto& record : result.records) flux::WriteTranscript(out, record);
  }
  WriteRunConfig(dir, {{"subcommand", "tournament"},
                       {"p0", args.p0},
                       {"p1", args.p1},
                       {"games", std::to_string(args.games)},
                       {"seed", std::to_string(args.seed)},
                       {"first_mover", "shrinker"},
                       {"transcripts", args.transcripts ? "true" : "false"},
                       {"log_llm", args.log_llm ? "true" : "false"},
                       {"jobs", std::to_string(spec.jobs)}});
  return kOk;
}

// --- table2 ------------------------------------------------------------------

struct Table2Args {
  std::string shrinker_table;
  std::string amplifier_table;
  std::int64_t games = 1000;
  std::uint64_t seed = 0;
  std::string out_dir;
  int jobs = 1;
};

int CmdTable2(const Table2Args& args) {
  if (args.games < 1) throw UsageError("--games must be at least 1");
  const fs::path dir = PrepareOutputDir(args.out_dir);
  const auto results = flux::ReproduceTable2(
      args.shrinker_table, args.amplifier_table, args.games, args.seed,
      args.jobs);

  // Self-play cross-check, reported beside the table.
  flux::AgentContext ctx;
  flux::MatchupSpec rl_vs_rl;
  rl_vs_rl.p0 = flux::MakeAgentFactory("rl:" + args.shrinker_table,
                                       flux::Role::kShrinker, ctx);
  rl_vs_rl.p1 = flux::MakeAgentFactory("rl:" + args.amplifier_table,
                                       flux::Role::kAmplifier, ctx);
  rl_vs_rl.games = args.games;
  rl_vs_rl.base_seed = args.seed;
  rl_vs_rl.jobs = args.jobs;
  const flux::MatchStats eq = flux::RunMatchup(rl_vs_rl).stats;
  const auto full_length = eq.outcomes.count("tiebreak_at_least_3")
                               ? eq.outcomes.at("tiebreak_at_least_3")
                               : 0;
  const auto short_tiebreak = eq.outcomes.count("tiebreak_fewer_than_3")
                                  ? eq.outcomes.at("tiebreak_fewer_than_3")
                                  : 0;

  std::ostringstream report;
  flux::WriteTable2Report(report, results);
  report << "\nRL vs. RL: Shrinker wins "
         << 100.0 * eq.win_rate(flux::Role::kShrinker) << "%, games reaching ply "
         << flux::kMaxPlies << ": "
         << 100.0 * static_cast<double>(full_length + short_tiebreak) /
                static_cast<double>(eq.games)
         << "% (published: 0% Shrinker wins, every game to ply 15)\n";
  OpenOutput(dir / "table2.txt") << report.str();
  std::cout << report.str();

  std::ostringstream csv;
  flux::WriteStatsCsvHeader(csv);
  for (const auto& r : results) {
    flux::WriteStatsCsvRow(csv, r.row.matchup, r.row.evaluated, r.stats);
  }
  flux::WriteStatsCsvRow(csv, "RL vs. RL", flux::Role::kShrinker, eq);
  OpenOutput(dir / "table2.csv") << csv.str();
  WriteRunConfig(dir, {{"subcommand", "table2"},
                       {"shrinker_table", args.shrinker_table},
                       {"amplifier_table", args.amplifier_table},
                       {"games", std::to_string(args.games)},
                       {"seed", std::to_string(args.seed)},
                       {"first_mover", "shrinker"}});
  return kOk;
}

// --- play --------------------------------------------------------------------

struct PlayArgs {
  std::string p0 = "human";
  std::string p1 = "heuristic";
  std::uint64_t seed = 0;
};

int CmdPlay(const PlayArgs& args) {
  flux::AgentContext ctx;
  ctx.human_in = &std::cin;
  ctx.human_out = &std::cout;
  auto p0 = flux::MakeAgentFactory(args.p0, flux::Role::kShrinker, ctx)(args.seed);
  auto p1 = flux::MakeAgentFactory(args.p1, flux::Role::kAmplifier, ctx)(args.seed);
  std::cout << flux::RulesText() << '\n';
  const flux::GameRecord record = flux::PlayGame(*p0, *p1, args.seed);
  for (const auto& ply : record.plies) {
    std::cout << "ply " << ply.ply << ": " << flux::RoleName(ply.role) << " ("
              << ply.agent << ") " << flux::ToString(ply.action) << " -> "
              << flux::StateKey(ply.after) << '\n';
  }
  std::cout << "\n*** " << flux::RoleName(record.outcome.winner())
            << " wins (" << record.outcome.reason() << ") after "
            << record.plies.size() << " plies ***\n";
  return kOk;
}

// --- replay / classify -------------------------------------------------------

std::vector<flux::GameRecord> ReadTranscriptFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  return flux::ReadTranscripts(in);
}

int CmdReplay(const std::string& path) {
  const auto records = ReadTranscriptFile(path);
  int bad = 0;
  for (const auto& record : records) {
    if (auto mismatch = flux::ReplayMismatch(record)) {
      std::cout << "game " << record.game_id << ": " << *mismatch << '\n';
      ++bad;
    }
  }
  std::cout << records.size() - bad << "/" << records.size()
            << " games replay exactly\n";
  return bad == 0 ? kOk : kMismatch;
}

int CmdClassify(const std::string& path, const std::string& annotated_path) {
  const auto records = ReadTranscriptFile(path);
  const flux::SolvedGame solved = flux::Solve();
  std::map<std::string, std::int64_t> histogram;
  for (flux::FailureTag tag :
       {flux::FailureTag::kSumBlindness, flux::FailureTag::kRowMiscount,
        flux::FailureTag::kMyopia, flux::FailureTag::kFormat}) {
    histogram[std::string(flux::FailureTagName(tag))] = 0;
  }
  std::ofstream annotated;
  if (!annotated_path.empty()) annotated = OpenOutput(annotated_path);
  for (const auto& record : records) {
    if (auto mismatch = flux::ReplayMismatch(record)) {
      std::cerr << "game " << record.game_id << " does not replay: " << *mismatch
                << '\n';
      return kMismatch;
    }
    const auto tags = flux::ClassifyFailures(record, solved);
    for (std::size_t i = 0; i < tags.size(); ++i) {
      for (flux::FailureTag tag : tags[i]) {
        ++histogram[std::string(flux::FailureTagName(tag))];
      }
      if (annotated.is_open()) {
        nlohmann::json line = {{"game", record.game_id},
                               {"ply", record.plies[i].ply},
                               {"role", flux::RoleName(record.plies[i].role)},
                               {"tags", nlohmann::json::array()}};
        for (flux::FailureTag tag : tags[i]) {
          line["tags"].push_back(flux::FailureTagName(tag));
        }
        annotated << line.dump() << '\n';
      }
    }
  }
  for (const auto& [tag, n] : histogram) std::cout << tag << ": " << n << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FLUX game engine, solver, Q-learning trainer and arena"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train both Q-tables");
  train_cmd->add_option("-o,--out", train.out_dir, "output directory")->required();
  train_cmd->add_option("--episodes", train.cfg.episodes, "training episodes");
  train_cmd->add_option("--seed", train.cfg.seed, "random seed");
  train_cmd->add_option("--alpha", train.cfg.alpha, "learning rate");
  train_cmd->add_option("--gamma", train.cfg.gamma, "discount");
  train_cmd->add_option("--eps-start", train.cfg.eps_start);
  train_cmd->add_option("--eps-min", train.cfg.eps_min);
  train_cmd->add_option("--eps-decay", train.cfg.eps_decay, "per-episode decay");
  train_cmd->add_option("--reward-win", train.cfg.reward_win);
  train_cmd->add_option("--reward-loss", train.cfg.reward_loss);
  train_cmd->add_option("--reward-step", train.cfg.reward_step);
  train_cmd->add_option("--curriculum-block", train.cfg.curriculum_block,
                        "episodes per curriculum slot (1 = round robin)");
  train_cmd->add_option("--curve-stride", train.curve_stride,
                        "log every n-th episode to the training curve");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "solve the game exactly");
  solve_cmd->add_option("-o,--out", solve.out_dir, "output directory")->required();
  solve_cmd->add_flag("--rational", solve.rational,
                      "also print the random-play probability as a fraction");

  TournamentArgs tour;
  auto* tour_cmd = app.add_subcommand("tournament", "play one matchup");
  tour_cmd->add_option("--p0", tour.p0, "Shrinker agent id");
  tour_cmd->add_option("--p1", tour.p1, "Amplifier agent id");
  tour_cmd->add_option("--games", tour.games);
  tour_cmd->add_option("--seed", tour.seed, "base seed; game i uses seed + i");
  tour_cmd->add_option("-o,--out", tour.out_dir, "output directory")->required();
  tour_cmd->add_flag("--transcripts", tour.transcripts, "write transcripts.jsonl");
  tour_cmd->add_flag("--log-llm", tour.log_llm, "write llm_exchanges.jsonl");
  tour_cmd->add_flag("-v,--verbose", tour.verbose);
  tour_cmd->add_option("--jobs", tour.jobs, "concurrent games")->check(CLI::PositiveNumber);

  Table2Args t2;
  auto* t2_cmd = app.add_subcommand("table2", "run the eight baseline matchups");
  t2_cmd->add_option("--shrinker-table", t2.shrinker_table)->required();
  t2_cmd->add_option("--amplifier-table", t2.amplifier_table)->required();
  t2_cmd->add_option("--games", t2.games);
  t2_cmd->add_option("--seed", t2.seed);
  t2_cmd->add_option("-o,--out", t2.out_dir, "output directory")->required();
  t2_cmd->add_option("--jobs", t2.jobs)->check(CLI::PositiveNumber);

  PlayArgs play;
  auto* play_cmd = app.add_subcommand("play", "play interactively");
  play_cmd->add_option("--p0", play.p0, "Shrinker agent id");
  play_cmd->add_option("--p1", play.p1, "Amplifier agent id");
  play_cmd->add_option("--seed", play.seed);

  std::string replay_path;
  auto* replay_cmd = app.add_subcommand("replay", "verify a transcript");
  replay_cmd->add_option("transcript", replay_path)->required();

  std::string classify_path;
  std::string classify_out;
  auto* classify_cmd =
      app.add_subcommand("classify", "tag text-agent failures in a transcript");
  classify_cmd->add_option("transcript", classify_path)->required();
  classify_cmd->add_option("-o,--out", classify_out, "per-ply tags as JSON lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train_cmd) return CmdTrain(train);
    if (*solve_cmd) return CmdSolve(solve);
    if (*tour_cmd) return CmdTournament(tour);
    if (*t2_cmd) return CmdTable2(t2);
    if (*play_cmd) return CmdPlay(play);
    if (*replay_cmd) return CmdReplay(replay_path);
    if (*classify_cmd) return CmdClassify(classify_path, classify_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const flux::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  } catch (const flux::FormatError& e) {
    std::cerr << "error: malformed input, " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
