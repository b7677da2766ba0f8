#include "flux/arena.h"

#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <istream>
#include <ostream>
#include <thread>

#include "flux/human.h"
#include "json.hpp"

namespace flux {

using nlohmann::json;

GameRecord PlayGame(Agent& p0, Agent& p1, std::uint64_t seed,
                    std::int64_t game_id) {
  GameRecord record;
  record.game_id = game_id;
  record.seed = seed;
  record.p0 = p0.name();
  record.p1 = p1.name();

  SeededRandomSource rng(seed);
  GameState state = InitialState();
  TerminalStatus status = EvaluateStatus(state);
  while (status.ongoing()) {
    const Role role = RoleToMove(state);
    Agent& agent = role == Role::kShrinker ? p0 : p1;
    Decision decision = agent.Choose(state, role, rng);
    auto [next, next_status] = Apply(state, decision.action);
    record.plies.push_back({static_cast<int>(record.plies.size()) + 1, role,
                            agent.name(), state, decision.action, next,
                            next_status, std::move(decision.annotation),
                            decision.fallback});
    state = std::move(next);
    status = next_status;
  }
  record.outcome = status;
  return record;
}

std::optional<std::string> ReplayMismatch(const GameRecord& record) {
  GameState state = InitialState();
  TerminalStatus status = EvaluateStatus(state);
  for (std::size_t i = 0; i < record.plies.size(); ++i) {
    const PlyRecord& ply = record.plies[i];
    const std::string where = "ply " + std::to_string(ply.ply);
    if (ply.ply != static_cast<int>(i) + 1) {
      return where + ": expected ply number " + std::to_string(i + 1);
    }
    if (status.terminal()) return where + ": game already ended";
    if (!(ply.before == state)) {
      return where + ": recorded state " + StateKey(ply.before) +
             " but replay has " + StateKey(state);
    }
    if (ply.role != RoleToMove(state)) return where + ": wrong role to move";
    if (ply.action.index < 0 || ply.action.index >= state.size()) {
      return where + ": action index out of range";
    }
    std::tie(state, status) = Apply(state, ply.action);
    if (!(ply.after == state)) {
      return where + ": recorded result " + StateKey(ply.after) +
             " but replay gives " + StateKey(state);
    }
    if (!(ply.status == status)) {
      return where + ": recorded status " + std::string(ply.status.reason()) +
             " but replay gives " + std::string(status.reason());
    }
  }
  if (status.ongoing()) return std::string("transcript ends before the game");
  if (!(record.outcome == status)) {
    return "recorded outcome " + std::string(record.outcome.reason()) +
           " but replay gives " + std::string(status.reason());
  }
  return std::nullopt;
}

void MatchStats::Add(const GameRecord& record) {
  ++games;
  ++wins[static_cast<int>(record.outcome.winner())];
  total_plies += static_cast<std::int64_t>(record.plies.size());
  for (const PlyRecord& ply : record.plies) {
    if (ply.fallback) ++fallbacks;
    if (!ply.annotation) continue;
    ++text_plies;
    if (ply.annotation->substituted) ++invalid_moves;
    if (ply.annotation->transport_failure) ++transport_failures;
  }
  ++outcomes[std::string(record.outcome.reason())];
}

namespace {

void Merge(MatchStats& into, const MatchStats& from) {
  into.games += from.games;
  into.wins[0] += from.wins[0];
  into.wins[1] += from.wins[1];
  into.total_plies += from.total_plies;
  into.text_plies += from.text_plies;
  into.invalid_moves += from.invalid_moves;
  into.transport_failures += from.transport_failures;
  into.fallbacks += from.fallbacks;
  for (const auto& [reason, n] : from.outcomes) into.outcomes[reason] += n;
}

}  // namespace

double MatchStats::win_rate(Role role) const {
  return games == 0 ? 0.0
                    : static_cast<double>(wins[static_cast<int>(role)]) /
                          static_cast<double>(games);
}

double MatchStats::avg_moves() const {
  return games == 0 ? 0.0
                    : static_cast<double>(total_plies) /
                          static_cast<double>(games);
}

double MatchStats::invalid_fraction() const {
  return text_plies == 0 ? 0.0
                         : static_cast<double>(invalid_moves) /
                               static_cast<double>(text_plies);
}

MatchResult RunMatchup(const MatchupSpec& spec) {
  if (spec.games < 1) throw ConfigError("a matchup needs at least one game");
  const int jobs = std::max(1, spec.jobs);
  std::vector<MatchStats> partial(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  MatchResult result;
  if (spec.record_transcripts) result.records.resize(spec.games);

  auto worker = [&](int w) {
    try {
      for (std::int64_t i = w; i < spec.games; i += jobs) {
        const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(i);
        auto p0 = spec.p0(seed);
        auto p1 = spec.p1(seed);
        GameRecord record = PlayGame(*p0, *p1, seed, i);
        partial[w].Add(record);
        if (spec.record_transcripts) result.records[i] = std::move(record);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const MatchStats& s : partial) Merge(result.stats, s);
  return result;
}

std::pair<double, double> ComputeCi(std::int64_t wins, std::int64_t games) {
  if (games <= 0) return {0.0, 1.0};
  const double p = static_cast<double>(wins) / static_cast<double>(games);
  const double half = 1.96 * std::sqrt(p * (1 - p) / static_cast<double>(games));
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

// --- transcripts -----------------------------------------------------------

void WriteTranscript(std::ostream& out, const GameRecord& record) {
  out << json{{"type", "game"},
              {"game", record.game_id},
              {"seed", record.seed},
              {"p0", record.p0},
              {"p1", record.p1},
              {"first_mover", "shrinker"},
              {"initial", InitialState().cells}}
             .dump()
      << '\n';
  for (const PlyRecord& ply : record.plies) {
    json line = {{"type", "ply"},
                 {"game", record.game_id},
                 {"ply", ply.ply},
                 {"role", RoleName(ply.role)},
                 {"agent", ply.agent},
                 {"cells_before", ply.before.cells},
                 {"moves_before", ply.before.moves_played},
                 {"action", {{"code", EncodeAction(ply.action)},
                             {"text", ToString(ply.action)}}},
                 {"cells_after", ply.after.cells},
                 {"sum_after", ply.after.sum()},
                 {"status", ply.status.reason()},
                 {"fallback", ply.fallback}};
    if (ply.annotation) {
      line["annotation"] = {{"raw_reply", ply.annotation->raw_reply},
                            {"parse", ply.annotation->parse_result},
                            {"valid", ply.annotation->valid()},
                            {"substituted", ply.annotation->substituted},
                            {"transport_failure",
                             ply.annotation->transport_failure}};
    } else {
      line["annotation"] = nullptr;
    }
    out << line.dump() << '\n';
  }
  out << json{{"type", "result"},
              {"game", record.game_id},
              {"winner", record.outcome.ongoing()
                             ? "none"
                             : RoleName(record.outcome.winner())},
              {"reason", record.outcome.reason()},
              {"plies", record.plies.size()}}
             .dump()
      << '\n';
}

std::vector<GameRecord> ReadTranscripts(std::istream& in) {
  std::vector<GameRecord> records;
  std::string text;
  int line_no = 0;
  bool open = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    try {
      const json line = json::parse(text);
      const std::string type = line.at("type").get<std::string>();
      if (type == "game") {
        if (open) throw FormatError(line_no, "game header before previous result");
        GameRecord record;
        record.game_id = line.at("game").get<std::int64_t>();
        record.seed = line.at("seed").get<std::uint64_t>();
        record.p0 = line.at("p0").get<std::string>();
        record.p1 = line.at("p1").get<std::string>();
        records.push_back(std::move(record));
        open = true;
      } else if (type == "ply") {
        if (!open) throw FormatError(line_no, "ply outside a game");
        PlyRecord ply;
        ply.ply = line.at("ply").get<int>();
        ply.role = ParseRole(line.at("role").get<std::string>());
        ply.agent = line.at("agent").get<std::string>();
        ply.before.cells = line.at("cells_before").get<std::vector<int>>();
        ply.before.moves_played = line.at("moves_before").get<int>();
        const int code = line.at("action").at("code").get<int>();
        if (code < 0) throw FormatError(line_no, "negative action code");
        ply.action = {code / 2, code % 2 == 1 ? Op::kDrain : Op::kAmplify};
        ply.after.cells = line.at("cells_after").get<std::vector<int>>();
        ply.after.moves_played = ply.before.moves_played + 1;
        ply.status =
            TerminalStatus(ParseOutcome(line.at("status").get<std::string>()));
        ply.fallback = line.value("fallback", false);
        const json& note = line.at("annotation");
        if (!note.is_null()) {
          MoveAnnotation a;
          a.raw_reply = note.at("raw_reply").get<std::string>();
          a.parse_result = note.at("parse").get<std::string>();
          a.substituted = note.at("substituted").get<bool>();
          a.transport_failure = note.at("transport_failure").get<bool>();
          ply.annotation = std::move(a);
        }
        records.back().plies.push_back(std::move(ply));
      } else if (type == "result") {
        if (!open) throw FormatError(line_no, "result outside a game");
        records.back().outcome =
            TerminalStatus(ParseOutcome(line.at("reason").get<std::string>()));
        open = false;
      } else {
        throw FormatError(line_no, "unknown record type '" + type + "'");
      }
    } catch (const FormatError&) {
      throw;
    } catch (const std::exception& e) {
      throw FormatError(line_no, e.what());
    }
  }
  if (open) throw FormatError(line_no + 1, "transcript ends inside a game");
  return records;
}

// --- failure classification -----------------------------------------------

std::string_view FailureTagName(FailureTag tag) {
  switch (tag) {
    case FailureTag::kSumBlindness: return "SumBlindness";
    case FailureTag::kRowMiscount: return "RowMiscount";
    case FailureTag::kMyopia: return "Myopia";
    case FailureTag::kFormat: return "Format";
  }
  return "?";
}

namespace {

bool LosesOnTheSpot(const TerminalStatus& status, Role mover) {
  return status.terminal() && status.winner() != mover;
}

}  // namespace

std::vector<std::vector<FailureTag>> ClassifyFailures(
    const GameRecord& record, const SolvedGame& solved) {
  std::vector<std::vector<FailureTag>> tags(record.plies.size());
  for (std::size_t i = 0; i < record.plies.size(); ++i) {
    const PlyRecord& ply = record.plies[i];
    std::vector<FailureTag>& out = tags[i];
    if (ply.annotation) {
      if (ply.annotation->parse_result == "format") {
        out.push_back(FailureTag::kFormat);
      } else if (ply.annotation->parse_result == "out_of_range") {
        out.push_back(FailureTag::kRowMiscount);
      }
      if (ply.annotation->substituted) continue;  // the move was not chosen
    }

    if (ply.action.op == Op::kAmplify &&
        ply.status.outcome() == Outcome::kAmplifierSumExceeded &&
        LosesOnTheSpot(ply.status, ply.role)) {
      bool had_alternative = false;
      for (const Action& a : LegalActions(ply.before)) {
        if (!LosesOnTheSpot(Apply(ply.before, a).second, ply.role)) {
          had_alternative = true;
          break;
        }
      }
      if (had_alternative) out.push_back(FailureTag::kSumBlindness);
    }

    const auto before = solved.Lookup(ply.before);
    const auto after = solved.Lookup(ply.after);
    if (before && after && before->winner == ply.role &&
        after->winner != ply.role) {
      out.push_back(FailureTag::kMyopia);
    }
  }
  return tags;
}

// --- agent resolution -----------------------------------------------------

AgentFactory MakeAgentFactory(const std::string& id, Role seat,
                              AgentContext& ctx) {
  if (id == "random") {
    return [](std::uint64_t) { return std::make_unique<RandomAgent>(); };
  }
  if (id == "heuristic") {
    return [](std::uint64_t) { return std::make_unique<HeuristicAgent>(); };
  }
  if (id == "optimal") {
    if (!ctx.solved) ctx.solved = std::make_shared<const SolvedGame>(Solve());
    auto solved = ctx.solved;
    return [solved](std::uint64_t) {
      return std::make_unique<OptimalAgent>(solved);
    };
  }
  if (id == "human") {
    if (ctx.human_in == nullptr || ctx.human_out == nullptr) {
      throw ConfigError("human agent needs an interactive terminal");
    }
    std::istream* in = ctx.human_in;
    std::ostream* out = ctx.human_out;
    return [in, out](std::uint64_t) {
      return std::make_unique<HumanAgent>(*in, *out);
    };
  }
  if (id.rfind("rl:", 0) == 0) {
    const std::string path = id.substr(3);
    std::shared_ptr<const QTable> table;
    try {
      table = std::make_shared<const QTable>(LoadQTable(path));
    } catch (const std::exception& e) {
      throw ConfigError("cannot load Q-table " + path + ": " + e.what());
    }
    if (table->role() != seat) {
      throw ConfigError("Q-table " + path + " was trained for the " +
                        std::string(RoleName(table->role())) +
                        " but is seated as the " + std::string(RoleName(seat)));
    }
    auto fallbacks = std::make_shared<std::atomic<std::int64_t>>(0);
    return [table, fallbacks](std::uint64_t) {
      return std::make_unique<GreedyQAgent>(table, fallbacks);
    };
  }
  if (id.rfind("llm:", 0) == 0) {
    const std::string backend = id.substr(4);
    auto log = ctx.llm_log;
    if (backend.rfind("scripted=", 0) == 0) {
      auto script = std::make_shared<const std::vector<std::optional<std::string>>>(
          LoadScript(backend.substr(9)));
      return [script, log](std::uint64_t seed) {
        return std::make_unique<LlmAgent>(
            std::make_unique<ScriptedBackend>(*script), log, seed);
      };
    }
    if (backend == "http" || backend.rfind("http=", 0) == 0) {
      HttpChatConfig config = HttpChatConfigFromEnv(
          backend == "http" ? std::string_view() : std::string_view(backend).substr(5));
      config.verbose = ctx.verbose;
      HttpChatBackend probe(config);  // validates the endpoint up front
      return [config, log](std::uint64_t seed) {
        return std::make_unique<LlmAgent>(
            std::make_unique<HttpChatBackend>(config), log, seed);
      };
    }
    throw ConfigError("unknown LLM backend '" + backend + "'");
  }
  throw ConfigError("unknown agent '" + id + "'");
}

// --- Benchmark grid --------------------------------------------------------

const std::vector<Table2Row>& Table2Rows() {
  static const std::vector<Table2Row> rows = {
      {"Random vs. Random", Role::kShrinker, "random", "random", 43.3, 12.3},
      {"Heuristic vs. Random", Role::kShrinker, "heuristic", "random", 77.6, 10.2},
      {"RL vs. Random", Role::kShrinker, "rl", "random", 89.5, 11.1},
      {"RL vs. Heuristic", Role::kShrinker, "rl", "heuristic", 0.0, 13.0},
      {"Random vs. Random", Role::kAmplifier, "random", "random", 57.4, 12.0},
      {"Random vs. Heuristic", Role::kAmplifier, "random", "heuristic", 99.5, 8.8},
      {"Random vs. RL", Role::kAmplifier, "random", "rl", 98.8, 11.6},
      {"Heuristic vs. RL", Role::kAmplifier, "heuristic", "rl", 100.0, 15.0},
  };
  return rows;
}

std::vector<Table2Result> ReproduceTable2(
    const std::filesystem::path& shrinker_table,
    const std::filesystem::path& amplifier_table, std::int64_t games,
    std::uint64_t seed, int jobs) {
  AgentContext ctx;
  auto resolve = [&](const std::string& kind, Role seat) {
    if (kind != "rl") return MakeAgentFactory(kind, seat, ctx);
    const auto& path = seat == Role::kShrinker ? shrinker_table : amplifier_table;
    return MakeAgentFactory("rl:" + path.string(), seat, ctx);
  };
  std::vector<Table2Result> results;
  for (const Table2Row& row : Table2Rows()) {
    MatchupSpec spec;
    spec.p0_id = row.p0;
    spec.p1_id = row.p1;
    spec.p0 = resolve(row.p0, Role::kShrinker);
    spec.p1 = resolve(row.p1, Role::kAmplifier);
    spec.games = games;
    spec.base_seed = seed;
    spec.jobs = jobs;
    results.push_back({row, RunMatchup(spec).stats});
  }
  return results;
}

namespace {

std::string Fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

}  // namespace

void WriteStatsCsvHeader(std::ostream& out) {
  out << "matchup,role,wins,games,win_rate,ci_low,ci_high,avg_moves,"
         "invalid_pct\n";
}

void WriteStatsCsvRow(std::ostream& out, const std::string& matchup, Role role,
                      const MatchStats& stats) {
  const std::int64_t wins = stats.wins[static_cast<int>(role)];
  const auto [lo, hi] = ComputeCi(wins, stats.games);
  out << matchup << ',' << RoleName(role) << ',' << wins << ',' << stats.games
      << ',' << Fixed(stats.win_rate(role), 4) << ',' << Fixed(lo, 4) << ','
      << Fixed(hi, 4) << ',' << Fixed(stats.avg_moves(), 2) << ','
      << Fixed(100.0 * stats.invalid_fraction(), 2) << '\n';
}

void WriteTable2Report(std::ostream& out,
                       const std::vector<Table2Result>& results) {
  out << std::left << std::setw(24) << "Matchup" << std::setw(11) << "Role"
      << std::right << std::setw(8) << "Win%" << std::setw(18) << "95% CI"
      << std::setw(12) << "Ref win%" << std::setw(11) << "Avg moves"
      << std::setw(12) << "Ref moves" << '\n';
  for (const Table2Result& r : results) {
    const Role role = r.row.evaluated;
    const auto [lo, hi] =
        ComputeCi(r.stats.wins[static_cast<int>(role)], r.stats.games);
    out << std::left << std::setw(24) << r.row.matchup << std::setw(11)
        << RoleName(role) << std::right << std::setw(8)
        << Fixed(100.0 * r.stats.win_rate(role), 1) << std::setw(18)
        << ("[" + Fixed(100.0 * lo, 1) + ", " + Fixed(100.0 * hi, 1) + "]")
        << std::setw(12) << Fixed(r.row.published_win_pct, 1) << std::setw(11)
        << Fixed(r.stats.avg_moves(), 1) << std::setw(12)
        << Fixed(r.row.published_avg_moves, 1) << '\n';
  }
}

}  // namespace flux
