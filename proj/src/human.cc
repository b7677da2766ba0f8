#include "flux/human.h"

#include <stdexcept>
#include <string>

#include "flux/llm.h"

namespace flux {

Decision HumanAgent::Choose(const GameState& state, Role role,
                            SeededRandomSource&) {
  const Observation obs = RenderObservation(state, role, false);
  out_ << '\n' << obs.role_banner << '\n' << obs.board_table << '\n';
  std::string line;
  while (true) {
    out_ << "your move> " << std::flush;
    if (!std::getline(in_, line)) throw std::runtime_error("input closed");
    const ParsedReply reply = ParseReply(line, state);
    if (reply.ok()) return {reply.action, std::nullopt};
    if (reply.status == ParseStatus::kOutOfRange) {
      out_ << "No such cell; indices run from 0 to " << state.size() - 1
           << ".\n";
    } else {
      out_ << "Type AMPLIFY <index> or DRAIN <index>.\n";
    }
  }
}

}  // namespace flux
