#ifndef FLUX_HUMAN_H_
#define FLUX_HUMAN_H_

#include <istream>
#include <ostream>

#include "flux/agents.h"

namespace flux {

// Terminal player. Moves are typed as "AMPLIFY i" / "DRAIN i"; anything the
// reply parser rejects prompts again instead of forfeiting the turn.
class HumanAgent : public Agent {
 public:
  HumanAgent(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  // Throws std::runtime_error if input ends mid-game.
  Decision Choose(const GameState& state, Role role,
                  SeededRandomSource& rng) override;
  std::string name() const override { return "human"; }

 private:
  std::istream& in_;
  std::ostream& out_;
};

}  // namespace flux

#endif  // FLUX_HUMAN_H_
