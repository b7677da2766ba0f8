#ifndef FLUX_QTABLE_H_
#define FLUX_QTABLE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "flux/env.h"

namespace flux {

class FormatError : public std::runtime_error {
 public:
  FormatError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Per-role action-value table keyed by StateKey(). Absent entries read as 0.
class QTable {
 public:
  using ActionValues = std::map<int, double>;  // encoded action -> estimate

  explicit QTable(Role role = Role::kShrinker) : role_(role) {}

  Role role() const { return role_; }
  std::int64_t episodes() const { return episodes_; }
  const std::string& config_digest() const { return config_digest_; }
  void set_metadata(std::int64_t episodes, std::string digest) {
    episodes_ = episodes;
    config_digest_ = std::move(digest);
  }

  double Get(const std::string& key, int code) const;
  // nullptr when the state was never updated.
  const ActionValues* Find(const std::string& key) const;
  void Set(const std::string& key, int code, double value);

  std::size_t size() const { return entries_.size(); }
  const std::unordered_map<std::string, ActionValues>& entries() const {
    return entries_;
  }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  Role role_;
  std::int64_t episodes_ = 0;
  std::string config_digest_;
  std::unordered_map<std::string, ActionValues> entries_;
};

// Text format:
//   #role=<shrinker|amplifier>
//   #episodes=<n>
//   #config_digest=<hex>
//   #entries=<n>
//   <state_key>\t<code>=<value>;<code>=<value>;...
// Records are sorted by key; values use the shortest round-trip decimal form.
std::string SerializeQTable(const QTable& table);
QTable ParseQTable(const std::string& text);  // throws FormatError

void SaveQTable(const QTable& table, const std::filesystem::path& path);
QTable LoadQTable(const std::filesystem::path& path);

// Shortest decimal that parses back to exactly `value`.
std::string FormatShortest(double value);

}  // namespace flux

#endif  // FLUX_QTABLE_H_
