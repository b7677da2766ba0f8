#include "flux/qtable.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace flux {

double QTable::Get(const std::string& key, int code) const {
  const ActionValues* values = Find(key);
  if (values == nullptr) return 0.0;
  auto it = values->find(code);
  return it == values->end() ? 0.0 : it->second;
}

const QTable::ActionValues* QTable::Find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void QTable::Set(const std::string& key, int code, double value) {
  entries_[key][code] = value;
}

std::string FormatShortest(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string SerializeQTable(const QTable& table) {
  std::vector<const std::pair<const std::string, QTable::ActionValues>*> rows;
  rows.reserve(table.size());
  for (const auto& entry : table.entries()) rows.push_back(&entry);
  std::sort(rows.begin(), rows.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });

  std::ostringstream out;
  out << "#role=" << RoleName(table.role()) << '\n'
      << "#episodes=" << table.episodes() << '\n'
      << "#config_digest=" << table.config_digest() << '\n'
      << "#entries=" << rows.size() << '\n';
  for (const auto* row : rows) {
    out << row->first << '\t';
    bool first = true;
    for (const auto& [code, value] : row->second) {
      if (!first) out << ';';
      first = false;
      out << code << '=' << FormatShortest(value);
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::string_view HeaderValue(std::string_view line, std::string_view name,
                             int line_no) {
  const std::string prefix = "#" + std::string(name) + "=";
  if (line.substr(0, prefix.size()) != prefix) {
    throw FormatError(line_no, "expected header " + prefix);
  }
  return line.substr(prefix.size());
}

std::int64_t ParseInt(std::string_view text, int line_no) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw FormatError(line_no, "bad integer '" + std::string(text) + "'");
  }
  return value;
}

double ParseDouble(std::string_view text, int line_no) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    throw FormatError(line_no, "bad value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

QTable ParseQTable(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    if (nl == std::string_view::npos) {
      throw FormatError(static_cast<int>(lines.size()) + 1,
                        "missing trailing newline (truncated file?)");
    }
    lines.push_back(rest.substr(0, nl));
    rest.remove_prefix(nl + 1);
  }
  if (lines.size() < 4) {
    throw FormatError(static_cast<int>(lines.size()) + 1, "missing header");
  }

  Role role;
  try {
    role = ParseRole(HeaderValue(lines[0], "role", 1));
  } catch (const std::invalid_argument& e) {
    throw FormatError(1, e.what());
  }
  QTable table(role);
  const std::int64_t episodes = ParseInt(HeaderValue(lines[1], "episodes", 2), 2);
  table.set_metadata(episodes,
                     std::string(HeaderValue(lines[2], "config_digest", 3)));
  const std::int64_t expected = ParseInt(HeaderValue(lines[3], "entries", 4), 4);

  for (std::size_t i = 4; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    std::string_view line = lines[i];
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw FormatError(line_no, "expected <state_key>\\t<values>");
    }
    const std::string key(line.substr(0, tab));
    GameState state;
    try {
      state = ParseStateKey(key);
    } catch (const std::invalid_argument& e) {
      throw FormatError(line_no, e.what());
    }
    if (table.Find(key) != nullptr) {
      throw FormatError(line_no, "duplicate state " + key);
    }
    std::string_view values = line.substr(tab + 1);
    if (values.empty()) throw FormatError(line_no, "state with no values");
    while (true) {
      const auto semi = values.find(';');
      std::string_view item = values.substr(0, semi);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw FormatError(line_no, "expected <code>=<value>");
      }
      const auto code = ParseInt(item.substr(0, eq), line_no);
      if (code < 0 || code >= 2 * state.size()) {
        throw FormatError(line_no, "action code " + std::to_string(code) +
                                       " invalid for " + key);
      }
      table.Set(key, static_cast<int>(code),
                ParseDouble(item.substr(eq + 1), line_no));
      if (semi == std::string_view::npos) break;
      values.remove_prefix(semi + 1);
    }
  }
  if (static_cast<std::int64_t>(table.size()) != expected) {
    throw FormatError(static_cast<int>(lines.size()) + 1,
                      "expected " + std::to_string(expected) + " entries, got " +
                          std::to_string(table.size()));
  }
  return table;
}

void SaveQTable(const QTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << SerializeQTable(table);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

QTable LoadQTable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseQTable(buf.str());
}

}  // namespace flux
