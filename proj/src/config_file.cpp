#include "vstain/config_file.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace vstain {

namespace {
std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigFileError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos)
      throw ConfigFileError("config line " + std::to_string(line_no) + ": invalid key");
    if (!seen.insert(key).second)
      throw ConfigFileError("config line " + std::to_string(line_no) + ": duplicate key " + key);
    entries.emplace_back(key, value);
  }
  return entries;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<std::string> merge_config_args(const std::vector<std::pair<std::string, std::string>>& entries,
                                           const std::vector<std::string>& args) {
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> out;
  for (const auto& [key, value] : entries)
    if (!given(key)) out.push_back("--" + key + "=" + value);
  out.insert(out.end(), args.begin(), args.end());
  return out;
}

}  // namespace vstain
