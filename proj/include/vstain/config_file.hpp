#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vstain {

class ConfigFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
/// Keys keep file order; a repeated key is an error.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

/// Prepends `--key=value` for every config entry whose option does not
/// already appear in args, so command-line flags take precedence.
std::vector<std::string> merge_config_args(const std::vector<std::pair<std::string, std::string>>& entries,
                                           const std::vector<std::string>& args);

}  // namespace vstain
