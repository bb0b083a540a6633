#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rhsim {

/// Line-oriented `key = value` text used by every config file in the toolkit.
/// `#` starts a comment, keys may repeat (list-valued settings), and
/// `[name]` opens a section whose name is kept on each following entry.
class KvConfig {
  public:
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
        int line = 0;
    };

    static KvConfig parse(std::string_view text);
    static KvConfig load(const std::string& path);

    const std::vector<Entry>& entries() const { return entries_; }

    /// Last value of `key` in `section` (empty section = top level).
    std::optional<std::string> get(std::string_view key, std::string_view section = {}) const;
    std::vector<const Entry*> all(std::string_view key, std::string_view section = {}) const;
    std::vector<std::string> sections() const;

    std::string get_or(std::string_view key, std::string_view fallback, std::string_view section = {}) const;
    double get_double(std::string_view key, double fallback, std::string_view section = {}) const;
    std::uint64_t get_uint(std::string_view key, std::uint64_t fallback, std::string_view section = {}) const;

    void add(std::string key, std::string value, std::string section = {});
    /// Replaces every occurrence of `key` (or appends) in the given section.
    void set(std::string_view key, std::string value, std::string_view section = {});

  private:
    std::vector<Entry> entries_;
};

std::vector<std::string> split_ws(std::string_view text);
std::string_view trim(std::string_view s);
std::string read_file(const std::string& path);

}  // namespace rhsim
