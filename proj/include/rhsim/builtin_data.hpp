#pragma once

#include <string_view>
#include <vector>

namespace rhsim {

/// Text of a file shipped under data/ and compiled into the library
/// ("sequences.cfg", "profiles/vendor1.cfg", ...). Empty if unknown.
std::string_view builtin_file(std::string_view name);
std::vector<std::string_view> builtin_files();

}  // namespace rhsim
