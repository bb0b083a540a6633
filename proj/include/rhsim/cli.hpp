#pragma once

#include <iosfwd>

namespace rhsim::cli {

/// Exit status: 0 success / all rows pass, 2 flips or map differences
/// found, 1 usage or runtime error.
int dispatch(int argc, char** argv);
int dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rhsim::cli
