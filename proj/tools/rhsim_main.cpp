#include "rhsim/cli.hpp"

int main(int argc, char** argv) { return rhsim::cli::dispatch(argc, argv); }
