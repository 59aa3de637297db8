#include <iostream>

#include "magclimb/cli/cli.hpp"

int main(int argc, char** argv) { return magclimb::cli::run_cli(argc, argv, std::cout, std::cerr); }
