#include "changeminer/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return changeminer::cli_main(argc, argv, std::cout, std::cerr); }
