#include <iostream>

#include "perorbit/cli.hpp"

int main(int argc, char** argv) { return perorbit::run_cli(argc, argv, std::cout, std::cerr); }
