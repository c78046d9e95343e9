#include <iostream>

#include "bifinf/cli.hpp"

int main(int argc, char** argv) { return bifinf::run_cli(argc, argv, std::cout, std::cerr); }
