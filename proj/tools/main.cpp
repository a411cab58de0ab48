#include <iostream>

#include "sgf/cli.hpp"

int main(int argc, char** argv) { return sgf::run_cli(argc, argv, std::cout, std::cerr); }
