#include <iostream>

#include "tacnode/cli.hpp"

int main(int argc, char** argv) { return tacnode::run_cli(argc, argv, std::cout, std::cerr); }
