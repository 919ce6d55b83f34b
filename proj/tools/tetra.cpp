#include <iostream>

#include "tetra/cli.hpp"

int main(int argc, char **argv) { return tetra::run_cli(argc, argv, std::cout, std::cerr); }
