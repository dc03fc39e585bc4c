#include <iostream>

#include "vsa/cli.hpp"

int main(int argc, char** argv) { return vsa::cli::run_cli(argc, argv, std::cout, std::cerr); }
