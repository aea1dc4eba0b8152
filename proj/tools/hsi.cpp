#include <iostream>

#include "hsi/cli.hpp"

int main(int argc, char** argv) { return hsi::run_cli(argc, argv, std::cout, std::cerr); }
