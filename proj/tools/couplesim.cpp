#include <iostream>

#include "couplesim/cli.hpp"

int main(int argc, char** argv) { return couplesim::run_cli(argc, argv, std::cout, std::cerr); }
