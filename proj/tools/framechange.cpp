#include <iostream>

#include "framechange/cli.hpp"

int main(int argc, char** argv) { return framechange::run_cli(argc, argv, std::cout, std::cerr); }
