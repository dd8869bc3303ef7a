#include <iostream>

#include "lfsc/cli.hpp"

int main(int argc, char** argv) { return lfsc::run_cli(argc, argv, std::cout, std::cerr); }
