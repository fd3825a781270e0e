#include "homog/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return homog::run_cli(argc, argv, std::cout, std::cerr); }
