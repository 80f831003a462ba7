#include "instrsynth/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return instrsynth::run_cli(argc, argv, std::cout, std::cerr); }
