#include <iostream>

#include "spikes/cli.hpp"

int main(int argc, char** argv) { return spikes::cli::run(argc, argv, std::cout, std::cerr); }
