#include <iostream>

#include "fiberalign/cli.hpp"

int main(int argc, char** argv) { return fiberalign::cli::run(argc, argv, std::cout, std::cerr); }
