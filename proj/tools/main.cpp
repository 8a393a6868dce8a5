#include <iostream>

#include "tmat/cli.hpp"

int main(int argc, char** argv) { return tmat::cli::run(argc, argv, std::cout, std::cerr); }
