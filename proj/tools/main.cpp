#include <iostream>

#include "invcone/cli.hpp"

int main(int argc, char** argv) { return invcone::cli::run(argc, argv, std::cout, std::cerr); }
