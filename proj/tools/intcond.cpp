#include "intcond/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return intcond::cli::main(argc, argv, std::cout, std::cerr); }
