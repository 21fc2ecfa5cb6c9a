#include <iostream>

#include "taxnet/cli.hpp"

int main(int argc, char** argv) { return taxnet::cli::main(argc, argv, std::cout, std::cerr); }
