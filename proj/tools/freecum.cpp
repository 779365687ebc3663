#include "freecum/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return freecum::cli::run(argc, argv, std::cout, std::cerr); }
