#include <iostream>

#include "tokalloc/cli.hpp"

int main(int argc, char** argv) { return tokalloc::cli::run(argc, argv, std::cout, std::cerr); }
