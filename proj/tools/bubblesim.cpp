#include <iostream>

#include "bubblesim/cli.hpp"

int main(int argc, char** argv) { return bubblesim::cli::dispatch(argc, argv, std::cout, std::cerr); }
