#include <iostream>

#include "courtsketch/cli.hpp"

int main(int argc, char** argv) { return courtsketch::cli_dispatch(argc, argv, std::cout, std::cerr); }
