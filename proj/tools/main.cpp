#include <iostream>

#include "vgf/cli.hpp"

int main(int argc, char** argv) { return vgf::cli::run(argc, argv, std::cout, std::cerr); }
