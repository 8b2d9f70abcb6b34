#include "ellfit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ellfit::cli_main(argc, argv, std::cout, std::cerr); }
