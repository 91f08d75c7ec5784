#include <iostream>

#include "kgfilon/cli.hpp"

int main(int argc, char** argv) { return kgfilon::cli_main(argc, argv, std::cout, std::cerr); }
