#include <iostream>

#include "fishrect/cli.hpp"

int main(int argc, char** argv) { return fishrect::run_cli(argc, argv, std::cout, std::cerr); }
