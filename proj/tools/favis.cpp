#include "favis/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return favis::run_cli(argc, argv, std::cout, std::cerr); }
