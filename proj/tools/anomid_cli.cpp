#include <iostream>

#include "anomid/cli.hpp"

int main(int argc, char** argv) { return anomid::run_cli(argc, argv, std::cout, std::cerr); }
