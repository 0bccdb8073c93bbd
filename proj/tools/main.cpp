#include <iostream>

#include "hietan_cli.hpp"

int main(int argc, char** argv) { return hietan::cli::run(argc, argv, std::cout, std::cerr); }
