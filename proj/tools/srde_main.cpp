#include <iostream>

#include "srde/cli.hpp"

int main(int argc, char** argv) { return srde::cli::main_entry(argc, argv, std::cout, std::cerr); }
