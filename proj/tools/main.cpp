#include <iostream>

#include "yamlsmith/cli.hpp"

int main(int argc, char** argv) { return yamlsmith::cli::run_cli(argc, argv, std::cout, std::cerr); }
