#include <iostream>

#include "otrf_cli/app.hpp"

int main(int argc, char** argv) { return otrf::cli::run_cli(argc, argv, std::cout, std::cerr); }
