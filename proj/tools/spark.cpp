// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "spark/cli.hpp"

int main(int argc, char** argv) { return spark::cli::run(argc, argv, std::cout, std::cerr); }
