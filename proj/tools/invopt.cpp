// Copyright 2026 The invopt Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "invopt/cli.hpp"

int main(int argc, char** argv) { return invopt::cli::run(argc, argv, std::cout, std::cerr); }
