// Copyright 2026 The AGC Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "agc_cli/app.hpp"

int main(int argc, char** argv) { return agc::cli::run_cli(argc, argv, std::cout, std::cerr); }
