// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The hiergen Authors

#include "hiergen/cli.hpp"

int main(int argc, char** argv) { return hiergen::cli::run(argc, argv); }
