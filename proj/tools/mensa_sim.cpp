// SPDX-License-Identifier: Apache-2.0
#include "mensa/cli.hpp"

int main(int argc, char** argv) { return mensa::cli::run(argc, argv); }
