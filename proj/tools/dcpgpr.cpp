// SPDX-License-Identifier: Apache-2.0
#include "dcpgpr/cli.hpp"

int main(int argc, char** argv) { return dcpgpr::cli::run(argc, argv); }
