#include "capsurf/cli.hpp"

int main(int argc, char** argv) { return capsurf::cli::run_cli(argc, argv); }
