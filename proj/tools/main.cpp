#include "cli.hpp"

int main(int argc, char** argv) { return beamgeo::cli::run(argc, argv); }
