#pragma once

namespace beamgeo::cli {

/// Runs the command line. Returns 0 on success, 1 on a domain error (one
/// line on stderr), 2 on a usage error.
int run(int argc, char** argv);

}  // namespace beamgeo::cli
