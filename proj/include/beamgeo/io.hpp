#pragma once

#include <string>

#include "beamgeo/dynamics.hpp"

namespace beamgeo {

/// Throws Io naming the path.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Header t,x0,x1,x2,x3,v0,v1,v2,v3; round-trip decimal formatting.
std::string trajectory_csv(const Trajectory& series);

/// Header t,xi0,xi1,xi2,xi3,dxi0,dxi1,dxi2,dxi3.
std::string jacobi_csv(const JacobiSeries& series);

}  // namespace beamgeo
